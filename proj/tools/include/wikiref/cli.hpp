#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wikiref/evaluate.hpp"

namespace wikiref::cli {

// Resolved run configuration: config file merged with environment
// (WIKIREF_*) and command line overrides, paths checked, ranges checked.
struct RunConfig {
    std::string config_digest;  // digest of the raw config file bytes
    std::filesystem::path corpus;
    std::filesystem::path embeddings;
    std::filesystem::path votes;  // empty = no votes supplied
    std::filesystem::path out = "out";
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    StepOneTrainParams step1;
    RankerParams step2;
    RecommendOptions recommend;
    EvalConfig eval;
    std::filesystem::path forest_model;  // empty = <out>/forest.json
    std::filesystem::path ranker_model;  // empty = <out>/ranker.json

    std::filesystem::path forest_path() const;
    std::filesystem::path ranker_path() const;
};

// Parses and validates a config file. Unknown keys are rejected so typos
// fail before hours of feature extraction. Referenced input paths must
// exist. Throws ConfigError / SchemaError / IoError.
RunConfig load_run_config(const std::string& path);

// Entry point behind main(). Returns the process exit code:
// 0 success, 2 input or schema error, 3 configuration error, 4 internal.
int run_cli(int argc, char** argv);

}  // namespace wikiref::cli
