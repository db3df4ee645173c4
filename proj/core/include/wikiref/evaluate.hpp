#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/step1.hpp"
#include "wikiref/step2.hpp"

namespace wikiref {

// Normalized titles of the references already on the page; the ground
// truth for both labeling and scoring. Empty keys are excluded.
std::set<std::string> gold_references(const WikiPage& target);

// Pages usable as evaluation targets: at least one reference with a
// nonempty key and at least one distinct in-corpus wikilink to another
// page. Corpus order.
std::vector<std::string> default_eval_targets(const Corpus& corpus, const LinkGraph& graph);

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

// Seeded shuffle, then the first ceil(ratio*N) titles go to train. The
// test side can come out empty for extreme ratios; evaluation rejects
// that later.
SplitResult split_corpus(const std::vector<std::string>& targets, double ratio,
                         std::uint64_t seed);

struct MetricsAtK {
    std::size_t k = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

// Hits over the top min(k, |ranked|) entries; recall against |gold|;
// empty list or empty gold yield zeros.
MetricsAtK precision_recall_f_at_k(const std::vector<std::string>& ranked_keys,
                                   const std::set<std::string>& gold, std::size_t k);

enum class SystemId : int { BL1 = 0, BL2, BL3, BL4, BL5, WikiRef };

std::string_view system_name(SystemId id);                       // "BL-I".."BL-V", "WikiRef"
std::optional<SystemId> system_from_name(std::string_view name);
const std::vector<SystemId>& all_systems();                      // canonical report order

struct EvalConfig {
    double split_ratio = 0.7;
    std::vector<std::size_t> ks = {1, 2, 3, 4, 5, 10};
    std::uint64_t seed = 0;
    std::vector<SystemId> systems = all_systems();
    std::vector<std::string> targets;  // empty means default_eval_targets

    void validate() const;  // throws ConfigError
};

// Immutable per-corpus inputs shared by every stage.
struct PipelineContext {
    const Corpus* corpus = nullptr;
    const EmbeddingProvider* provider = nullptr;
    LinkGraph graph;
    IdfTable idf;
};

// Fits idf over one document per page (all sentences plus all reference
// titles) and builds the link graph. jobs only parallelizes tokenization;
// the result is identical for any job count.
PipelineContext build_context(const Corpus& corpus, const EmbeddingProvider& provider,
                              std::size_t jobs = 1);

// Distinct in-corpus non-self wikilink pages, first-mention order.
std::vector<const WikiPage*> candidate_links(const WikiPage& target, const Corpus& corpus);

struct TrainedModels {
    ForestModel forest;
    RankerModel ranker;
};

struct StepOneTrainParams {
    EnnParams enn;
    ForestParams forest;
    std::size_t chi_bins = 10;
};

struct TrainingOutcome {
    TrainedModels models;
    std::vector<ChiSquareEntry> chi_order;
    LabelDiagnostics label_diagnostics;
    std::vector<LabeledExample> labeled;  // Step-I examples before editing
    std::size_t examples = 0;
    std::size_t examples_removed = 0;  // dropped by undersampling
    std::size_t enn_rounds = 0;
    PairwiseStats pairwise;
};

// split -> label -> undersample -> chi-square -> forest -> ranker. The
// ranker trains on references reachable through gold-labeled relevant
// links of the train targets. Forest and ranker seeds derive from `seed`.
TrainingOutcome train_pipeline(const PipelineContext& ctx,
                               const std::vector<std::string>& train_targets,
                               const StepOneTrainParams& step1_params,
                               const RankerParams& ranker_params, std::uint64_t seed);

// One recommendation list per system. BL-I/BL-II take every candidate
// link; the rest classify first. Baselines score by a single raw feature;
// WikiRef scores by the trained ranker. All share rank_references.
// links_out, when given, receives the link set the system pooled from.
std::vector<Recommendation> run_system(SystemId id, const WikiPage& target,
                                       const PipelineContext& ctx,
                                       const TrainedModels& models,
                                       const RecommendOptions& options,
                                       std::vector<const WikiPage*>* links_out = nullptr);

// Positions 1..n by descending value; ties share the mean position.
std::vector<double> fractional_ranks(const std::vector<double>& values);

// Pearson correlation of two rank vectors; 0 when either side is
// constant. Throws ShapeError unless both lengths are equal and >= 2.
double spearman_rho(const std::vector<double>& ranks_a, const std::vector<double>& ranks_b);

struct VoteEntry {
    std::string ref_key;
    double votes = 0.0;
};
using VotesTable = std::map<std::string, std::vector<VoteEntry>>;

// JSON object: target title -> [{"ref_key": ..., "votes": ...}, ...].
// Each target needs at least two entries for a rank correlation.
VotesTable parse_votes(const std::string& json_text);

struct StepOneEval {
    std::size_t examples = 0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;  // relevant = positive class
    double precision = 0.0, recall = 0.0, f_measure = 0.0;
    double precision_irrelevant = 0.0, recall_irrelevant = 0.0, f_irrelevant = 0.0;
};

struct KRow {
    std::size_t k = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    // Diagnostic recall whose denominator is only the gold references
    // reachable through the system's link set.
    double recall_reachable = 0.0;
};

struct SystemEval {
    SystemId id = SystemId::WikiRef;
    std::vector<KRow> at_k;  // macro-averaged over all test targets
    std::size_t targets_with_candidates = 0;
    std::vector<KRow> at_k_with_candidates;
};

struct PerTargetRow {
    std::string system;
    std::string target;
    std::size_t k = 0;
    double precision = 0.0, recall = 0.0, f_measure = 0.0;
};

struct SpearmanEval {
    std::map<std::string, double> per_system;  // system name -> average rho
    std::size_t targets = 0;
};

struct EvalOutcome {
    std::vector<std::string> train_targets;
    std::vector<std::string> test_targets;
    StepOneEval step1;
    std::vector<ChiSquareEntry> chi_order;
    std::vector<SystemEval> systems;
    std::vector<PerTargetRow> per_target;
    std::optional<SpearmanEval> spearman;
};

// Evaluates pre-trained models: recomputes the split from the config
// seed, scores Step I on test wikilinks, runs every enabled system at
// each cutoff, and correlates against votes when given. chi_order is
// carried through from training into the report.
EvalOutcome evaluation_report(const PipelineContext& ctx, const EvalConfig& config,
                              const TrainedModels& models,
                              const std::vector<ChiSquareEntry>& chi_order,
                              const VotesTable* votes = nullptr);

// Everything the report files embed about the run that produced them.
struct ReportMeta {
    std::uint64_t master_seed = 0;
    std::string config_digest;
    std::string corpus_digest;
    std::size_t pages = 0;
    std::string embedding_name;
    std::size_t embedding_dim = 0;
};

std::string report_to_json(const EvalOutcome& outcome, const ReportMeta& meta);
std::string report_to_markdown(const EvalOutcome& outcome, const ReportMeta& meta);
std::string per_target_csv(const EvalOutcome& outcome);

// Inverse of report_to_json, so the markdown and CSV forms can be
// regenerated from a stored report. Throws SchemaError on malformed input.
std::pair<EvalOutcome, ReportMeta> report_from_json(const std::string& text);

}  // namespace wikiref
