#include "wikiref/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/util.hpp"
#include "wikiref/version.hpp"
#include "wikiref/wikitext.hpp"

namespace wikiref::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError("config: unknown key '" + where + key + "'");
        }
    }
}

void require_exists(const fs::path& path, const std::string& key) {
    if (!fs::exists(path)) {
        throw ConfigError("config: " + key + " path does not exist: " + path.string());
    }
}

std::vector<std::size_t> parse_feature_subset(const ordered_json& arr) {
    std::vector<std::size_t> subset;
    for (const auto& item : arr) {
        if (item.is_number_unsigned()) {
            subset.push_back(item.get<std::size_t>());
            continue;
        }
        if (item.is_string()) {
            auto name = item.get<std::string>();
            const auto& names = Step1Features::names();
            auto it = std::find_if(names.begin(), names.end(),
                                   [&](const char* n) { return name == n; });
            if (it == names.end()) {
                throw ConfigError("config: unknown feature name '" + name +
                                  "' in step1.forest.feature_subset");
            }
            subset.push_back(static_cast<std::size_t>(it - names.begin()));
            continue;
        }
        throw ConfigError("config: step1.forest.feature_subset entries must be "
                          "feature names or indices");
    }
    return subset;
}

}  // namespace

fs::path RunConfig::forest_path() const {
    return forest_model.empty() ? out / "forest.json" : forest_model;
}

fs::path RunConfig::ranker_path() const {
    return ranker_model.empty() ? out / "ranker.json" : ranker_model;
}

RunConfig load_run_config(const std::string& path) {
    std::string raw = read_file(path);
    ordered_json j;
    try {
        j = ordered_json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("config: invalid JSON in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaError("config: top level must be an object");

    RunConfig cfg;
    cfg.config_digest = digest64_hex(raw);
    try {
        check_keys(j, {"corpus", "embeddings", "votes", "out", "seed", "jobs", "step1",
                       "step2", "recommend", "eval", "models"},
                   "");
        if (j.contains("corpus")) cfg.corpus = j["corpus"].get<std::string>();
        if (j.contains("embeddings")) cfg.embeddings = j["embeddings"].get<std::string>();
        if (j.contains("votes")) cfg.votes = j["votes"].get<std::string>();
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("jobs")) cfg.jobs = j["jobs"].get<std::size_t>();

        if (j.contains("step1")) {
            const auto& s1 = j["step1"];
            check_keys(s1, {"enn", "chi_bins", "forest"}, "step1.");
            if (s1.contains("enn")) {
                const auto& enn = s1["enn"];
                check_keys(enn, {"k_neighbors", "max_rounds"}, "step1.enn.");
                if (enn.contains("k_neighbors")) {
                    cfg.step1.enn.k_neighbors = enn["k_neighbors"].get<std::size_t>();
                }
                if (enn.contains("max_rounds")) {
                    cfg.step1.enn.max_rounds = enn["max_rounds"].get<std::size_t>();
                }
            }
            if (s1.contains("chi_bins")) cfg.step1.chi_bins = s1["chi_bins"].get<std::size_t>();
            if (s1.contains("forest")) {
                const auto& f = s1["forest"];
                check_keys(f,
                           {"tree_count", "max_depth", "min_leaf", "features_per_split",
                            "feature_subset"},
                           "step1.forest.");
                if (f.contains("tree_count")) {
                    cfg.step1.forest.tree_count = f["tree_count"].get<std::size_t>();
                }
                if (f.contains("max_depth")) {
                    cfg.step1.forest.max_depth = f["max_depth"].get<std::size_t>();
                }
                if (f.contains("min_leaf")) {
                    cfg.step1.forest.min_leaf = f["min_leaf"].get<std::size_t>();
                }
                if (f.contains("features_per_split")) {
                    cfg.step1.forest.features_per_split =
                        f["features_per_split"].get<std::size_t>();
                }
                if (f.contains("feature_subset")) {
                    cfg.step1.forest.feature_subset =
                        parse_feature_subset(f["feature_subset"]);
                }
            }
        }
        if (j.contains("step2")) {
            const auto& s2 = j["step2"];
            check_keys(s2, {"C", "epochs"}, "step2.");
            if (s2.contains("C")) cfg.step2.C = s2["C"].get<double>();
            if (s2.contains("epochs")) cfg.step2.epochs = s2["epochs"].get<std::size_t>();
        }
        if (j.contains("recommend")) {
            const auto& r = j["recommend"];
            check_keys(r, {"k", "exclude_existing", "per_link"}, "recommend.");
            if (r.contains("k")) cfg.recommend.k = r["k"].get<std::size_t>();
            if (r.contains("exclude_existing")) {
                cfg.recommend.exclude_existing = r["exclude_existing"].get<bool>();
            }
            if (r.contains("per_link")) cfg.recommend.per_link = r["per_link"].get<bool>();
        }
        if (j.contains("eval")) {
            const auto& e = j["eval"];
            check_keys(e, {"split_ratio", "ks", "systems", "targets"}, "eval.");
            if (e.contains("split_ratio")) {
                cfg.eval.split_ratio = e["split_ratio"].get<double>();
            }
            if (e.contains("ks")) cfg.eval.ks = e["ks"].get<std::vector<std::size_t>>();
            if (e.contains("systems")) {
                cfg.eval.systems.clear();
                for (const auto& name : e["systems"]) {
                    auto id = system_from_name(name.get<std::string>());
                    if (!id.has_value()) {
                        throw ConfigError("config: unknown system '" +
                                          name.get<std::string>() + "' in eval.systems");
                    }
                    cfg.eval.systems.push_back(*id);
                }
            }
            if (e.contains("targets")) {
                cfg.eval.targets = e["targets"].get<std::vector<std::string>>();
            }
        }
        if (j.contains("models")) {
            const auto& m = j["models"];
            check_keys(m, {"forest", "ranker"}, "models.");
            if (m.contains("forest")) cfg.forest_model = m["forest"].get<std::string>();
            if (m.contains("ranker")) cfg.ranker_model = m["ranker"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("config: " + path + ": " + e.what());
    }

    if (!cfg.corpus.empty()) require_exists(cfg.corpus, "corpus");
    if (!cfg.embeddings.empty()) require_exists(cfg.embeddings, "embeddings");
    if (!cfg.votes.empty()) require_exists(cfg.votes, "votes");
    if (cfg.jobs == 0) throw ConfigError("config: jobs must be at least 1");
    cfg.eval.validate();
    return cfg;
}

namespace {

struct LoadedPipeline {
    Corpus corpus;
    EmbeddingProvider provider;
    PipelineContext ctx;
};

LoadedPipeline load_pipeline(const RunConfig& cfg) {
    if (cfg.corpus.empty()) throw ConfigError("config: corpus path is required");
    if (cfg.embeddings.empty()) throw ConfigError("config: embeddings path is required");
    LoadedPipeline p;
    p.corpus = Corpus::load_jsonl(cfg.corpus.string());
    p.provider = EmbeddingProvider::load_word_vectors(cfg.embeddings.string());
    p.ctx = build_context(p.corpus, p.provider, cfg.jobs);
    return p;
}

std::vector<std::string> eval_targets(const RunConfig& cfg, const PipelineContext& ctx) {
    if (!cfg.eval.targets.empty()) {
        for (const auto& t : cfg.eval.targets) ctx.corpus->at(t);
        return cfg.eval.targets;
    }
    return default_eval_targets(*ctx.corpus, ctx.graph);
}

int cmd_ingest(const RunConfig& cfg, const std::string& input, std::string output) {
    std::string text = read_file(input);
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw SchemaError("input file is empty: " + input);
    }

    Corpus corpus;
    if (text[first] == '{') {
        corpus = Corpus::load_jsonl(input);
    } else if (text.compare(first, 6, "%%PAGE") == 0) {
        corpus = ingest_bundle_text(text);
    } else {
        throw SchemaError("unrecognized input format (expected JSON records or a "
                          "%%PAGE bundle): " + input);
    }
    if (corpus.empty()) throw SchemaError("input contains no pages: " + input);

    if (output.empty()) output = (cfg.out / "corpus.jsonl").string();
    fs::path out_path(output);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    corpus.save_jsonl(out_path.string());

    CorpusMeta meta = corpus.meta();
    fs::path meta_path = out_path;
    meta_path.replace_extension(".meta.json");
    write_file(meta_path.string(), meta.to_json() + "\n");

    std::cout << "ingested " << meta.pages << " pages, " << meta.wikilinks
              << " wikilinks, " << meta.references << " references -> "
              << out_path.string() << "\n";
    std::cout << "corpus digest " << meta.corpus_digest << " -> " << meta_path.string()
              << "\n";
    return 0;
}

ordered_json chi_to_json(const std::vector<ChiSquareEntry>& chi) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < chi.size(); ++i) {
        ordered_json e;
        e["rank"] = i + 1;
        e["feature"] = chi[i].feature_name;
        e["index"] = chi[i].feature_index;
        e["score"] = chi[i].score;
        arr.push_back(std::move(e));
    }
    return arr;
}

std::vector<ChiSquareEntry> chi_from_json(const ordered_json& arr) {
    std::vector<ChiSquareEntry> chi;
    for (const auto& e : arr) {
        ChiSquareEntry entry;
        entry.feature_index = e.at("index").get<std::size_t>();
        entry.feature_name = e.at("feature").get<std::string>();
        entry.score = e.at("score").get<double>();
        chi.push_back(std::move(entry));
    }
    return chi;
}

// Runs the full training pipeline and persists every artifact.
TrainingOutcome train_and_persist(const RunConfig& cfg, const LoadedPipeline& p) {
    auto targets = eval_targets(cfg, p.ctx);
    SplitResult split =
        split_corpus(targets, cfg.eval.split_ratio, stage_seed(cfg.seed, "split"));
    if (split.train.empty()) throw ConfigError("training split is empty");

    TrainingOutcome outcome =
        train_pipeline(p.ctx, split.train, cfg.step1, cfg.step2, cfg.seed);

    fs::create_directories(cfg.out);
    outcome.models.forest.save(cfg.forest_path());
    outcome.models.ranker.save(cfg.ranker_path());
    write_file((cfg.out / "features_step1.csv").string(), feature_csv(outcome.labeled));

    CorpusMeta meta = p.corpus.meta();
    ordered_json log;
    log["artifact"] = {{"name", "wikiref"}, {"version", kArtifactVersion}};
    log["master_seed"] = cfg.seed;
    log["config_digest"] = cfg.config_digest;
    log["corpus_digest"] = meta.corpus_digest;
    log["split"] = {{"train", split.train}, {"test", split.test}};
    ordered_json s1;
    s1["examples"] = outcome.examples;
    s1["removed_by_enn"] = outcome.examples_removed;
    s1["enn_rounds"] = outcome.enn_rounds;
    s1["diagnostics"] = {{"absent_links", outcome.label_diagnostics.absent_links},
                         {"duplicate_links", outcome.label_diagnostics.duplicate_links},
                         {"self_links", outcome.label_diagnostics.self_links}};
    log["step1"] = std::move(s1);
    log["chi_square"] = chi_to_json(outcome.chi_order);
    log["pairwise"] = {{"queries_used", outcome.pairwise.queries_used},
                       {"queries_skipped", outcome.pairwise.queries_skipped},
                       {"pairs", outcome.pairwise.pairs}};
    log["models"] = {
        {"forest",
         {{"path", cfg.forest_path().string()},
          {"digest", digest64_hex(outcome.models.forest.serialize())}}},
        {"ranker",
         {{"path", cfg.ranker_path().string()},
          {"digest", digest64_hex(outcome.models.ranker.serialize())}}}};
    write_file((cfg.out / "training_log.json").string(), log.dump(2) + "\n");
    return outcome;
}

int cmd_train(const RunConfig& cfg) {
    LoadedPipeline p = load_pipeline(cfg);
    TrainingOutcome outcome = train_and_persist(cfg, p);
    std::cout << "trained on " << outcome.examples << " wikilink examples ("
              << outcome.examples_removed << " removed by undersampling in "
              << outcome.enn_rounds << " rounds)\n";
    std::cout << "feature ranking:";
    for (const auto& e : outcome.chi_order) std::cout << " " << e.feature_name;
    std::cout << "\n";
    std::cout << "ranker pairs: " << outcome.pairwise.pairs << " from "
              << outcome.pairwise.queries_used << " queries\n";
    std::cout << "models -> " << cfg.forest_path().string() << ", "
              << cfg.ranker_path().string() << "\n";
    return 0;
}

TrainedModels load_models(const RunConfig& cfg) {
    fs::path forest = cfg.forest_path();
    fs::path ranker = cfg.ranker_path();
    if (!fs::exists(forest) || !fs::exists(ranker)) {
        throw ConfigError("no trained models at " + forest.string() + " / " +
                          ranker.string() + "; run `wikiref train` first or pass --train");
    }
    TrainedModels models;
    models.forest = ForestModel::load(forest);
    models.ranker = RankerModel::load(ranker);
    return models;
}

int cmd_recommend(const RunConfig& cfg, const std::string& target_title,
                  std::optional<std::size_t> k, bool table) {
    LoadedPipeline p = load_pipeline(cfg);
    TrainedModels models = load_models(cfg);
    const WikiPage& target = p.corpus.at(canonicalize_title(target_title));

    RecommendOptions options = cfg.recommend;
    if (k.has_value()) options.k = *k;

    TrainedModels& m = models;
    std::vector<Recommendation> recs =
        run_system(SystemId::WikiRef, target, p.ctx, m, options);

    if (table) {
        std::cout << "target: " << target.title << "\n";
        if (recs.empty()) {
            std::cout << "(no recommendations)\n";
            return 0;
        }
        for (const auto& rec : recs) {
            std::cout << rec.rank << ". [" << format_double(rec.score) << "] "
                      << rec.reference.title << " (via " << rec.source_wikilink << ")\n";
        }
        return 0;
    }
    ordered_json out;
    out["target"] = target.title;
    out["k"] = options.k;
    ordered_json items = ordered_json::array();
    for (const auto& rec : recs) {
        ordered_json item;
        item["rank"] = rec.rank;
        item["score"] = rec.score;
        item["ref_title"] = rec.reference.title;
        item["ref_raw"] = rec.reference.raw;
        item["source_wikilink"] = rec.source_wikilink;
        items.push_back(std::move(item));
    }
    out["items"] = std::move(items);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, bool train_in_run) {
    LoadedPipeline p = load_pipeline(cfg);

    TrainedModels models;
    std::vector<ChiSquareEntry> chi;
    CorpusMeta meta = p.corpus.meta();
    if (train_in_run) {
        TrainingOutcome outcome = train_and_persist(cfg, p);
        models = std::move(outcome.models);
        chi = std::move(outcome.chi_order);
    } else {
        models = load_models(cfg);
        // Chi-square order comes from the training log when it matches
        // this corpus; otherwise it is recomputed from the train split.
        fs::path log_path = cfg.out / "training_log.json";
        bool have_chi = false;
        if (fs::exists(log_path)) {
            try {
                auto log = ordered_json::parse(read_file(log_path.string()));
                if (log.at("corpus_digest").get<std::string>() == meta.corpus_digest) {
                    chi = chi_from_json(log.at("chi_square"));
                    have_chi = true;
                }
            } catch (const std::exception&) {
                have_chi = false;
            }
        }
        if (!have_chi) {
            auto targets = eval_targets(cfg, p.ctx);
            SplitResult split = split_corpus(targets, cfg.eval.split_ratio,
                                             stage_seed(cfg.seed, "split"));
            std::vector<LabeledExample> examples;
            for (const auto& title : split.train) {
                const WikiPage& target = p.ctx.corpus->at(title);
                auto labeled = label_examples(target, *p.ctx.corpus, p.ctx.graph,
                                              p.ctx.idf, *p.ctx.provider,
                                              gold_references(target));
                examples.insert(examples.end(), labeled.begin(), labeled.end());
            }
            EnnResult edited = enn_undersample(examples, cfg.step1.enn);
            chi = chi_square_rank(edited.kept, cfg.step1.chi_bins);
        }
    }

    std::optional<VotesTable> votes;
    if (!cfg.votes.empty()) votes = parse_votes(read_file(cfg.votes.string()));

    EvalConfig eval_cfg = cfg.eval;
    eval_cfg.seed = cfg.seed;
    if (eval_cfg.targets.empty()) eval_cfg.targets = eval_targets(cfg, p.ctx);

    EvalOutcome outcome = evaluation_report(p.ctx, eval_cfg, models, chi,
                                            votes.has_value() ? &*votes : nullptr);

    ReportMeta report_meta;
    report_meta.master_seed = cfg.seed;
    report_meta.config_digest = cfg.config_digest;
    report_meta.corpus_digest = meta.corpus_digest;
    report_meta.pages = meta.pages;
    report_meta.embedding_name = p.provider.name();
    report_meta.embedding_dim = p.provider.dim();

    fs::create_directories(cfg.out);
    write_file((cfg.out / "report.json").string(), report_to_json(outcome, report_meta));
    write_file((cfg.out / "report.md").string(), report_to_markdown(outcome, report_meta));
    write_file((cfg.out / "report_targets.csv").string(), per_target_csv(outcome));

    std::cout << "evaluated " << outcome.test_targets.size() << " test targets ("
              << outcome.train_targets.size() << " train)\n";
    for (const auto& sys : outcome.systems) {
        if (sys.id == SystemId::WikiRef && !sys.at_k.empty()) {
            std::cout << "WikiRef precision@" << sys.at_k.front().k << " = "
                      << format_double(sys.at_k.front().precision) << "\n";
        }
    }
    std::cout << "report -> " << (cfg.out / "report.json").string() << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg, std::string in_path) {
    if (in_path.empty()) in_path = (cfg.out / "report.json").string();
    auto [outcome, meta] = report_from_json(read_file(in_path));
    std::string md = report_to_markdown(outcome, meta);

    fs::path base(in_path);
    fs::path md_path = base.parent_path() / "report.md";
    fs::path csv_path = base.parent_path() / "report_targets.csv";
    write_file(md_path.string(), md);
    write_file(csv_path.string(), per_target_csv(outcome));
    std::cout << md;
    return 0;
}

int cmd_make_wordvecs(const RunConfig& cfg, const std::string& corpus_override,
                      std::size_t dim, std::string output) {
    if (dim == 0) throw ConfigError("wordvec dimension must be at least 1");
    std::string corpus_path =
        corpus_override.empty() ? cfg.corpus.string() : corpus_override;
    if (corpus_path.empty()) {
        throw ConfigError("make-wordvecs needs a corpus (config or --corpus)");
    }
    Corpus corpus = Corpus::load_jsonl(corpus_path);

    std::set<std::string> vocabulary;
    for (const auto& page : corpus.pages()) {
        std::string doc = page.title;
        doc.push_back(' ');
        doc += page.summary;
        doc.push_back(' ');
        for (const auto& s : page.sentences) {
            doc += s;
            doc.push_back(' ');
        }
        for (const auto& ref : page.references) {
            doc += ref.title;
            doc.push_back(' ');
        }
        for (auto& token : tokenize(doc)) vocabulary.insert(std::move(token));
    }
    if (vocabulary.empty()) throw SchemaError("corpus yields no tokens");

    if (output.empty()) {
        output = (cfg.out / ("wordvecs_" + std::to_string(dim) + "d.txt")).string();
    }
    fs::path out_path(output);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());

    // Strictly positive components keep every cosine non-negative, which
    // mirrors how the bounded similarity features expect embeddings to
    // behave.
    std::string text = std::to_string(vocabulary.size()) + " " + std::to_string(dim) + "\n";
    for (const auto& token : vocabulary) {
        Rng rng(stage_seed(fnv1a64(token), "wordvec"));
        text += token;
        for (std::size_t d = 0; d < dim; ++d) {
            text.push_back(' ');
            text += format_double(0.05 + 0.95 * rng.next_unit());
        }
        text.push_back('\n');
    }
    write_file(out_path.string(), text);
    std::cout << "wrote " << vocabulary.size() << " vectors of dim " << dim << " -> "
              << out_path.string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Two-step wiki reference recommendation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::size_t jobs_override = 0;
    bool jobs_set = false;
    std::string out_override;

    app.add_option("--config", config_path, "Run configuration JSON file")
        ->envname("WIKIREF_CONFIG");
    app.add_option("--seed", seed_override, "Master seed (overrides config)")
        ->envname("WIKIREF_SEED")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--jobs", jobs_override, "Worker threads (overrides config)")
        ->envname("WIKIREF_JOBS")
        ->each([&](const std::string&) { jobs_set = true; });
    app.add_option("--out", out_override, "Output directory (overrides config)")
        ->envname("WIKIREF_OUT");

    auto* ingest = app.add_subcommand("ingest", "Validate pages into a corpus file");
    std::string ingest_input, ingest_output;
    ingest->add_option("input", ingest_input, "Corpus records or a %%PAGE wikitext bundle")
        ->required();
    ingest->add_option("--corpus-out", ingest_output,
                       "Corpus output path (default <out>/corpus.jsonl)");

    auto* train = app.add_subcommand("train", "Train the classifier and the ranker");

    auto* rec = app.add_subcommand("recommend", "Recommend references for one target page");
    std::string rec_target;
    std::size_t rec_k = 0;
    bool rec_k_set = false;
    bool rec_table = false;
    rec->add_option("--target", rec_target, "Target page title")->required();
    rec->add_option("-k,--k", rec_k, "List length (overrides config)")
        ->each([&](const std::string&) { rec_k_set = true; });
    rec->add_flag("--table", rec_table, "Plain-text table instead of JSON");

    auto* eval = app.add_subcommand("evaluate", "Score every enabled system on the test split");
    bool eval_train = false;
    std::vector<std::string> eval_systems;
    eval->add_flag("--train", eval_train, "Train in-run instead of loading models");
    eval->add_option("--systems", eval_systems, "Subset of systems (overrides config)")
        ->delimiter(',');

    auto* report = app.add_subcommand("report", "Re-render report.md and CSV from report.json");
    std::string report_in;
    report->add_option("--in", report_in, "Report JSON path (default <out>/report.json)");

    auto* mkv = app.add_subcommand("make-wordvecs",
                                   "Write deterministic word vectors for corpus tokens");
    std::string mkv_corpus, mkv_out;
    std::size_t mkv_dim = 16;
    mkv->add_option("--corpus", mkv_corpus, "Corpus path (overrides config)");
    mkv->add_option("--dim", mkv_dim, "Vector dimension");
    mkv->add_option("--vec-out", mkv_out, "Output path (default <out>/wordvecs_<dim>d.txt)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (seed_set) cfg.seed = seed_override;
        if (jobs_set) {
            if (jobs_override == 0) throw ConfigError("--jobs must be at least 1");
            cfg.jobs = jobs_override;
        }
        if (!out_override.empty()) cfg.out = out_override;

        if (ingest->parsed()) return cmd_ingest(cfg, ingest_input, ingest_output);
        if (train->parsed()) return cmd_train(cfg);
        if (rec->parsed()) {
            return cmd_recommend(cfg, rec_target,
                                 rec_k_set ? std::optional<std::size_t>(rec_k)
                                           : std::nullopt,
                                 rec_table);
        }
        if (eval->parsed()) {
            if (!eval_systems.empty()) {
                cfg.eval.systems.clear();
                for (const auto& name : eval_systems) {
                    auto id = system_from_name(name);
                    if (!id.has_value()) {
                        throw ConfigError("unknown system '" + name + "' in --systems");
                    }
                    cfg.eval.systems.push_back(*id);
                }
            }
            return cmd_evaluate(cfg, eval_train);
        }
        if (report->parsed()) return cmd_report(cfg, report_in);
        if (mkv->parsed()) return cmd_make_wordvecs(cfg, mkv_corpus, mkv_dim, mkv_out);
        throw ConfigError("no subcommand given");
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ResamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace wikiref::cli
