#include "wikiref/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/util.hpp"

namespace wikiref {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f_measure_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

std::set<std::string> gold_references(const WikiPage& target) {
    std::set<std::string> gold;
    for (const auto& ref : target.references) {
        if (!ref.norm_key.empty()) gold.insert(ref.norm_key);
    }
    return gold;
}

std::vector<const WikiPage*> candidate_links(const WikiPage& target, const Corpus& corpus) {
    std::vector<const WikiPage*> links;
    std::set<std::string> seen;
    for (const auto& link : target.wikilinks) {
        if (link.target_title == target.title) continue;
        if (!seen.insert(link.target_title).second) continue;
        if (const WikiPage* page = corpus.find(link.target_title)) links.push_back(page);
    }
    return links;
}

std::vector<std::string> default_eval_targets(const Corpus& corpus, const LinkGraph& graph) {
    (void)graph;
    std::vector<std::string> targets;
    for (const auto& page : corpus.pages()) {
        if (gold_references(page).empty()) continue;
        if (candidate_links(page, corpus).empty()) continue;
        targets.push_back(page.title);
    }
    return targets;
}

SplitResult split_corpus(const std::vector<std::string>& targets, double ratio,
                         std::uint64_t seed) {
    if (targets.size() < 2) {
        throw ConfigError("corpus split needs at least 2 targets");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("split ratio must lie strictly between 0 and 1");
    }
    std::vector<std::string> shuffled = targets;
    Rng rng(seed);
    rng.shuffle(shuffled);
    // ceil(ratio*N), guarded against 0.7*10 landing a hair above 7.0.
    double scaled = ratio * static_cast<double>(shuffled.size());
    auto train_count = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
    SplitResult result;
    result.train.assign(shuffled.begin(), shuffled.begin() + train_count);
    result.test.assign(shuffled.begin() + train_count, shuffled.end());
    return result;
}

MetricsAtK precision_recall_f_at_k(const std::vector<std::string>& ranked_keys,
                                   const std::set<std::string>& gold, std::size_t k) {
    if (k == 0) throw ConfigError("metrics cutoff k must be positive");
    std::size_t cut = std::min(k, ranked_keys.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cut; ++i) {
        if (gold.count(ranked_keys[i]) > 0) ++hits;
    }
    MetricsAtK m;
    m.k = k;
    m.precision = safe_div(static_cast<double>(hits), static_cast<double>(cut));
    m.recall = safe_div(static_cast<double>(hits), static_cast<double>(gold.size()));
    m.f_measure = f_measure_of(m.precision, m.recall);
    return m;
}

std::string_view system_name(SystemId id) {
    switch (id) {
        case SystemId::BL1: return "BL-I";
        case SystemId::BL2: return "BL-II";
        case SystemId::BL3: return "BL-III";
        case SystemId::BL4: return "BL-IV";
        case SystemId::BL5: return "BL-V";
        case SystemId::WikiRef: return "WikiRef";
    }
    throw ConfigError("unknown system id");
}

std::optional<SystemId> system_from_name(std::string_view name) {
    for (SystemId id : all_systems()) {
        if (system_name(id) == name) return id;
    }
    return std::nullopt;
}

const std::vector<SystemId>& all_systems() {
    static const std::vector<SystemId> kAll = {SystemId::BL1, SystemId::BL2, SystemId::BL3,
                                               SystemId::BL4, SystemId::BL5,
                                               SystemId::WikiRef};
    return kAll;
}

void EvalConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw ConfigError("eval.split_ratio must lie strictly between 0 and 1");
    }
    if (ks.empty()) throw ConfigError("eval.ks must not be empty");
    std::size_t prev = 0;
    for (std::size_t k : ks) {
        if (k <= prev) throw ConfigError("eval.ks must be strictly increasing positive integers");
        prev = k;
    }
    if (systems.empty()) throw ConfigError("eval.systems must not be empty");
}

PipelineContext build_context(const Corpus& corpus, const EmbeddingProvider& provider,
                              std::size_t jobs) {
    if (corpus.empty()) throw ConfigError("cannot build a pipeline over an empty corpus");
    PipelineContext ctx;
    ctx.corpus = &corpus;
    ctx.provider = &provider;
    ctx.graph = build_link_graph(corpus);
    std::vector<std::vector<std::string>> documents(corpus.size());
    parallel_for(jobs, corpus.size(), [&](std::size_t i) {
        const WikiPage& page = corpus.pages()[i];
        std::string doc;
        for (const auto& s : page.sentences) {
            doc += s;
            doc.push_back(' ');
        }
        for (const auto& ref : page.references) {
            doc += ref.title;
            doc.push_back(' ');
        }
        documents[i] = tokenize(doc);
    });
    ctx.idf = fit_idf(documents);
    return ctx;
}

TrainingOutcome train_pipeline(const PipelineContext& ctx,
                               const std::vector<std::string>& train_targets,
                               const StepOneTrainParams& step1_params,
                               const RankerParams& ranker_params, std::uint64_t seed) {
    if (train_targets.empty()) throw ConfigError("training needs at least one target");

    TrainingOutcome outcome;
    std::vector<LabeledExample> examples;
    std::vector<std::vector<QueryItem>> queries;
    for (const auto& title : train_targets) {
        const WikiPage& target = ctx.corpus->at(title);
        auto gold = gold_references(target);
        auto labeled = label_examples(target, *ctx.corpus, ctx.graph, ctx.idf,
                                      *ctx.provider, gold, &outcome.label_diagnostics);

        std::vector<QueryItem> query;
        for (const auto& ex : labeled) {
            if (ex.label != Relevance::relevant) continue;
            const WikiPage& source = ctx.corpus->at(ex.wikilink_title);
            for (const auto& ref : source.references) {
                if (ref.norm_key.empty()) continue;
                QueryItem item;
                item.features = step2_features(target, source, ref, ctx.idf, *ctx.provider);
                item.in_gold = gold.count(ref.norm_key) > 0;
                query.push_back(item);
            }
        }
        if (!query.empty()) queries.push_back(std::move(query));

        examples.insert(examples.end(), labeled.begin(), labeled.end());
    }
    outcome.examples = examples.size();
    outcome.labeled = examples;

    EnnResult edited = enn_undersample(examples, step1_params.enn);
    outcome.examples_removed = edited.removed_indices.size();
    outcome.enn_rounds = edited.rounds;

    outcome.chi_order = chi_square_rank(edited.kept, step1_params.chi_bins);

    outcome.models.forest =
        train_forest(edited.kept, step1_params.forest, stage_seed(seed, "forest"));

    auto pairs = build_pairwise_training(queries, &outcome.pairwise);
    outcome.models.ranker = train_ranker(pairs, ranker_params, stage_seed(seed, "ranker"));
    return outcome;
}

namespace {

std::vector<const WikiPage*> classified_links(const WikiPage& target,
                                              const PipelineContext& ctx,
                                              const ForestModel& forest) {
    std::vector<const WikiPage*> relevant;
    for (const WikiPage* page : candidate_links(target, *ctx.corpus)) {
        auto features = step1_features(target, *page, ctx.graph, ctx.idf, *ctx.provider);
        if (classify(forest, features).label == Relevance::relevant) {
            relevant.push_back(page);
        }
    }
    return relevant;
}

}  // namespace

std::vector<Recommendation> run_system(SystemId id, const WikiPage& target,
                                       const PipelineContext& ctx,
                                       const TrainedModels& models,
                                       const RecommendOptions& options,
                                       std::vector<const WikiPage*>* links_out) {
    bool needs_classifier = id != SystemId::BL1 && id != SystemId::BL2;
    if (needs_classifier && !models.forest.trained()) {
        throw ConfigError(std::string(system_name(id)) + " needs a trained classifier");
    }
    std::vector<const WikiPage*> links = needs_classifier
                                             ? classified_links(target, ctx, models.forest)
                                             : candidate_links(target, *ctx.corpus);
    if (links_out) *links_out = links;

    if (id == SystemId::WikiRef) {
        if (!models.ranker.trained()) throw ConfigError("WikiRef needs a trained ranker");
        return recommend(target, links, models.ranker, ctx.idf, *ctx.provider, options);
    }
    ReferenceScorer scorer = [&](const WikiPage& source, const Reference& ref) {
        Step2Features f = step2_features(target, source, ref, ctx.idf, *ctx.provider);
        switch (id) {
            case SystemId::BL1:
            case SystemId::BL3: return f.f1_ti;
            case SystemId::BL2:
            case SystemId::BL4: return f.f2_ti;
            case SystemId::BL5: return f.f1_vec;
            default: throw ConfigError("unknown baseline id");
        }
    };
    return rank_references(target, links, scorer, options);
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("fractional ranking needs at least one item");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] > values[b];
    });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // Positions are 1-based; a tie block spanning positions i+1..j
        // shares their mean.
        double mean = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t p = i; p < j; ++p) ranks[order[p]] = mean;
        i = j;
    }
    return ranks;
}

double spearman_rho(const std::vector<double>& ranks_a, const std::vector<double>& ranks_b) {
    if (ranks_a.size() != ranks_b.size()) {
        throw ShapeError("rank vectors differ in length");
    }
    if (ranks_a.size() < 2) throw ShapeError("rank correlation needs at least 2 items");
    double n = static_cast<double>(ranks_a.size());
    double mean_a = std::accumulate(ranks_a.begin(), ranks_a.end(), 0.0) / n;
    double mean_b = std::accumulate(ranks_b.begin(), ranks_b.end(), 0.0) / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < ranks_a.size(); ++i) {
        double da = ranks_a[i] - mean_a;
        double db = ranks_b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

VotesTable parse_votes(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("votes file: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("votes file: top level must be an object");
    VotesTable votes;
    for (const auto& [target, entries] : j.items()) {
        if (!entries.is_array() || entries.size() < 2) {
            throw SchemaError("votes file: target '" + target +
                              "' needs an array of at least 2 entries");
        }
        std::vector<VoteEntry> list;
        for (const auto& e : entries) {
            if (!e.is_object() || !e.contains("ref_key") || !e.contains("votes") ||
                !e["ref_key"].is_string() || !e["votes"].is_number()) {
                throw SchemaError("votes file: target '" + target +
                                  "' has a malformed entry; need {ref_key, votes}");
            }
            VoteEntry entry;
            entry.ref_key = e["ref_key"].get<std::string>();
            entry.votes = e["votes"].get<double>();
            if (entry.ref_key.empty()) {
                throw SchemaError("votes file: target '" + target + "' has an empty ref_key");
            }
            if (entry.votes < 0.0) {
                throw SchemaError("votes file: target '" + target + "' has negative votes");
            }
            list.push_back(std::move(entry));
        }
        votes[target] = std::move(list);
    }
    return votes;
}

namespace {

struct KAccumulator {
    double precision = 0.0;
    double recall = 0.0;
    double recall_reachable = 0.0;
    std::size_t count = 0;

    KRow average(std::size_t k) const {
        KRow row;
        row.k = k;
        if (count > 0) {
            double n = static_cast<double>(count);
            row.precision = precision / n;
            row.recall = recall / n;
            row.recall_reachable = recall_reachable / n;
            row.f_measure = f_measure_of(row.precision, row.recall);
        }
        return row;
    }
};

}  // namespace

EvalOutcome evaluation_report(const PipelineContext& ctx, const EvalConfig& config,
                              const TrainedModels& models,
                              const std::vector<ChiSquareEntry>& chi_order,
                              const VotesTable* votes) {
    config.validate();
    if (!models.forest.trained()) throw ConfigError("evaluation needs a trained classifier");
    if (!models.ranker.trained()) throw ConfigError("evaluation needs a trained ranker");

    std::vector<std::string> targets = config.targets;
    if (targets.empty()) {
        targets = default_eval_targets(*ctx.corpus, ctx.graph);
    } else {
        for (const auto& t : targets) ctx.corpus->at(t);  // throws LookupError
    }
    SplitResult split =
        split_corpus(targets, config.split_ratio, stage_seed(config.seed, "split"));
    if (split.test.empty()) {
        throw ConfigError("evaluation test split is empty; lower eval.split_ratio");
    }

    EvalOutcome outcome;
    outcome.train_targets = split.train;
    outcome.test_targets = split.test;
    outcome.chi_order = chi_order;

    // Step-I confusion over every test wikilink, pooled counts.
    StepOneEval& s1 = outcome.step1;
    for (const auto& title : split.test) {
        const WikiPage& target = ctx.corpus->at(title);
        auto gold = gold_references(target);
        for (const auto& ex :
             label_examples(target, *ctx.corpus, ctx.graph, ctx.idf, *ctx.provider, gold)) {
            bool truth = ex.label == Relevance::relevant;
            bool predicted = classify(models.forest, ex.features).label == Relevance::relevant;
            ++s1.examples;
            if (truth && predicted) ++s1.tp;
            else if (!truth && predicted) ++s1.fp;
            else if (truth && !predicted) ++s1.fn;
            else ++s1.tn;
        }
    }
    s1.precision = safe_div(s1.tp, static_cast<double>(s1.tp + s1.fp));
    s1.recall = safe_div(s1.tp, static_cast<double>(s1.tp + s1.fn));
    s1.f_measure = f_measure_of(s1.precision, s1.recall);
    s1.precision_irrelevant = safe_div(s1.tn, static_cast<double>(s1.tn + s1.fn));
    s1.recall_irrelevant = safe_div(s1.tn, static_cast<double>(s1.tn + s1.fp));
    s1.f_irrelevant = f_measure_of(s1.precision_irrelevant, s1.recall_irrelevant);

    const std::size_t max_k = config.ks.back();
    RecommendOptions options;
    options.k = max_k;
    options.exclude_existing = false;  // gold is the page's own reference list

    for (SystemId id : all_systems()) {
        if (std::find(config.systems.begin(), config.systems.end(), id) ==
            config.systems.end()) {
            continue;
        }
        SystemEval sys_eval;
        sys_eval.id = id;
        std::vector<KAccumulator> acc_all(config.ks.size());
        std::vector<KAccumulator> acc_sub(config.ks.size());

        for (const auto& title : split.test) {
            const WikiPage& target = ctx.corpus->at(title);
            auto gold = gold_references(target);

            std::vector<const WikiPage*> links;
            auto recs = run_system(id, target, ctx, models, options, &links);
            std::vector<std::string> keys;
            keys.reserve(recs.size());
            for (const auto& rec : recs) keys.push_back(rec.reference.norm_key);

            std::set<std::string> reachable;
            for (const WikiPage* page : links) {
                for (const auto& ref : page->references) {
                    if (!ref.norm_key.empty() && gold.count(ref.norm_key) > 0) {
                        reachable.insert(ref.norm_key);
                    }
                }
            }

            for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
                MetricsAtK m = precision_recall_f_at_k(keys, gold, config.ks[ki]);
                double rr = 0.0;
                if (!reachable.empty()) {
                    rr = precision_recall_f_at_k(keys, reachable, config.ks[ki]).recall;
                }
                acc_all[ki].precision += m.precision;
                acc_all[ki].recall += m.recall;
                acc_all[ki].recall_reachable += rr;
                ++acc_all[ki].count;
                if (!links.empty()) {
                    acc_sub[ki].precision += m.precision;
                    acc_sub[ki].recall += m.recall;
                    acc_sub[ki].recall_reachable += rr;
                    ++acc_sub[ki].count;
                }
                outcome.per_target.push_back({std::string(system_name(id)), target.title,
                                              config.ks[ki], m.precision, m.recall,
                                              m.f_measure});
            }
        }
        sys_eval.targets_with_candidates = acc_sub.empty() ? 0 : acc_sub[0].count;
        for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
            sys_eval.at_k.push_back(acc_all[ki].average(config.ks[ki]));
            sys_eval.at_k_with_candidates.push_back(acc_sub[ki].average(config.ks[ki]));
        }
        outcome.systems.push_back(std::move(sys_eval));
    }

    if (votes != nullptr && !votes->empty()) {
        SpearmanEval sp;
        RecommendOptions full_pool;
        full_pool.k = std::numeric_limits<std::size_t>::max();
        full_pool.exclude_existing = false;
        std::map<std::string, double> sums;
        for (const auto& [title, entries] : *votes) {
            const WikiPage& target = ctx.corpus->at(title);
            std::vector<double> vote_values;
            vote_values.reserve(entries.size());
            for (const auto& e : entries) vote_values.push_back(e.votes);
            std::vector<double> human = fractional_ranks(vote_values);

            for (SystemId id : config.systems) {
                auto recs = run_system(id, target, ctx, models, full_pool);
                std::map<std::string, std::size_t> position;
                for (const auto& rec : recs) position[rec.reference.norm_key] = rec.rank;
                // Items the system never surfaced all tie below the last
                // surfaced one.
                std::vector<double> sys_scores;
                sys_scores.reserve(entries.size());
                for (const auto& e : entries) {
                    auto it = position.find(e.ref_key);
                    std::size_t pos = it == position.end() ? recs.size() + 1 : it->second;
                    sys_scores.push_back(-static_cast<double>(pos));
                }
                sums[std::string(system_name(id))] +=
                    spearman_rho(human, fractional_ranks(sys_scores));
            }
            ++sp.targets;
        }
        for (auto& [name, sum] : sums) {
            sp.per_system[name] = sum / static_cast<double>(sp.targets);
        }
        outcome.spearman = std::move(sp);
    }
    return outcome;
}

}  // namespace wikiref
