#include "wikiref/step2.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/util.hpp"
#include "wikiref/version.hpp"

namespace wikiref {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kRankerFormat = "wikiref.ranker.v1";

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// All sentences of `page` mentioning `title` via a wikilink, deduplicated
// and concatenated in page order. Empty when no mention carries a sentence.
std::string mention_context(const WikiPage& page, std::string_view title, bool* found) {
    std::set<std::size_t> indices;
    *found = false;
    for (const auto& link : page.wikilinks) {
        if (link.target_title != title) continue;
        *found = true;
        if (link.sentence_index.has_value()) indices.insert(*link.sentence_index);
    }
    std::string out;
    for (std::size_t i : indices) {
        if (!out.empty()) out.push_back(' ');
        out += page.sentences[i];
    }
    return out;
}

}  // namespace

const std::array<const char*, Step2Features::kCount>& Step2Features::names() {
    static const std::array<const char*, kCount> kNames = {"f1_ti", "f1_vec", "f2_ti"};
    return kNames;
}

Step2Features step2_features(const WikiPage& target, const WikiPage& source,
                             const Reference& ref, const IdfTable& idf,
                             const EmbeddingProvider& provider) {
    bool mentioned = false;
    std::string mention = mention_context(target, source.title, &mentioned);
    if (!mentioned) {
        throw OwnershipError("page '" + target.title + "' has no wikilink to '" +
                             source.title + "'");
    }
    // citation_context also enforces that ref is owned by source.
    std::string_view ref_context = citation_context(source, ref);

    auto mention_tokens = tokenize(mention);
    auto mention_tfidf = tfidf_vector(mention_tokens, idf);

    Step2Features f;
    f.f1_ti = clamp01(cosine(tfidf_vector(tokenize(ref_context), idf), mention_tfidf));
    f.f1_vec = clamp01(cosine(embed_text(ref_context, provider),
                              embed_tokens(mention_tokens, provider)));
    f.f2_ti = clamp01(cosine(tfidf_vector(tokenize(ref.title), idf), mention_tfidf));
    return f;
}

std::vector<PairDiff> build_pairwise_training(const std::vector<std::vector<QueryItem>>& queries,
                                              PairwiseStats* stats) {
    PairwiseStats local;
    PairwiseStats& s = stats ? *stats : local;
    std::vector<PairDiff> pairs;
    for (const auto& query : queries) {
        std::vector<const QueryItem*> pos, neg;
        for (const auto& item : query) {
            (item.in_gold ? pos : neg).push_back(&item);
        }
        if (pos.empty() || neg.empty()) {
            ++s.queries_skipped;
            continue;
        }
        ++s.queries_used;
        for (const QueryItem* p : pos) {
            for (const QueryItem* n : neg) {
                auto pv = p->features.values();
                auto nv = n->features.values();
                PairDiff d;
                for (std::size_t j = 0; j < d.size(); ++j) d[j] = pv[j] - nv[j];
                pairs.push_back(d);
            }
        }
    }
    s.pairs = pairs.size();
    return pairs;
}

RankerModel::RankerModel(std::array<double, Step2Features::kCount> weights,
                         RankerParams params, std::uint64_t seed)
    : weights_(weights), params_(params), seed_(seed), trained_(true) {}

RankerModel train_ranker(const std::vector<PairDiff>& pairs, const RankerParams& params,
                         std::uint64_t seed) {
    if (pairs.empty()) throw TrainingError("ranker training needs preference pairs");
    if (!(params.C > 0.0)) throw ConfigError("ranker C must be positive");
    if (params.epochs == 0) throw ConfigError("ranker needs at least one epoch");

    const double lambda = 1.0 / (params.C * static_cast<double>(pairs.size()));
    std::array<double, Step2Features::kCount> w{};
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng rng(seed);
    std::size_t t = 1;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const PairDiff& d = pairs[idx];
            double eta = 1.0 / (lambda * static_cast<double>(t));
            double margin = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * d[j];
            double shrink = 1.0 - eta * lambda;
            for (std::size_t j = 0; j < w.size(); ++j) {
                w[j] *= shrink;
                if (margin < 1.0) w[j] += eta * d[j];
            }
            ++t;
        }
    }
    for (double v : w) {
        if (!std::isfinite(v)) throw TrainingError("ranker weights diverged");
    }
    return RankerModel(w, params, seed);
}

double score(const RankerModel& model, const Step2Features& f) {
    if (!model.trained()) throw ConfigError("ranker model is not trained");
    auto x = f.values();
    const auto& w = model.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return s;
}

namespace {

struct Candidate {
    double score;
    std::size_t link_order;
    std::size_t ref_order;
    const WikiPage* source;
    const Reference* ref;
};

// Sort by score descending, then document order. Walking this order and
// keeping the first sighting of each norm_key realizes max-score dedup
// with deterministic tie-breaks in one pass.
bool candidate_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.link_order != b.link_order) return a.link_order < b.link_order;
    return a.ref_order < b.ref_order;
}

std::vector<Candidate> dedup_sorted(std::vector<Candidate> candidates) {
    std::sort(candidates.begin(), candidates.end(), candidate_before);
    std::set<std::string> seen;
    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        if (seen.insert(c.ref->norm_key).second) kept.push_back(c);
    }
    return kept;
}

}  // namespace

std::vector<Recommendation> rank_references(const WikiPage& target,
                                            const std::vector<const WikiPage*>& links,
                                            const ReferenceScorer& scorer,
                                            const RecommendOptions& options) {
    if (options.k == 0) throw ConfigError("recommendation cutoff k must be positive");

    std::set<std::string> existing;
    if (options.exclude_existing) {
        for (const auto& ref : target.references) {
            if (!ref.norm_key.empty()) existing.insert(ref.norm_key);
        }
    }

    std::vector<std::vector<Candidate>> per_link(links.size());
    for (std::size_t li = 0; li < links.size(); ++li) {
        const WikiPage& source = *links[li];
        for (std::size_t ri = 0; ri < source.references.size(); ++ri) {
            const Reference& ref = source.references[ri];
            if (ref.norm_key.empty()) continue;
            if (existing.count(ref.norm_key) > 0) continue;
            per_link[li].push_back({scorer(source, ref), li, ri, &source, &ref});
        }
    }

    std::vector<Candidate> pool;
    if (options.per_link) {
        // Keep each link's top k, then merge; the merged list is not
        // re-truncated, so it can exceed k.
        for (auto& candidates : per_link) {
            std::sort(candidates.begin(), candidates.end(), candidate_before);
            if (candidates.size() > options.k) candidates.resize(options.k);
            pool.insert(pool.end(), candidates.begin(), candidates.end());
        }
    } else {
        for (auto& candidates : per_link) {
            pool.insert(pool.end(), candidates.begin(), candidates.end());
        }
    }

    std::vector<Candidate> kept = dedup_sorted(std::move(pool));
    if (!options.per_link && kept.size() > options.k) kept.resize(options.k);

    std::vector<Recommendation> recommendations;
    recommendations.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        Recommendation rec;
        rec.reference = *kept[i].ref;
        rec.source_wikilink = kept[i].source->title;
        rec.score = kept[i].score;
        rec.rank = i + 1;
        recommendations.push_back(std::move(rec));
    }
    return recommendations;
}

std::vector<Recommendation> recommend(const WikiPage& target,
                                      const std::vector<const WikiPage*>& relevant_links,
                                      const RankerModel& model, const IdfTable& idf,
                                      const EmbeddingProvider& provider,
                                      const RecommendOptions& options) {
    ReferenceScorer scorer = [&](const WikiPage& source, const Reference& ref) {
        return score(model, step2_features(target, source, ref, idf, provider));
    };
    return rank_references(target, relevant_links, scorer, options);
}

std::string RankerModel::serialize() const {
    ordered_json j;
    j["format"] = kRankerFormat;
    j["artifact_version"] = kArtifactVersion;
    j["seed"] = seed_;
    ordered_json p;
    p["C"] = params_.C;
    p["epochs"] = params_.epochs;
    j["params"] = p;
    j["weights"] = weights_;
    return j.dump();
}

RankerModel RankerModel::deserialize(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("ranker model: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kRankerFormat) {
            throw SchemaError("ranker model: unrecognized format tag");
        }
        RankerParams params;
        params.C = j.at("params").at("C").get<double>();
        params.epochs = j.at("params").at("epochs").get<std::size_t>();
        auto weights = j.at("weights").get<std::vector<double>>();
        if (weights.size() != Step2Features::kCount) {
            throw SchemaError("ranker model: expected 3 weights");
        }
        std::array<double, Step2Features::kCount> w{};
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(weights[i])) {
                throw SchemaError("ranker model: non-finite weight");
            }
            w[i] = weights[i];
        }
        return RankerModel(w, params, j.at("seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("ranker model: ") + e.what());
    }
}

void RankerModel::save(const std::filesystem::path& path) const {
    write_file(path.string(), serialize() + "\n");
}

RankerModel RankerModel::load(const std::filesystem::path& path) {
    return deserialize(read_file(path.string()));
}

}  // namespace wikiref
