#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/textsim.hpp"

namespace wikiref {

// Similarities between one reference of a linked page and the target's
// mention of that page. All components stay inside [0,1].
struct Step2Features {
    double f1_ti = 0.0;   // tf-idf cosine of the two citation contexts
    double f1_vec = 0.0;  // embedding cosine of the two citation contexts
    double f2_ti = 0.0;   // tf-idf cosine of reference title vs mention context

    static constexpr std::size_t kCount = 3;

    std::array<double, kCount> values() const { return {f1_ti, f1_vec, f2_ti}; }
    static const std::array<const char*, kCount>& names();
};

// `ref` must be an element of source.references and target must contain a
// wikilink to source, else OwnershipError. Missing contexts or an empty
// title zero the affected features. Multiple mentions of the source in the
// target concatenate their sentences before vectorization.
Step2Features step2_features(const WikiPage& target, const WikiPage& source,
                             const Reference& ref, const IdfTable& idf,
                             const EmbeddingProvider& provider);

struct QueryItem {
    Step2Features features;
    bool in_gold = false;
};

struct PairwiseStats {
    std::size_t queries_used = 0;
    std::size_t queries_skipped = 0;  // lacked a positive or a negative
    std::size_t pairs = 0;
};

using PairDiff = std::array<double, Step2Features::kCount>;

// One positive-minus-negative difference per within-query combination.
// Pairs never cross queries; queries missing a class are skipped.
std::vector<PairDiff> build_pairwise_training(const std::vector<std::vector<QueryItem>>& queries,
                                              PairwiseStats* stats = nullptr);

struct RankerParams {
    double C = 1.0;
    std::size_t epochs = 200;
};

class RankerModel {
  public:
    RankerModel() = default;
    RankerModel(std::array<double, Step2Features::kCount> weights, RankerParams params,
                std::uint64_t seed);

    bool trained() const { return trained_; }
    const std::array<double, Step2Features::kCount>& weights() const { return weights_; }
    const RankerParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    std::string serialize() const;
    static RankerModel deserialize(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static RankerModel load(const std::filesystem::path& path);

  private:
    std::array<double, Step2Features::kCount> weights_{};
    RankerParams params_;
    std::uint64_t seed_ = 0;
    bool trained_ = false;
};

// Hinge loss over pair differences, epoch-wise subgradient descent with
// rate 1/(lambda*t), lambda = 1/(C*|pairs|), seed-fixed shuffling. Same
// pairs, params and seed give bit-identical weights.
RankerModel train_ranker(const std::vector<PairDiff>& pairs, const RankerParams& params,
                         std::uint64_t seed);

double score(const RankerModel& model, const Step2Features& f);

struct Recommendation {
    Reference reference;
    std::string source_wikilink;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based, consecutive
};

struct RecommendOptions {
    std::size_t k = 5;
    bool exclude_existing = true;  // drop refs already on the target
    bool per_link = false;         // top-k per link before the global merge
};

// Scores one reference of one candidate source page.
using ReferenceScorer = std::function<double(const WikiPage& source, const Reference& ref)>;

// Shared pooling engine: pools references of the given links, drops empty
// keys (and existing ones per options), deduplicates by norm_key keeping
// the highest score, orders by score descending with ties broken by link
// order then reference order, truncates to k.
std::vector<Recommendation> rank_references(const WikiPage& target,
                                            const std::vector<const WikiPage*>& links,
                                            const ReferenceScorer& scorer,
                                            const RecommendOptions& options);

std::vector<Recommendation> recommend(const WikiPage& target,
                                      const std::vector<const WikiPage*>& relevant_links,
                                      const RankerModel& model, const IdfTable& idf,
                                      const EmbeddingProvider& provider,
                                      const RecommendOptions& options);

}  // namespace wikiref
