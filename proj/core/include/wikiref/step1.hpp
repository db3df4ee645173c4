#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/textsim.hpp"

namespace wikiref {

// Similarities between a target page and one linked page. All components
// stay inside [0,1].
struct Step1Features {
    double tis = 0.0;   // summary tf-idf cosine
    double os = 0.0;    // outlink Jaccard
    double is = 0.0;    // inlink Jaccard
    double oss = 0.0;   // tf-idf cosine of common-outlink sentence collations
    double iss = 0.0;   // tf-idf cosine of common-inlink sentence collations
    double vs = 0.0;    // embedding cosine of summaries
    double osvs = 0.0;  // embedding cosine of common-outlink collations
    double isvs = 0.0;  // embedding cosine of common-inlink collations

    static constexpr std::size_t kCount = 8;

    std::array<double, kCount> values() const {
        return {tis, os, is, oss, iss, vs, osvs, isvs};
    }
    static const std::array<const char*, kCount>& names();
};

Step1Features step1_features(const WikiPage& target, const WikiPage& candidate,
                             const LinkGraph& graph, const IdfTable& idf,
                             const EmbeddingProvider& provider);

enum class Relevance : int { irrelevant = 0, relevant = 1 };

struct LabeledExample {
    std::string target_title;
    std::string wikilink_title;
    Step1Features features;
    Relevance label = Relevance::irrelevant;
};

struct LabelDiagnostics {
    std::size_t absent_links = 0;     // wikilinks whose page is outside the corpus
    std::size_t duplicate_links = 0;  // repeat mentions of an already-seen page
    std::size_t self_links = 0;
};

// One example per distinct in-corpus wikilink of the target, labeled
// relevant when the linked page shares at least one normalized reference
// title with the target's gold set.
std::vector<LabeledExample> label_examples(const WikiPage& target, const Corpus& corpus,
                                           const LinkGraph& graph, const IdfTable& idf,
                                           const EmbeddingProvider& provider,
                                           const std::set<std::string>& gold,
                                           LabelDiagnostics* diagnostics = nullptr);

struct EnnParams {
    std::size_t k_neighbors = 3;
    std::size_t max_rounds = 25;
};

struct EnnResult {
    std::vector<LabeledExample> kept;
    std::vector<std::size_t> removed_indices;  // ascending, into the input vector
    std::size_t rounds = 0;
};

// Repeated edited-nearest-neighbour undersampling. The class that is in
// the minority at call time is never touched; majority examples whose k
// nearest neighbours mostly disagree with their label are dropped, in
// batches, until a pass removes nothing or max_rounds is hit.
EnnResult enn_undersample(const std::vector<LabeledExample>& examples,
                          const EnnParams& params = {});

struct ChiSquareEntry {
    std::size_t feature_index = 0;
    std::string feature_name;
    double score = 0.0;
};

// Chi-square association of each feature with the label, over equal-width
// bins on [0,1]. Sorted by descending score; ties by feature index.
std::vector<ChiSquareEntry> chi_square_rank(const std::vector<LabeledExample>& examples,
                                            std::size_t bins = 10);

struct ForestParams {
    std::size_t tree_count = 100;
    std::size_t max_depth = 12;
    std::size_t min_leaf = 2;
    std::size_t features_per_split = 2;         // floor(sqrt(8))
    std::vector<std::size_t> feature_subset;    // empty means all 8
};

struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;
    std::int32_t feature = kLeaf;  // kLeaf marks a leaf node
    double threshold = 0.0;        // value <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double p_irrelevant = 0.0;
    double p_relevant = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // preorder, root at index 0
    double leaf_probability(const std::array<double, Step1Features::kCount>& x) const;
};

class ForestModel {
  public:
    ForestModel() = default;
    ForestModel(std::vector<DecisionTree> trees, ForestParams params, std::uint64_t seed);

    bool trained() const { return !trees_.empty(); }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    // Mean over trees of the leaf probability for the relevant class.
    double score(const Step1Features& f) const;

    std::string serialize() const;
    static ForestModel deserialize(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static ForestModel load(const std::filesystem::path& path);

  private:
    std::vector<DecisionTree> trees_;
    ForestParams params_;
    std::uint64_t seed_ = 0;
};

ForestModel train_forest(const std::vector<LabeledExample>& examples,
                         const ForestParams& params, std::uint64_t seed);

struct Classification {
    Relevance label = Relevance::irrelevant;
    double score = 0.0;
};

// Label is relevant when score >= 0.5; the exact tie goes to relevant.
Classification classify(const ForestModel& model, const Step1Features& f);

// Header: target,wikilink,tis,os,is,oss,iss,vs,osvs,isvs,label
std::string feature_csv(const std::vector<LabeledExample>& examples);

}  // namespace wikiref
