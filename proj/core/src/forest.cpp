#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/step1.hpp"
#include "wikiref/util.hpp"
#include "wikiref/version.hpp"

namespace wikiref {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kForestFormat = "wikiref.forest.v1";

using FeatureRow = std::array<double, Step1Features::kCount>;

struct TreeBuilder {
    const std::vector<FeatureRow>& rows;
    const std::vector<int>& labels;
    const ForestParams& params;
    const std::vector<std::size_t>& allowed_features;
    Rng& rng;
    std::vector<TreeNode> nodes;

    double gini(std::size_t pos, std::size_t total) const {
        double p1 = static_cast<double>(pos) / static_cast<double>(total);
        double p0 = 1.0 - p1;
        return 1.0 - p0 * p0 - p1 * p1;
    }

    std::int32_t make_leaf(const std::vector<std::size_t>& sample) {
        std::size_t pos = 0;
        for (std::size_t i : sample) pos += static_cast<std::size_t>(labels[i]);
        TreeNode node;
        node.p_relevant = static_cast<double>(pos) / static_cast<double>(sample.size());
        node.p_irrelevant = 1.0 - node.p_relevant;
        nodes.push_back(node);
        return static_cast<std::int32_t>(nodes.size() - 1);
    }

    // Fisher-Yates prefix over a copy of the allowed features.
    std::vector<std::size_t> sample_features() {
        std::vector<std::size_t> pool = allowed_features;
        std::size_t m = std::min(params.features_per_split, pool.size());
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t pick = j + rng.next_index(pool.size() - j);
            std::swap(pool[j], pool[pick]);
        }
        pool.resize(m);
        return pool;
    }

    std::int32_t build(std::vector<std::size_t> sample, std::size_t depth) {
        std::size_t pos = 0;
        for (std::size_t i : sample) pos += static_cast<std::size_t>(labels[i]);
        bool pure = pos == 0 || pos == sample.size();
        if (pure || depth >= params.max_depth || sample.size() < 2 * params.min_leaf) {
            return make_leaf(sample);
        }

        // Best split over mtry features; midpoint thresholds between
        // consecutive distinct values; strict improvement keeps the first
        // candidate on ties, so the scan order is part of the contract.
        bool found = false;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        double best_impurity = 0.0;
        for (std::size_t f : sample_features()) {
            std::vector<double> values;
            values.reserve(sample.size());
            for (std::size_t i : sample) values.push_back(rows[i][f]);
            std::sort(values.begin(), values.end());
            for (std::size_t v = 1; v < values.size(); ++v) {
                if (values[v] == values[v - 1]) continue;
                double threshold = values[v - 1] + (values[v] - values[v - 1]) / 2.0;
                std::size_t nl = 0, pl = 0;
                for (std::size_t i : sample) {
                    if (rows[i][f] <= threshold) {
                        ++nl;
                        pl += static_cast<std::size_t>(labels[i]);
                    }
                }
                std::size_t nr = sample.size() - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                std::size_t pr = pos - pl;
                double impurity =
                    (static_cast<double>(nl) * gini(pl, nl) +
                     static_cast<double>(nr) * gini(pr, nr)) /
                    static_cast<double>(sample.size());
                if (!found || impurity < best_impurity) {
                    found = true;
                    best_feature = f;
                    best_threshold = threshold;
                    best_impurity = impurity;
                }
            }
        }
        if (!found) return make_leaf(sample);

        std::vector<std::size_t> left, right;
        for (std::size_t i : sample) {
            (rows[i][best_feature] <= best_threshold ? left : right).push_back(i);
        }
        std::int32_t node_index = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        nodes[node_index].feature = static_cast<std::int32_t>(best_feature);
        nodes[node_index].threshold = best_threshold;
        std::int32_t l = build(std::move(left), depth + 1);
        std::int32_t r = build(std::move(right), depth + 1);
        nodes[node_index].left = l;
        nodes[node_index].right = r;
        return node_index;
    }
};

void validate_tree(const DecisionTree& tree) {
    if (tree.nodes.empty()) throw SchemaError("forest model: empty tree");
    for (const auto& node : tree.nodes) {
        if (node.feature == TreeNode::kLeaf) {
            if (std::abs(node.p_irrelevant + node.p_relevant - 1.0) > 1e-12) {
                throw SchemaError("forest model: leaf probabilities do not sum to 1");
            }
            continue;
        }
        if (node.feature < 0 ||
            node.feature >= static_cast<std::int32_t>(Step1Features::kCount)) {
            throw SchemaError("forest model: split feature index out of range");
        }
        auto in_range = [&](std::int32_t c) {
            return c >= 0 && c < static_cast<std::int32_t>(tree.nodes.size());
        };
        if (!in_range(node.left) || !in_range(node.right)) {
            throw SchemaError("forest model: dangling child index");
        }
    }
}

}  // namespace

double DecisionTree::leaf_probability(const FeatureRow& x) const {
    std::size_t i = 0;
    while (nodes[i].feature != TreeNode::kLeaf) {
        const TreeNode& node = nodes[i];
        i = static_cast<std::size_t>(
            x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                        : node.right);
    }
    return nodes[i].p_relevant;
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestParams params,
                         std::uint64_t seed)
    : trees_(std::move(trees)), params_(std::move(params)), seed_(seed) {}

double ForestModel::score(const Step1Features& f) const {
    if (!trained()) throw ConfigError("forest model is not trained");
    FeatureRow x = f.values();
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.leaf_probability(x);
    return sum / static_cast<double>(trees_.size());
}

ForestModel train_forest(const std::vector<LabeledExample>& examples,
                         const ForestParams& params, std::uint64_t seed) {
    if (examples.empty()) throw TrainingError("forest training needs examples");
    std::vector<FeatureRow> rows(examples.size());
    std::vector<int> labels(examples.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        rows[i] = examples[i].features.values();
        labels[i] = static_cast<int>(examples[i].label);
        pos += static_cast<std::size_t>(labels[i]);
    }
    if (pos == 0 || pos == examples.size()) {
        throw TrainingError("forest training needs both classes present");
    }
    if (params.tree_count == 0) throw ConfigError("forest needs at least one tree");
    if (params.min_leaf == 0) throw ConfigError("forest min_leaf must be positive");

    std::vector<std::size_t> allowed = params.feature_subset;
    if (allowed.empty()) {
        allowed.resize(Step1Features::kCount);
        for (std::size_t i = 0; i < allowed.size(); ++i) allowed[i] = i;
    }
    std::sort(allowed.begin(), allowed.end());
    allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
    for (std::size_t f : allowed) {
        if (f >= Step1Features::kCount) {
            throw ConfigError("feature subset index out of range: " + std::to_string(f));
        }
    }

    std::vector<DecisionTree> trees(params.tree_count);
    for (std::size_t t = 0; t < params.tree_count; ++t) {
        Rng rng(stage_seed(seed, "tree/" + std::to_string(t)));
        std::vector<std::size_t> sample(examples.size());
        for (auto& s : sample) s = rng.next_index(examples.size());
        TreeBuilder builder{rows, labels, params, allowed, rng, {}};
        builder.build(std::move(sample), 0);
        trees[t].nodes = std::move(builder.nodes);
    }
    return ForestModel(std::move(trees), params, seed);
}

Classification classify(const ForestModel& model, const Step1Features& f) {
    double score = model.score(f);
    return {score >= 0.5 ? Relevance::relevant : Relevance::irrelevant, score};
}

std::string ForestModel::serialize() const {
    ordered_json j;
    j["format"] = kForestFormat;
    j["artifact_version"] = kArtifactVersion;
    j["seed"] = seed_;
    ordered_json p;
    p["tree_count"] = params_.tree_count;
    p["max_depth"] = params_.max_depth;
    p["min_leaf"] = params_.min_leaf;
    p["features_per_split"] = params_.features_per_split;
    p["feature_subset"] = params_.feature_subset;
    j["params"] = p;
    ordered_json trees = ordered_json::array();
    for (const auto& tree : trees_) {
        ordered_json nodes = ordered_json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back({node.feature, node.threshold, node.left, node.right,
                             node.p_irrelevant, node.p_relevant});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

ForestModel ForestModel::deserialize(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("forest model: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kForestFormat) {
            throw SchemaError("forest model: unrecognized format tag");
        }
        ForestParams params;
        const auto& p = j.at("params");
        params.tree_count = p.at("tree_count").get<std::size_t>();
        params.max_depth = p.at("max_depth").get<std::size_t>();
        params.min_leaf = p.at("min_leaf").get<std::size_t>();
        params.features_per_split = p.at("features_per_split").get<std::size_t>();
        params.feature_subset = p.at("feature_subset").get<std::vector<std::size_t>>();
        std::vector<DecisionTree> trees;
        for (const auto& tj : j.at("trees")) {
            DecisionTree tree;
            for (const auto& nj : tj) {
                if (!nj.is_array() || nj.size() != 6) {
                    throw SchemaError("forest model: malformed node record");
                }
                TreeNode node;
                node.feature = nj[0].get<std::int32_t>();
                node.threshold = nj[1].get<double>();
                node.left = nj[2].get<std::int32_t>();
                node.right = nj[3].get<std::int32_t>();
                node.p_irrelevant = nj[4].get<double>();
                node.p_relevant = nj[5].get<double>();
                tree.nodes.push_back(node);
            }
            validate_tree(tree);
            trees.push_back(std::move(tree));
        }
        if (trees.empty()) throw SchemaError("forest model: no trees");
        return ForestModel(std::move(trees), std::move(params),
                           j.at("seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("forest model: ") + e.what());
    }
}

void ForestModel::save(const std::filesystem::path& path) const {
    write_file(path.string(), serialize() + "\n");
}

ForestModel ForestModel::load(const std::filesystem::path& path) {
    return deserialize(read_file(path.string()));
}

std::string feature_csv(const std::vector<LabeledExample>& examples) {
    std::string out = "target,wikilink,tis,os,is,oss,iss,vs,osvs,isvs,label\n";
    for (const auto& ex : examples) {
        out += csv_escape(ex.target_title);
        out.push_back(',');
        out += csv_escape(ex.wikilink_title);
        for (double v : ex.features.values()) {
            out.push_back(',');
            out += format_double(v);
        }
        out.push_back(',');
        out += ex.label == Relevance::relevant ? "relevant" : "irrelevant";
        out.push_back('\n');
    }
    return out;
}

}  // namespace wikiref
