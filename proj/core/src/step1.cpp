#include "wikiref/step1.hpp"

#include <algorithm>
#include <cmath>

#include "wikiref/errors.hpp"

namespace wikiref {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Sentences of `page` that mention any title in `targets` via a wikilink,
// deduplicated and concatenated in page order.
std::string collate_mention_sentences(const WikiPage& page,
                                      const std::set<std::string>& targets) {
    std::set<std::size_t> indices;
    for (const auto& link : page.wikilinks) {
        if (!link.sentence_index.has_value()) continue;
        if (targets.count(link.target_title) == 0) continue;
        indices.insert(*link.sentence_index);
    }
    std::string out;
    for (std::size_t i : indices) {
        if (!out.empty()) out.push_back(' ');
        out += page.sentences[i];
    }
    return out;
}

std::set<std::string> intersect(const std::set<std::string>& a,
                                const std::set<std::string>& b) {
    std::set<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::inserter(out, out.end()));
    return out;
}

double tfidf_cosine(std::string_view a, std::string_view b, const IdfTable& idf) {
    return cosine(tfidf_vector(tokenize(a), idf), tfidf_vector(tokenize(b), idf));
}

double embed_cosine(std::string_view a, std::string_view b,
                    const EmbeddingProvider& provider) {
    return cosine(embed_text(a, provider), embed_text(b, provider));
}

}  // namespace

const std::array<const char*, Step1Features::kCount>& Step1Features::names() {
    static const std::array<const char*, kCount> kNames = {
        "tis", "os", "is", "oss", "iss", "vs", "osvs", "isvs"};
    return kNames;
}

Step1Features step1_features(const WikiPage& target, const WikiPage& candidate,
                             const LinkGraph& graph, const IdfTable& idf,
                             const EmbeddingProvider& provider) {
    if (!graph.contains(target.title)) {
        throw ConsistencyError("page '" + target.title + "' is not in the link graph");
    }
    if (!graph.contains(candidate.title)) {
        throw ConsistencyError("page '" + candidate.title + "' is not in the link graph");
    }

    const auto& out_a = graph.out(target.title);
    const auto& out_b = graph.out(candidate.title);
    const auto& in_a = graph.in(target.title);
    const auto& in_b = graph.in(candidate.title);

    auto common_out = intersect(out_a, out_b);
    auto common_in = intersect(in_a, in_b);

    std::string out_doc_a = collate_mention_sentences(target, common_out);
    std::string out_doc_b = collate_mention_sentences(candidate, common_out);
    std::string in_doc_a = collate_mention_sentences(target, common_in);
    std::string in_doc_b = collate_mention_sentences(candidate, common_in);

    Step1Features f;
    f.tis = clamp01(tfidf_cosine(target.summary, candidate.summary, idf));
    f.os = clamp01(jaccard(out_a, out_b));
    f.is = clamp01(jaccard(in_a, in_b));
    f.oss = clamp01(tfidf_cosine(out_doc_a, out_doc_b, idf));
    f.iss = clamp01(tfidf_cosine(in_doc_a, in_doc_b, idf));
    // Word-vector cosines can go negative; the feature space is [0,1].
    f.vs = clamp01(embed_cosine(target.summary, candidate.summary, provider));
    f.osvs = clamp01(embed_cosine(out_doc_a, out_doc_b, provider));
    f.isvs = clamp01(embed_cosine(in_doc_a, in_doc_b, provider));
    return f;
}

std::vector<LabeledExample> label_examples(const WikiPage& target, const Corpus& corpus,
                                           const LinkGraph& graph, const IdfTable& idf,
                                           const EmbeddingProvider& provider,
                                           const std::set<std::string>& gold,
                                           LabelDiagnostics* diagnostics) {
    LabelDiagnostics local;
    LabelDiagnostics& diag = diagnostics ? *diagnostics : local;

    std::vector<LabeledExample> examples;
    std::set<std::string> seen;
    for (const auto& link : target.wikilinks) {
        if (link.target_title == target.title) {
            ++diag.self_links;
            continue;
        }
        if (!seen.insert(link.target_title).second) {
            ++diag.duplicate_links;
            continue;
        }
        const WikiPage* page = corpus.find(link.target_title);
        if (page == nullptr) {
            ++diag.absent_links;
            continue;
        }
        LabeledExample ex;
        ex.target_title = target.title;
        ex.wikilink_title = page->title;
        ex.features = step1_features(target, *page, graph, idf, provider);
        ex.label = Relevance::irrelevant;
        for (const auto& ref : page->references) {
            if (!ref.norm_key.empty() && gold.count(ref.norm_key) > 0) {
                ex.label = Relevance::relevant;
                break;
            }
        }
        examples.push_back(std::move(ex));
    }
    return examples;
}

EnnResult enn_undersample(const std::vector<LabeledExample>& examples,
                          const EnnParams& params) {
    std::size_t relevant = 0;
    for (const auto& ex : examples) {
        if (ex.label == Relevance::relevant) ++relevant;
    }
    std::size_t irrelevant = examples.size() - relevant;
    if (relevant == 0 || irrelevant == 0) {
        throw ResamplingError("undersampling needs both classes present");
    }

    EnnResult result;
    if (relevant == irrelevant) {
        // Balanced input has no majority class to edit.
        result.kept = examples;
        return result;
    }
    // The protected class is fixed by the input counts; editing never
    // switches sides even if the balance flips during the rounds.
    Relevance majority =
        irrelevant > relevant ? Relevance::irrelevant : Relevance::relevant;

    std::vector<std::size_t> alive(examples.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<std::array<double, Step1Features::kCount>> points(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        points[i] = examples[i].features.values();
    }

    auto sq_dist = [&](std::size_t a, std::size_t b) {
        double d = 0.0;
        for (std::size_t j = 0; j < Step1Features::kCount; ++j) {
            double diff = points[a][j] - points[b][j];
            d += diff * diff;
        }
        return d;
    };

    while (result.rounds < params.max_rounds) {
        ++result.rounds;
        std::vector<std::size_t> to_remove;
        for (std::size_t pos = 0; pos < alive.size(); ++pos) {
            std::size_t i = alive[pos];
            if (examples[i].label != majority) continue;

            // Neighbours ordered by (distance, index); ties keep input order.
            std::vector<std::pair<double, std::size_t>> neighbors;
            neighbors.reserve(alive.size() - 1);
            for (std::size_t other : alive) {
                if (other == i) continue;
                neighbors.push_back({sq_dist(i, other), other});
            }
            std::size_t k = std::min(params.k_neighbors, neighbors.size());
            std::partial_sort(neighbors.begin(), neighbors.begin() + k, neighbors.end());

            std::size_t same = 0;
            for (std::size_t n = 0; n < k; ++n) {
                if (examples[neighbors[n].second].label == examples[i].label) ++same;
            }
            // Misclassified means strictly fewer same-label neighbours than
            // different-label ones; an even split survives.
            if (2 * same < k) to_remove.push_back(i);
        }
        if (to_remove.empty()) break;
        std::vector<std::size_t> next;
        next.reserve(alive.size() - to_remove.size());
        std::size_t r = 0;
        for (std::size_t i : alive) {
            if (r < to_remove.size() && to_remove[r] == i) {
                ++r;
                result.removed_indices.push_back(i);
            } else {
                next.push_back(i);
            }
        }
        alive.swap(next);
    }

    std::sort(result.removed_indices.begin(), result.removed_indices.end());
    result.kept.reserve(alive.size());
    for (std::size_t i : alive) result.kept.push_back(examples[i]);
    return result;
}

std::vector<ChiSquareEntry> chi_square_rank(const std::vector<LabeledExample>& examples,
                                            std::size_t bins) {
    if (examples.empty()) throw ConfigError("chi-square ranking needs examples");
    if (bins < 2) throw ConfigError("chi-square ranking needs at least 2 bins");

    std::array<std::size_t, 2> class_totals = {0, 0};
    for (const auto& ex : examples) {
        ++class_totals[static_cast<std::size_t>(ex.label)];
    }
    const double n = static_cast<double>(examples.size());

    std::vector<ChiSquareEntry> entries;
    for (std::size_t fi = 0; fi < Step1Features::kCount; ++fi) {
        std::vector<std::array<std::size_t, 2>> table(bins, {0, 0});
        for (const auto& ex : examples) {
            double v = std::clamp(ex.features.values()[fi], 0.0, 1.0);
            std::size_t bin = std::min(static_cast<std::size_t>(v * static_cast<double>(bins)),
                                       bins - 1);
            ++table[bin][static_cast<std::size_t>(ex.label)];
        }
        double chi2 = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            double row_total = static_cast<double>(table[b][0] + table[b][1]);
            for (std::size_t c = 0; c < 2; ++c) {
                double expected = row_total * static_cast<double>(class_totals[c]) / n;
                if (expected <= 0.0) continue;
                double diff = static_cast<double>(table[b][c]) - expected;
                chi2 += diff * diff / expected;
            }
        }
        entries.push_back({fi, Step1Features::names()[fi], chi2});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ChiSquareEntry& a, const ChiSquareEntry& b) {
                         return a.score > b.score;
                     });
    return entries;
}

}  // namespace wikiref
