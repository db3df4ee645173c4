#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wikiref {

// Text vectorization and similarity kernels shared by both pipeline steps.
// Everything here is immutable after construction and safe for concurrent
// reads.

// Lowercased alphanumeric tokens; punctuation delimits; stopwords removed.
// Bytes >= 0x80 are treated as token characters so UTF-8 words survive
// untouched. Empty text yields an empty sequence.
std::vector<std::string> tokenize(std::string_view text);

// The fixed stopword list shipped with the artifact (see kStopwordListVersion).
const std::set<std::string, std::less<>>& stopwords();

struct SparseVector {
    // token -> weight; zero-weight entries are never stored.
    std::map<std::string, double> entries;

    double norm() const;
    double dot(const SparseVector& other) const;
    bool empty() const { return entries.empty(); }
};

struct DenseVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double norm() const;
    double dot(const DenseVector& other) const;  // throws ShapeError on dim mismatch
};

// Document frequencies fitted over one corpus.
class IdfTable {
public:
    IdfTable() = default;

    std::size_t doc_count() const { return doc_count_; }
    std::size_t df(std::string_view token) const;

    // Smoothed idf: ln((1 + N) / (1 + df)) + 1. Unseen tokens get the
    // finite df = 0 value instead of an infinite weight.
    double idf(std::string_view token) const;

    const std::map<std::string, std::size_t>& document_frequencies() const { return df_; }

    friend IdfTable fit_idf(const std::vector<std::vector<std::string>>& documents);

private:
    std::size_t doc_count_ = 0;
    std::map<std::string, std::size_t> df_;
};

// df counts distinct-document occurrences. Throws ConfigError when the
// collection is empty.
IdfTable fit_idf(const std::vector<std::vector<std::string>>& documents);

// Raw term count times smoothed idf. No length normalization here; cosine
// normalizes. Weights are strictly positive for every token that occurs.
SparseVector tfidf_vector(const std::vector<std::string>& tokens, const IdfTable& idf);

// u.v / (|u||v|); 0 when either norm is 0.
double cosine(const SparseVector& u, const SparseVector& v);
double cosine(const DenseVector& u, const DenseVector& v);  // throws ShapeError on dim mismatch

// |a n b| / |a u b|; 0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Token -> dense vector table. The default pipeline provider averages word
// vectors loaded from a text dump; files of precomputed document vectors
// use the same format with document identifiers in the token column.
class EmbeddingProvider {
public:
    EmbeddingProvider() = default;
    EmbeddingProvider(std::string name, std::size_t dim);

    // One line per token: token followed by d whitespace-separated decimal
    // floats. An optional first "V d" header line is detected by shape.
    static EmbeddingProvider load_word_vectors(const std::string& path);

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return table_.size(); }
    bool loaded() const { return dim_ > 0; }

    const DenseVector* lookup(std::string_view token) const;
    void insert(const std::string& token, DenseVector v);  // throws ShapeError on wrong dim

private:
    std::string name_;
    std::size_t dim_ = 0;
    std::unordered_map<std::string, DenseVector> table_;
};

// Arithmetic mean of the word vectors of in-vocabulary tokens; the zero
// vector of dimension d when no token is in vocabulary. Tokenization is
// the same as everywhere else (stopwords removed). Throws ConfigError when
// the provider is not loaded.
DenseVector embed_text(std::string_view text, const EmbeddingProvider& provider);
DenseVector embed_tokens(const std::vector<std::string>& tokens, const EmbeddingProvider& provider);

}  // namespace wikiref
