#include "wikiref/textsim.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "wikiref/errors.hpp"
#include "wikiref/util.hpp"

namespace wikiref {

namespace {

bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    const auto& stop = stopwords();
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            if (stop.find(current) == stop.end()) tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                                       : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [token, w] : entries) s += w * w;
    return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
    // Walk the smaller map.
    const SparseVector* small = this;
    const SparseVector* large = &other;
    if (small->entries.size() > large->entries.size()) std::swap(small, large);
    double s = 0.0;
    for (const auto& [token, w] : small->entries) {
        auto it = large->entries.find(token);
        if (it != large->entries.end()) s += w * it->second;
    }
    return s;
}

double DenseVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

double DenseVector::dot(const DenseVector& other) const {
    if (dim() != other.dim()) {
        throw ShapeError("dense vector dimension mismatch: " + std::to_string(dim()) +
                         " vs " + std::to_string(other.dim()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * other.values[i];
    return s;
}

std::size_t IdfTable::df(std::string_view token) const {
    auto it = df_.find(std::string(token));
    return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(std::string_view token) const {
    double n = static_cast<double>(doc_count_);
    double d = static_cast<double>(df(token));
    return std::log((1.0 + n) / (1.0 + d)) + 1.0;
}

IdfTable fit_idf(const std::vector<std::vector<std::string>>& documents) {
    if (documents.empty()) throw ConfigError("fit_idf: document collection is empty");
    IdfTable table;
    table.doc_count_ = documents.size();
    for (const auto& doc : documents) {
        std::set<std::string_view> seen;
        for (const auto& token : doc) seen.insert(token);
        for (auto token : seen) ++table.df_[std::string(token)];
    }
    return table;
}

SparseVector tfidf_vector(const std::vector<std::string>& tokens, const IdfTable& idf) {
    std::map<std::string, double> tf;
    for (const auto& token : tokens) tf[token] += 1.0;
    SparseVector out;
    for (const auto& [token, count] : tf) {
        out.entries[token] = count * idf.idf(token);
    }
    return out;
}

double cosine(const SparseVector& u, const SparseVector& v) {
    double nu = u.norm();
    double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return u.dot(v) / (nu * nv);
}

double cosine(const DenseVector& u, const DenseVector& v) {
    double d = u.dot(v);  // dimension check happens here
    double nu = u.norm();
    double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return d / (nu * nv);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

EmbeddingProvider::EmbeddingProvider(std::string name, std::size_t dim)
    : name_(std::move(name)), dim_(dim) {}

const DenseVector* EmbeddingProvider::lookup(std::string_view token) const {
    auto it = table_.find(std::string(token));
    return it == table_.end() ? nullptr : &it->second;
}

void EmbeddingProvider::insert(const std::string& token, DenseVector v) {
    if (v.dim() != dim_) {
        throw ShapeError("embedding for '" + token + "' has dimension " +
                         std::to_string(v.dim()) + ", provider expects " +
                         std::to_string(dim_));
    }
    table_[token] = std::move(v);
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(f);
    return fields;
}

bool parse_positive_int(const std::string& s, std::size_t& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    try {
        out = std::stoull(s);
    } catch (const std::exception&) {
        return false;
    }
    return out > 0;
}

}  // namespace

EmbeddingProvider EmbeddingProvider::load_word_vectors(const std::string& path) {
    std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    EmbeddingProvider provider;
    provider.name_ = "word-average:" + path;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (first_content_line) {
            first_content_line = false;
            // Header is exactly two positive integers ("V d").
            std::size_t v = 0;
            std::size_t d = 0;
            if (fields.size() == 2 && parse_positive_int(fields[0], v) &&
                parse_positive_int(fields[1], d)) {
                provider.dim_ = d;
                continue;
            }
        }
        if (fields.size() < 2) {
            throw SchemaError("word-vector file " + path + ": line " +
                              std::to_string(line_no) + " has no vector values");
        }
        std::size_t d = fields.size() - 1;
        if (provider.dim_ == 0) {
            provider.dim_ = d;
        } else if (d != provider.dim_) {
            throw SchemaError("word-vector file " + path + ": line " +
                              std::to_string(line_no) + " has " + std::to_string(d) +
                              " values, expected " + std::to_string(provider.dim_));
        }
        DenseVector vec;
        vec.values.reserve(d);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                vec.values.push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw SchemaError("word-vector file " + path + ": line " +
                                  std::to_string(line_no) + ": bad float '" + fields[i] + "'");
            }
        }
        provider.table_[fields[0]] = std::move(vec);
    }
    if (provider.dim_ == 0) {
        throw SchemaError("word-vector file " + path + ": no vectors found");
    }
    return provider;
}

DenseVector embed_tokens(const std::vector<std::string>& tokens,
                         const EmbeddingProvider& provider) {
    if (!provider.loaded()) throw ConfigError("embedding provider is not loaded");
    DenseVector mean;
    mean.values.assign(provider.dim(), 0.0);
    std::size_t hits = 0;
    for (const auto& token : tokens) {
        const DenseVector* v = provider.lookup(token);
        if (v == nullptr) continue;
        ++hits;
        for (std::size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += v->values[i];
    }
    if (hits > 0) {
        for (double& x : mean.values) x /= static_cast<double>(hits);
    }
    return mean;
}

DenseVector embed_text(std::string_view text, const EmbeddingProvider& provider) {
    return embed_tokens(tokenize(text), provider);
}

}  // namespace wikiref
