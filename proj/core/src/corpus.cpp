#include "wikiref/corpus.hpp"

#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/util.hpp"
#include "wikiref/version.hpp"

namespace wikiref {

using ordered_json = nlohmann::ordered_json;

std::string canonicalize_title(std::string_view title) {
    std::string spaced;
    spaced.reserve(title.size());
    for (char c : title) spaced.push_back(c == '_' ? ' ' : c);
    std::string out = collapse_whitespace(spaced);
    if (!out.empty()) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

std::string normalize_ref_title(std::string_view title) {
    std::string mapped;
    mapped.reserve(title.size());
    for (unsigned char c : title) {
        if (std::isalnum(c) != 0 || c >= 0x80) {
            mapped.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                                      : static_cast<char>(c));
        } else {
            mapped.push_back(' ');
        }
    }
    return collapse_whitespace(mapped);
}

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

std::string trimmed(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<SentenceSpan> sentence_spans(std::string_view text) {
    std::vector<SentenceSpan> spans;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_terminal(text[i])) {
            std::size_t j = i + 1;
            while (j < text.size() && is_terminal(text[j])) ++j;  // "?!" and "..." runs
            std::size_t k = j;
            while (k < text.size() && is_space(text[k])) ++k;
            bool boundary = k > j && k < text.size() &&
                            (std::isupper(static_cast<unsigned char>(text[k])) != 0 ||
                             std::isdigit(static_cast<unsigned char>(text[k])) != 0);
            if (boundary) {
                spans.push_back({start, j});
                start = k;
                i = k;
                continue;
            }
            i = j;
            continue;
        }
        ++i;
    }
    if (start < text.size()) spans.push_back({start, text.size()});
    return spans;
}

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    for (const auto& span : sentence_spans(text)) {
        std::string s = trimmed(text.substr(span.begin, span.end - span.begin));
        if (!s.empty()) sentences.push_back(std::move(s));
    }
    return sentences;
}

namespace {

// summary must be the concatenation of a prefix of sentences, compared
// with collapsed whitespace. Returns the prefix length or nullopt.
std::optional<std::size_t> summary_prefix_length(const std::string& summary,
                                                 const std::vector<std::string>& sentences) {
    std::string want = collapse_whitespace(summary);
    if (want.empty()) return 0;
    std::string acc;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
        if (!acc.empty()) acc.push_back(' ');
        acc += collapse_whitespace(sentences[k]);
        if (acc == want) return k + 1;
        if (acc.size() > want.size()) return std::nullopt;
    }
    return std::nullopt;
}

const ordered_json* get_field(const ordered_json& rec, const char* name) {
    auto it = rec.find(name);
    if (it == rec.end() || it->is_null()) return nullptr;
    return &*it;
}

std::string require_string(const ordered_json& rec, const char* name) {
    const ordered_json* f = get_field(rec, name);
    if (f == nullptr) throw SchemaError(std::string("record field '") + name + "' is missing");
    if (!f->is_string()) throw SchemaError(std::string("record field '") + name + "' must be a string");
    return f->get<std::string>();
}

std::optional<std::size_t> parse_sentence_index(const ordered_json& v, const std::string& field,
                                                std::size_t sentence_count) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw SchemaError("record field '" + field + "' must be a non-negative integer or null");
    }
    auto idx = static_cast<std::size_t>(v.get<long long>());
    if (idx >= sentence_count) {
        throw SchemaError("record field '" + field + "': sentence index " +
                          std::to_string(idx) + " out of range [0, " +
                          std::to_string(sentence_count) + ")");
    }
    return idx;
}

}  // namespace

WikiPage parse_page_record(const std::string& json_line) {
    ordered_json rec;
    try {
        rec = ordered_json::parse(json_line);
    } catch (const ordered_json::parse_error& e) {
        throw SchemaError(std::string("record is not valid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw SchemaError("record must be a JSON object");

    WikiPage page;
    page.title = canonicalize_title(require_string(rec, "title"));
    if (page.title.empty()) throw SchemaError("record field 'title' is empty");

    const ordered_json* summary = get_field(rec, "summary");
    if (summary != nullptr && !summary->is_string()) {
        throw SchemaError("record field 'summary' must be a string");
    }
    page.summary = summary != nullptr ? collapse_whitespace(summary->get<std::string>()) : "";

    const ordered_json* sentences = get_field(rec, "sentences");
    if (sentences != nullptr) {
        if (!sentences->is_array()) throw SchemaError("record field 'sentences' must be an array");
        for (std::size_t i = 0; i < sentences->size(); ++i) {
            const auto& s = (*sentences)[i];
            if (!s.is_string()) {
                throw SchemaError("record field 'sentences[" + std::to_string(i) +
                                  "]' must be a string");
            }
            page.sentences.push_back(collapse_whitespace(s.get<std::string>()));
        }
    } else {
        // No sentence list given: derive it by segmenting the summary.
        page.sentences = segment_sentences(page.summary);
    }

    if (!summary_prefix_length(page.summary, page.sentences).has_value()) {
        throw SchemaError("record field 'summary' does not equal the concatenation of a "
                          "prefix of 'sentences' (page '" + page.title + "')");
    }

    const ordered_json* links = get_field(rec, "wikilinks");
    if (links != nullptr) {
        if (!links->is_array()) throw SchemaError("record field 'wikilinks' must be an array");
        for (std::size_t i = 0; i < links->size(); ++i) {
            const auto& l = (*links)[i];
            std::string field = "wikilinks[" + std::to_string(i) + "]";
            if (!l.is_object()) throw SchemaError("record field '" + field + "' must be an object");
            auto target_it = l.find("target");
            if (target_it == l.end() || !target_it->is_string()) {
                throw SchemaError("record field '" + field + ".target' must be a string");
            }
            WikilinkMention m;
            m.target_title = canonicalize_title(target_it->get<std::string>());
            if (m.target_title.empty()) {
                throw SchemaError("record field '" + field + ".target' is empty");
            }
            auto sent_it = l.find("sentence");
            if (sent_it != l.end()) {
                m.sentence_index =
                    parse_sentence_index(*sent_it, field + ".sentence", page.sentences.size());
            }
            page.wikilinks.push_back(std::move(m));
        }
    }

    const ordered_json* refs = get_field(rec, "references");
    if (refs != nullptr) {
        if (!refs->is_array()) throw SchemaError("record field 'references' must be an array");
        for (std::size_t i = 0; i < refs->size(); ++i) {
            const auto& r = (*refs)[i];
            std::string field = "references[" + std::to_string(i) + "]";
            if (!r.is_object()) throw SchemaError("record field '" + field + "' must be an object");
            auto title_it = r.find("title");
            if (title_it == r.end() || !title_it->is_string()) {
                throw SchemaError("record field '" + field + ".title' must be a string");
            }
            Reference ref;
            ref.title = title_it->get<std::string>();
            auto raw_it = r.find("raw");
            if (raw_it != r.end() && !raw_it->is_null()) {
                if (!raw_it->is_string()) {
                    throw SchemaError("record field '" + field + ".raw' must be a string");
                }
                ref.raw = raw_it->get<std::string>();
            } else {
                ref.raw = ref.title;
            }
            ref.norm_key = normalize_ref_title(ref.title);
            auto sent_it = r.find("sentence");
            if (sent_it != r.end()) {
                ref.sentence_index =
                    parse_sentence_index(*sent_it, field + ".sentence", page.sentences.size());
            }
            page.references.push_back(std::move(ref));
        }
    }
    return page;
}

std::string serialize_page_record(const WikiPage& page) {
    ordered_json rec;
    rec["title"] = page.title;
    rec["summary"] = page.summary;
    rec["sentences"] = page.sentences;
    ordered_json links = ordered_json::array();
    for (const auto& m : page.wikilinks) {
        ordered_json l;
        l["target"] = m.target_title;
        if (m.sentence_index.has_value()) {
            l["sentence"] = *m.sentence_index;
        } else {
            l["sentence"] = nullptr;
        }
        links.push_back(std::move(l));
    }
    rec["wikilinks"] = std::move(links);
    ordered_json refs = ordered_json::array();
    for (const auto& r : page.references) {
        ordered_json j;
        j["title"] = r.title;
        j["raw"] = r.raw;
        if (r.sentence_index.has_value()) {
            j["sentence"] = *r.sentence_index;
        } else {
            j["sentence"] = nullptr;
        }
        refs.push_back(std::move(j));
    }
    rec["references"] = std::move(refs);
    return rec.dump();
}

namespace {

template <typename T>
std::string_view context_impl(const WikiPage& page, const std::vector<T>& owned, const T& anchor) {
    const T* begin = owned.data();
    const T* end = begin + owned.size();
    if (&anchor < begin || &anchor >= end) {
        throw OwnershipError("anchor does not belong to page '" + page.title + "'");
    }
    if (!anchor.sentence_index.has_value()) return {};
    return page.sentences[*anchor.sentence_index];
}

}  // namespace

std::string_view citation_context(const WikiPage& page, const WikilinkMention& anchor) {
    return context_impl(page, page.wikilinks, anchor);
}

std::string_view citation_context(const WikiPage& page, const Reference& anchor) {
    return context_impl(page, page.references, anchor);
}

std::string CorpusMeta::to_json() const {
    ordered_json j;
    j["format"] = "wikiref.corpus.meta.v1";
    j["pages"] = pages;
    j["wikilinks"] = wikilinks;
    j["references"] = references;
    j["canonicalization_version"] = canonicalization_version;
    j["corpus_digest"] = corpus_digest;
    return j.dump(2) + "\n";
}

CorpusMeta CorpusMeta::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw SchemaError(std::string("corpus meta is not valid JSON: ") + e.what());
    }
    CorpusMeta meta;
    meta.pages = j.value("pages", std::size_t{0});
    meta.wikilinks = j.value("wikilinks", std::size_t{0});
    meta.references = j.value("references", std::size_t{0});
    meta.canonicalization_version = j.value("canonicalization_version", "");
    meta.corpus_digest = j.value("corpus_digest", "");
    return meta;
}

void Corpus::add(WikiPage page) {
    if (index_.contains(page.title)) {
        throw DuplicateError("duplicate page title '" + page.title + "'");
    }
    index_.emplace(page.title, pages_.size());
    pages_.push_back(std::move(page));
}

const WikiPage* Corpus::find(std::string_view title) const {
    auto it = index_.find(title);
    return it == index_.end() ? nullptr : &pages_[it->second];
}

const WikiPage& Corpus::at(std::string_view title) const {
    const WikiPage* p = find(title);
    if (p == nullptr) throw LookupError("unknown page title '" + std::string(title) + "'");
    return *p;
}

Corpus Corpus::load_jsonl(const std::string& path) {
    std::string content = read_file(path);
    Corpus corpus;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        try {
            corpus.add(parse_page_record(line));
        } catch (const SchemaError& e) {
            throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

std::string Corpus::to_jsonl() const {
    std::string out;
    for (const auto& page : pages_) {
        out += serialize_page_record(page);
        out.push_back('\n');
    }
    return out;
}

void Corpus::save_jsonl(const std::string& path) const { write_file(path, to_jsonl()); }

CorpusMeta Corpus::meta() const {
    CorpusMeta m;
    m.pages = pages_.size();
    for (const auto& page : pages_) {
        m.wikilinks += page.wikilinks.size();
        m.references += page.references.size();
    }
    m.canonicalization_version = kCanonicalizationVersion;
    m.corpus_digest = digest64_hex(to_jsonl());
    return m;
}

bool LinkGraph::contains(std::string_view title) const {
    return outlinks.find(std::string(title)) != outlinks.end();
}

const std::set<std::string>& LinkGraph::out(std::string_view title) const {
    static const std::set<std::string> empty;
    auto it = outlinks.find(std::string(title));
    return it == outlinks.end() ? empty : it->second;
}

const std::set<std::string>& LinkGraph::in(std::string_view title) const {
    static const std::set<std::string> empty;
    auto it = inlinks.find(std::string(title));
    return it == inlinks.end() ? empty : it->second;
}

LinkGraph build_link_graph(const Corpus& corpus) {
    LinkGraph graph;
    for (const auto& page : corpus.pages()) {
        graph.outlinks[page.title];
        graph.inlinks[page.title];
    }
    for (const auto& page : corpus.pages()) {
        auto& out = graph.outlinks[page.title];
        for (const auto& m : page.wikilinks) {
            if (corpus.find(m.target_title) == nullptr) continue;  // corpus restriction
            out.insert(m.target_title);
            graph.inlinks[m.target_title].insert(page.title);
        }
    }
    return graph;
}

}  // namespace wikiref
