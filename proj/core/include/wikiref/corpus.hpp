#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wikiref {

// One wikilink anchor inside a page. sentence_index addresses the sentence
// containing the anchor; absent when the citing sentence is unknown.
struct WikilinkMention {
    std::string target_title;  // canonicalized like WikiPage::title
    std::optional<std::size_t> sentence_index;
};

struct Reference {
    std::string title;    // reference title text
    std::string raw;      // full citation string as found
    std::string norm_key; // normalize_ref_title(title)
    std::optional<std::size_t> sentence_index;
};

// One article. Immutable once ingested; safe for concurrent reads.
struct WikiPage {
    std::string title;                    // canonical, unique within a corpus
    std::string summary;                  // first paragraph text
    std::vector<std::string> sentences;   // all sentences in page order
    std::vector<WikilinkMention> wikilinks;
    std::vector<Reference> references;
};

// Wiki title canonicalization: underscores to spaces, whitespace collapsed,
// first letter uppercased (wiki titles are first-letter case-insensitive).
// Idempotent: canonicalize(canonicalize(x)) == canonicalize(x).
std::string canonicalize_title(std::string_view title);

// Reference matching key: lowercased, punctuation replaced by spaces,
// whitespace collapsed, trimmed. Empty input yields the empty key; such
// references are excluded from matching. Idempotent.
std::string normalize_ref_title(std::string_view title);

// Splits on '.', '!' or '?' followed by whitespace and an uppercase letter
// or digit. Abbreviations are not special-cased; the rule is deterministic
// and that is the point.
std::vector<std::string> segment_sentences(std::string_view text);

// Raw half-open character ranges of the sentences of `text`, boundaries per
// the segment_sentences rule, before trimming. Used to map anchor positions
// to sentence indices during wikitext extraction.
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<SentenceSpan> sentence_spans(std::string_view text);

// Parses one corpus-record line (JSON object; see README for the schema).
// Unknown fields are ignored. Throws SchemaError naming the offending field.
WikiPage parse_page_record(const std::string& json_line);

// Canonical single-line serialization; parse_page_record round-trips it
// field-for-field and byte-for-byte.
std::string serialize_page_record(const WikiPage& page);

// The sentence in which the anchor is cited; empty when sentence_index is
// absent (downstream features treat that as a zero vector). Throws
// OwnershipError if the anchor is not an element of the page.
std::string_view citation_context(const WikiPage& page, const WikilinkMention& anchor);
std::string_view citation_context(const WikiPage& page, const Reference& anchor);

struct CorpusMeta {
    std::size_t pages = 0;
    std::size_t wikilinks = 0;
    std::size_t references = 0;
    std::string canonicalization_version;
    std::string corpus_digest;  // digest of the serialized corpus bytes

    std::string to_json() const;
    static CorpusMeta from_json(const std::string& text);
};

class Corpus {
public:
    Corpus() = default;

    // Throws DuplicateError when the canonical title is already present.
    void add(WikiPage page);

    std::size_t size() const { return pages_.size(); }
    bool empty() const { return pages_.empty(); }
    const std::vector<WikiPage>& pages() const { return pages_; }

    const WikiPage* find(std::string_view title) const;
    const WikiPage& at(std::string_view title) const;  // throws LookupError

    // One JSON object per line. Loading validates every record.
    static Corpus load_jsonl(const std::string& path);
    std::string to_jsonl() const;
    void save_jsonl(const std::string& path) const;

    CorpusMeta meta() const;

private:
    std::vector<WikiPage> pages_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

// outlinks[t]: in-corpus targets of t's wikilinks; inlinks derived by
// inversion, so t in inlinks[u] iff u in outlinks[t]. Out-of-corpus link
// targets are dropped from the graph but stay on the page.
struct LinkGraph {
    std::map<std::string, std::set<std::string>> outlinks;
    std::map<std::string, std::set<std::string>> inlinks;

    bool contains(std::string_view title) const;
    const std::set<std::string>& out(std::string_view title) const;
    const std::set<std::string>& in(std::string_view title) const;
};

LinkGraph build_link_graph(const Corpus& corpus);

}  // namespace wikiref
