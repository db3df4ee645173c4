#include "wikiref/wikitext.hpp"

#include <sstream>

#include "wikiref/errors.hpp"
#include "wikiref/util.hpp"

namespace wikiref {

namespace {

constexpr std::string_view kPageMarker = "%%PAGE";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

struct LinkAnchor {
    std::string target;
    std::size_t pos;  // position of the anchor text in the stripped paragraph
};

struct RefAnchor {
    std::string raw;
    std::size_t pos;  // position where the tag stood in the stripped paragraph
};

struct StrippedParagraph {
    std::string text;
    std::vector<LinkAnchor> links;
    std::vector<RefAnchor> refs;
};

StrippedParagraph strip_markup(const std::string& page_title, std::string_view para) {
    StrippedParagraph out;
    std::size_t i = 0;
    while (i < para.size()) {
        if (para.compare(i, 2, "[[") == 0) {
            std::size_t close = para.find("]]", i + 2);
            if (close == std::string_view::npos) {
                throw SchemaError("page '" + page_title + "': unclosed [[ wikilink");
            }
            std::string_view inner = para.substr(i + 2, close - (i + 2));
            std::size_t bar = inner.find('|');
            std::string_view target = bar == std::string_view::npos ? inner : inner.substr(0, bar);
            std::string_view display = bar == std::string_view::npos ? inner : inner.substr(bar + 1);
            out.links.push_back({canonicalize_title(target), out.text.size()});
            out.text.append(display);
            i = close + 2;
            continue;
        }
        if (para.compare(i, 4, "<ref") == 0) {
            std::size_t gt = para.find('>', i + 4);
            if (gt == std::string_view::npos) {
                throw SchemaError("page '" + page_title + "': unterminated <ref tag");
            }
            if (gt > 0 && para[gt - 1] == '/') {
                // Self-closing named re-use; the citation is only counted
                // where its content appears.
                i = gt + 1;
                continue;
            }
            std::size_t close = para.find("</ref>", gt + 1);
            if (close == std::string_view::npos) {
                throw SchemaError("page '" + page_title + "': unclosed <ref> block");
            }
            std::string raw = collapse_whitespace(para.substr(gt + 1, close - (gt + 1)));
            out.refs.push_back({std::move(raw), out.text.size()});
            i = close + 6;
            continue;
        }
        out.text.push_back(para[i]);
        ++i;
    }
    return out;
}

// Index of the sentence span owning a stripped-text position: the last
// span starting at or before it.
std::size_t owning_span(const std::vector<SentenceSpan>& spans, std::size_t pos) {
    std::size_t idx = 0;
    for (std::size_t s = 0; s < spans.size(); ++s) {
        if (spans[s].begin <= pos) idx = s;
    }
    return idx;
}

}  // namespace

std::string reference_title_from_raw(std::string_view raw) {
    std::size_t param = raw.find("title=");
    if (param != std::string_view::npos) {
        std::size_t begin = param + 6;
        std::size_t end = raw.size();
        std::size_t bar = raw.find('|', begin);
        std::size_t brace = raw.find("}}", begin);
        if (bar != std::string_view::npos) end = std::min(end, bar);
        if (brace != std::string_view::npos) end = std::min(end, brace);
        std::string value = collapse_whitespace(raw.substr(begin, end - begin));
        if (!value.empty()) return value;
    }
    std::size_t dot = raw.find('.');
    if (dot != std::string_view::npos) {
        std::string prefix = collapse_whitespace(raw.substr(0, dot));
        if (!prefix.empty()) return prefix;
    }
    return collapse_whitespace(raw);
}

std::vector<RawPage> split_bundle(std::string_view bundle_text) {
    std::vector<RawPage> pages;
    std::istringstream in{std::string(bundle_text)};
    std::string line;
    std::size_t line_no = 0;
    bool in_page = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(std::move(line));
        if (line.rfind(kPageMarker, 0) == 0) {
            std::string title = collapse_whitespace(line.substr(kPageMarker.size()));
            if (title.empty()) {
                throw SchemaError("bundle line " + std::to_string(line_no) +
                                  ": %%PAGE marker without a title");
            }
            pages.push_back({title, ""});
            in_page = true;
            continue;
        }
        if (!in_page) {
            if (!is_blank(line)) {
                throw SchemaError("bundle line " + std::to_string(line_no) +
                                  ": text before the first %%PAGE marker");
            }
            continue;
        }
        pages.back().wikitext += line;
        pages.back().wikitext.push_back('\n');
    }
    return pages;
}

WikiPage extract_wikitext_page(const std::string& title, std::string_view wikitext) {
    WikiPage page;
    page.title = canonicalize_title(title);
    if (page.title.empty()) throw SchemaError("wikitext page with empty title");

    // Gather paragraphs: blank lines separate, lines inside join with spaces.
    std::vector<std::string> paragraphs;
    {
        std::istringstream in{std::string(wikitext)};
        std::string line;
        std::string current;
        auto flush = [&] {
            if (!is_blank(current)) paragraphs.push_back(current);
            current.clear();
        };
        while (std::getline(in, line)) {
            line = strip_cr(std::move(line));
            if (is_blank(line)) {
                flush();
            } else {
                if (!current.empty()) current.push_back(' ');
                current += line;
            }
        }
        flush();
    }

    std::size_t sentence_offset = 0;
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        StrippedParagraph stripped = strip_markup(page.title, paragraphs[p]);
        auto spans = sentence_spans(stripped.text);

        // Kept-sentence index per span; empty-after-trim spans are dropped.
        std::vector<std::optional<std::size_t>> kept_index(spans.size());
        std::vector<std::string> kept;
        for (std::size_t s = 0; s < spans.size(); ++s) {
            std::string sentence = collapse_whitespace(
                stripped.text.substr(spans[s].begin, spans[s].end - spans[s].begin));
            if (sentence.empty()) continue;
            kept_index[s] = kept.size();
            kept.push_back(std::move(sentence));
        }

        auto global_index = [&](std::size_t pos) -> std::optional<std::size_t> {
            if (spans.empty()) return std::nullopt;
            auto ki = kept_index[owning_span(spans, pos)];
            if (!ki.has_value()) return std::nullopt;
            return sentence_offset + *ki;
        };

        for (const auto& link : stripped.links) {
            WikilinkMention m;
            m.target_title = link.target;
            m.sentence_index = global_index(link.pos);
            page.wikilinks.push_back(std::move(m));
        }
        for (const auto& ref : stripped.refs) {
            Reference r;
            r.raw = ref.raw;
            r.title = reference_title_from_raw(ref.raw);
            r.norm_key = normalize_ref_title(r.title);
            // A citation binds to the sentence it follows, so look one
            // character back past the terminal punctuation.
            r.sentence_index = global_index(ref.pos == 0 ? 0 : ref.pos - 1);
            page.references.push_back(std::move(r));
        }

        if (p == 0) {
            std::string summary;
            for (const auto& s : kept) {
                if (!summary.empty()) summary.push_back(' ');
                summary += s;
            }
            page.summary = std::move(summary);
        }
        sentence_offset += kept.size();
        page.sentences.insert(page.sentences.end(), kept.begin(), kept.end());
    }
    return page;
}

Corpus ingest_bundle_text(std::string_view bundle_text) {
    Corpus corpus;
    for (const auto& raw : split_bundle(bundle_text)) {
        corpus.add(extract_wikitext_page(raw.title, raw.wikitext));
    }
    return corpus;
}

}  // namespace wikiref
