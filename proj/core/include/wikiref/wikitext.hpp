#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wikiref/corpus.hpp"

namespace wikiref {

// Extractor for a small wikitext subset: [[target]] / [[target|anchor]]
// links, <ref>...</ref> citation blocks, blank-line paragraph breaks. The
// first paragraph becomes the summary. Full wikitext (templates, tables,
// infoboxes) is out of scope.

struct RawPage {
    std::string title;     // as written after the %%PAGE marker
    std::string wikitext;
};

// A bundle is a text file of pages, each introduced by a line
// "%%PAGE <title>". Text before the first marker must be blank.
std::vector<RawPage> split_bundle(std::string_view bundle_text);

// Throws SchemaError (naming the page) on unclosed [[ or <ref> markup.
WikiPage extract_wikitext_page(const std::string& title, std::string_view wikitext);

// Title used for matching a <ref> across pages: the title= parameter of a
// {{cite ...}} template when present, otherwise the text before the first
// period, otherwise the whole citation string.
std::string reference_title_from_raw(std::string_view raw);

Corpus ingest_bundle_text(std::string_view bundle_text);

}  // namespace wikiref
