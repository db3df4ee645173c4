#pragma once

namespace wikiref {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Bumped whenever the title canonicalization or reference key
// normalization rules change; recorded in corpus.meta.json so stale
// corpora can be detected.
inline constexpr const char* kCanonicalizationVersion = "1";

// Version of the built-in stopword list (see stopwords.cpp).
inline constexpr const char* kStopwordListVersion = "1";

}  // namespace wikiref
