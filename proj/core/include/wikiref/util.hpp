#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace wikiref {

// FNV-1a fingerprint as fixed-width hex. Used to stamp output artifacts
// with the config and corpus they were produced from; not cryptographic.
std::string digest64_hex(std::string_view bytes);

// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double value);

// RFC-4180 style CSV field quoting.
std::string csv_escape(std::string_view field);

std::string collapse_whitespace(std::string_view text);

std::string read_file(const std::string& path);             // throws IoError
void write_file(const std::string& path, std::string_view content);  // throws IoError

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written to per-index slots; chunking is static so the work partition is
// the same on every run.
void parallel_for(std::size_t jobs, std::size_t count,
                  const std::function<void(std::size_t)>& fn);

}  // namespace wikiref
