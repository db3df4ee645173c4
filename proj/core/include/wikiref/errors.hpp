#pragma once

#include <stdexcept>
#include <string>

namespace wikiref {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data: corpus records, model files, word-vector files.
// The message names the offending field or line.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Two pages with the same canonical title in one ingest run.
class DuplicateError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Invalid or incomplete run configuration (bad parameter ranges,
// missing paths, provider not loaded, missing models).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A name (page title, system id) does not resolve.
class LookupError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// An anchor (wikilink mention or reference) was passed with a page
// that does not own it.
class OwnershipError : public Error {
public:
    using Error::Error;
};

// Dimension or length mismatch between two vectors.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Pages and derived structures (graph, idf) built over different corpora.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Undersampling cannot proceed (single-class input).
class ResamplingError : public Error {
public:
    using Error::Error;
};

// Model training cannot proceed (single-class input, empty pair set).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace wikiref
