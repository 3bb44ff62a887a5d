#pragma once

#include <stdexcept>
#include <string>

namespace dsearch {

// Base class for all pipeline errors. Subclasses mark the failure domain so
// the CLI can map them to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad JSONL row, bad TSV column count, ...).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Query annotation failed for one record.
class AnnotationError : public Error {
public:
    enum class Code { backend_failure, unparsable_output };

    AnnotationError(Code code, std::string record_id, const std::string& msg)
        : Error("annotation of record '" + record_id + "' failed: " + msg),
          code_(code),
          record_id_(std::move(record_id)) {}

    Code code() const { return code_; }
    const std::string& record_id() const { return record_id_; }

private:
    Code code_;
    std::string record_id_;
};

// Network / HTTP / provider failure after retries were exhausted.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

// Replay archive has no entry for the request fingerprint.
class CacheMissError : public Error {
public:
    explicit CacheMissError(std::string fingerprint)
        : Error("replay cache miss for fingerprint " + fingerprint),
          fingerprint_(std::move(fingerprint)) {}
    const std::string& fingerprint() const { return fingerprint_; }

private:
    std::string fingerprint_;
};

// Configuration failed validation; carries the offending field path.
class ConfigError : public Error {
public:
    ConfigError(std::string field_path, const std::string& msg)
        : Error("config error at '" + field_path + "': " + msg),
          field_path_(std::move(field_path)) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

// A pipeline stage was invoked before its upstream artifact exists.
class DependencyError : public Error {
public:
    DependencyError(const std::string& missing, const std::string& producing_command)
        : Error("missing " + missing + "; run " + producing_command) {}
};

// Recorded trajectory spans are inconsistent; refusing to export.
class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

// select_best was handed an empty survivor set.
class SelectionError : public Error {
public:
    explicit SelectionError(const std::string& msg) : Error(msg) {}
};

}  // namespace dsearch
