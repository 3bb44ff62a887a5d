#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace dsearch {

using json = nlohmann::json;

// Parses a JSONL file; one json value per non-blank line. Parse failures
// throw ParseError carrying the 1-based line number.
std::vector<json> read_jsonl(const std::string& path);

// Streaming variant for large files.
void for_each_jsonl(const std::string& path, const std::function<void(const json&, long line)>& fn);

// Writes one compact json value per line. The write is atomic: content goes
// to a temp file first and is renamed into place.
void write_jsonl(const std::string& path, const std::vector<json>& rows);

// Serializes a json value in the canonical form used across all artifacts
// (compact separators, sorted object keys, lossy UTF-8 repair).
std::string dump_canonical(const json& value);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace dsearch
