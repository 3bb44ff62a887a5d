#pragma once

#include <map>
#include <optional>
#include <string>

#include "dsearch/jsonl.hpp"

namespace dsearch {

// Provenance record written next to every command's outputs. Output paths
// are stored relative to the output directory so artifact trees compare
// byte-for-byte across runs.
struct Manifest {
    std::string command;
    std::string config_hash;
    std::string version;
    std::map<std::string, std::string> inputs;   // path as given -> sha256
    std::map<std::string, std::string> outputs;  // relative path -> sha256
    json extra;  // seeds, cache digests, counters

    json to_json() const;
    static Manifest from_json(const json& j);
};

void save_manifest(const std::string& path, const Manifest& manifest);
std::optional<Manifest> load_manifest(const std::string& path);

// True when a previous run of `command` under the same config consumed
// byte-identical inputs and all of its outputs are still in place with the
// recorded digests. Such a run can be skipped.
bool up_to_date(const std::string& manifest_path, const std::string& output_dir,
                const std::string& command, const std::string& config_hash,
                const std::map<std::string, std::string>& input_digests);

}  // namespace dsearch
