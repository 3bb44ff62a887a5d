#include "dsearch/manifest.hpp"

#include <filesystem>

#include "dsearch/digest.hpp"

namespace dsearch {

json Manifest::to_json() const {
    return json{{"command", command},
                {"config_hash", config_hash},
                {"version", version},
                {"inputs", inputs},
                {"outputs", outputs},
                {"extra", extra}};
}

Manifest Manifest::from_json(const json& j) {
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.value("version", "");
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.extra = j.value("extra", json::object());
    return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
    write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

std::optional<Manifest> load_manifest(const std::string& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    json parsed = json::parse(read_file(path), nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return Manifest::from_json(parsed);
}

bool up_to_date(const std::string& manifest_path, const std::string& output_dir,
                const std::string& command, const std::string& config_hash,
                const std::map<std::string, std::string>& input_digests) {
    const auto manifest = load_manifest(manifest_path);
    if (!manifest) return false;
    if (manifest->command != command || manifest->config_hash != config_hash) return false;
    if (manifest->inputs != input_digests) return false;
    for (const auto& [relative, digest] : manifest->outputs) {
        const auto path = std::filesystem::path(output_dir) / relative;
        if (!std::filesystem::exists(path)) return false;
        if (sha256_file(path.string()) != digest) return false;
    }
    return true;
}

}  // namespace dsearch
