#include "dsearch/jsonl.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsearch/errors.hpp"

namespace dsearch {

std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> rows;
    for_each_jsonl(path, [&rows](const json& row, long) { rows.push_back(row); });
    return rows;
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(const json&, long line)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded())
            throw ParseError("invalid JSON in " + path, line_no);
        fn(row, line_no);
    }
}

std::string dump_canonical(const json& value) {
    return value.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_jsonl(const std::string& path, const std::vector<json>& rows) {
    std::ostringstream out;
    for (const auto& row : rows) out << dump_canonical(row) << '\n';
    write_file_atomic(path, out.str());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

}  // namespace dsearch
