#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accforge/errors.hpp"

namespace accforge {

using json = nlohmann::json;

struct LineIssue {
    size_t line_number = 0;  // 1-based
    std::string reason;
};

// One parsed record per non-blank line. In strict mode the first bad line
// throws; in lenient mode bad lines are collected into `issues` and the rest
// of the file is still parsed, so records.size() + issues.size() equals the
// non-blank line count.
struct JsonlFile {
    std::vector<json> records;
    std::vector<size_t> line_numbers;  // aligned with records
    std::vector<LineIssue> issues;
};

inline JsonlFile read_jsonl(const std::filesystem::path& path, bool lenient = false) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());

    JsonlFile out;
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            const std::string reason =
                path.filename().string() + ":" + std::to_string(line_number) +
                ": not a JSON object";
            if (!lenient) raise(ErrorCode::ParseError, reason);
            out.issues.push_back({line_number, reason});
            continue;
        }
        out.records.push_back(std::move(parsed));
        out.line_numbers.push_back(line_number);
    }
    return out;
}

// Pulls a required string field, reporting the offending line on failure.
inline std::string require_string(const json& record, const char* field,
                                  const std::filesystem::path& path, size_t line_number) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        raise(ErrorCode::MissingField,
              path.filename().string() + ":" + std::to_string(line_number) +
                  ": missing string field \"" + field + "\"");
    }
    return it->get<std::string>();
}

inline void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    for (const auto& record : records) {
        out << record.dump() << '\n';
    }
    if (!out) raise(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace accforge
