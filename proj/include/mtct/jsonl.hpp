#pragma once

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "mtct/error.hpp"
#include "mtct/unicode.hpp"

namespace mtct::jsonl {

using ordered_json = nlohmann::ordered_json;

inline std::string dump_line(const ordered_json &j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

/// Calls fn(object, line_number) for every non-blank line.
inline void for_each(std::istream &in, const std::string &name,
                     const std::function<void(const ordered_json &, std::size_t)> &fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (unicode::trim(line).empty())
            continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception &e) {
            throw MalformedRow(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw MalformedRow(name + ":" + std::to_string(lineno) + ": expected a JSON object");
        try {
            fn(j, lineno);
        } catch (const nlohmann::json::exception &e) {
            throw MalformedRow(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void for_each_file(const std::string &path, const std::function<void(const ordered_json &, std::size_t)> &fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile(path);
    for_each(in, path, fn);
}

inline ordered_json read_json_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile(path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw MalformedRow(path + ": " + e.what());
    }
}

} // namespace mtct::jsonl
