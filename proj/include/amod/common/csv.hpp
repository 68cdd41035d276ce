#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "amod/common/error.hpp"

namespace amod {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(LoadErrc::parse, "cannot open file: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw LoadError(LoadErrc::parse,
                                path + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw LoadError(LoadErrc::parse, path + ": empty file");
    return t;
}

inline double csv_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw LoadError(LoadErrc::parse, context + ": not a number: '" + s + "'");
    }
}

inline long csv_long(const std::string& s, const std::string& context) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw LoadError(LoadErrc::parse, context + ": not an integer: '" + s + "'");
    return v;
}

// Fixed-precision float formatting; every emitted file goes through here so a
// rerun with the same inputs is byte-identical.
inline std::string fmt_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Write-then-rename so concurrent sweep runs never observe partial files.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw RuntimeError("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

}  // namespace amod
