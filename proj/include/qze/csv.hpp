// csv.hpp: plain numeric CSV tables with a mandatory header row.
//
// Numbers are written with "%.12g" so a rerun with the same inputs gives the
// same bytes. Files are written to "<name>.tmp" and renamed into place.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qze/errors.hpp"

namespace qze {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw Error(ErrorCode::IoError, "no column named " + name);
    }
    std::vector<double> values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& r : t.rows) {
        if (r.size() != t.columns.size()) throw Error(ErrorCode::IoError, "row width does not match header");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += format_number(r[i]);
        }
        out += '\n';
    }
    return out;
}

/// Writes text to path via a sibling temporary and an atomic rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
        f << text;
        f.flush();
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + " failed: " + ec.message());
}

inline void write_csv(const std::filesystem::path& path, const Table& t) { write_file_atomic(path, to_csv(t)); }

inline Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw Error(ErrorCode::IoError, "csv has no header row");
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) t.columns.push_back(cell);
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream r(line);
        std::string cell;
        while (std::getline(r, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw Error(ErrorCode::IoError, "bad number '" + cell + "' on line " + std::to_string(lineno));
            row.push_back(v);
        }
        if (row.size() != t.columns.size())
            throw Error(ErrorCode::IoError, "line " + std::to_string(lineno) + " has the wrong number of fields");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

} // namespace qze
