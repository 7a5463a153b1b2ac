#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmsense/errors.hpp"

namespace swarmsense {

// Minimal CSV support for the frozen export schemas: UTF-8, LF line
// endings, no quoting (no field in any schema contains a comma).

class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw InvalidInput("cannot open for writing: " + path.string());
    }

    void header(const std::string& line) { out_ << line << "\n"; }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write_field(fields)), ...);
        out_ << "\n";
    }

  private:
    // Shortest representation that round-trips exactly, so offline
    // recomputation from exported tensors reproduces logged values
    // bit for bit.
    void write_field(double v) {
        char buf[40];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out_.write(buf, p - buf);
        (void)ec;
    }
    void write_field(const std::string& v) { out_ << v; }
    void write_field(const char* v) { out_ << v; }
    template <class T>
    void write_field(T v) { out_ << v; }

    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Lines starting with '#' carry provenance (the config hash) and are
// not data.
inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path.string());
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        t.header = split_csv_line(line);
        break;
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

inline std::string read_csv_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("#config_hash=", 0) == 0) return line.substr(13);
        if (!line.empty() && line[0] != '#') break;
    }
    return {};
}

inline long parse_long(const std::string& s, std::size_t line_no, const char* what) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, std::size_t line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    }
}

}  // namespace swarmsense
