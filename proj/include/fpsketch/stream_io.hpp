#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fpsketch/errors.hpp"

namespace fpsketch {

/// Text stream format: one "i v" pair per line (decimal), '#' starts a
/// comment, blank lines ignored.
inline std::vector<std::pair<uint64_t, double>> parse_stream(std::istream& in) {
    std::vector<std::pair<uint64_t, double>> updates;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::istringstream ls(line);
        uint64_t i;
        double v;
        if (!(ls >> i >> v)) {
            throw ParseError("malformed stream line (expected 'index value')", lineno);
        }
        std::string rest;
        if (ls >> rest) {
            throw ParseError("trailing content on stream line", lineno);
        }
        updates.emplace_back(i, v);
    }
    return updates;
}

inline std::vector<std::pair<uint64_t, double>> read_stream_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stream file: " + path);
    return parse_stream(in);
}

inline void write_stream_file(const std::string& path,
                              const std::vector<std::pair<uint64_t, double>>& updates) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open stream file for writing: " + path);
    out.precision(17);
    for (const auto& [i, v] : updates) out << i << ' ' << v << '\n';
}

inline void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw Error("cannot open file: " + path);
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    return bytes;
}

}  // namespace fpsketch
