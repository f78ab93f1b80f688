#pragma once

#include <stdexcept>
#include <string>

namespace fpsketch {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameters or incompatible structures (merge mismatch, bad config).
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Last-level sparse recovery could not certify an exact result.
struct RecoveryError : Error {
    explicit RecoveryError(const std::string& what) : Error(what) {}
};

// Malformed stream/sketch file. Carries a 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& what, long line = -1) : Error(what), line_number(line) {}
    long line_number;
};

// An AvgEst estimate was requested with no collision-free rows.
struct NoFreeRowError : Error {
    explicit NoFreeRowError(const std::string& what) : Error(what) {}
};

}  // namespace fpsketch
