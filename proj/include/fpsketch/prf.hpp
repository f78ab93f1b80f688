#pragma once

#include <cstdint>

namespace fpsketch {

// SplitMix64 finalizer. Counter-mode use: feed (seed + golden * ctr).
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)) ^ mix64(b));
}

// Stateless PRF: value of counter `ctr` in the stream keyed by `seed`.
inline uint64_t prf64(uint64_t seed, uint64_t ctr) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * ctr);
}

// Unbiased map of a 64-bit word onto [0, range) (Lemire reduction).
inline uint64_t reduce_range(uint64_t word, uint64_t range) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(word) * range) >> 64);
}

// Role tags for deriving independent sub-seeds from one master seed.
enum class SeedRole : uint64_t {
    F2Bucket = 1,
    F2Sign = 2,
    GhssHHBucket = 3,
    GhssHHSign = 4,
    GhssAEBucket = 5,
    GhssAERoot = 6,
    ShelfHHBucket = 7,
    ShelfHHSign = 8,
    ShelfAEBucket = 9,
    ShelfAERoot = 10,
    Subsample = 11,
    Coin = 12,
    Recovery = 13,
    RecoveryFingerprint = 14,
};

inline uint64_t derive_seed(uint64_t master, SeedRole role, uint64_t a = 0, uint64_t b = 0) {
    return mix64(mix64(master, static_cast<uint64_t>(role)), mix64(a, b));
}

}  // namespace fpsketch
