#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>

namespace fovcast {

inline constexpr double kPi = 3.14159265358979323846;

/** Malformed or inconsistent input data (files, records, adapters). */
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Numeric breakdown at runtime: non-finite values, degenerate means, failed training. */
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Bad command-line usage (unknown adapter, missing flag combinations). */
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ====================== deterministic random numbers ======================

/**
 * Small deterministic RNG used for weight init, shuffling and synthetic data.
 *
 * The uniform/normal mappings are implemented by hand (instead of
 * std::*_distribution) so that a given seed produces the same stream on every
 * standard library.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    /** Next raw 64-bit value (splitmix64). */
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /** Uniform in [0, 1). */
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /** Uniform in [lo, hi). */
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /** Standard normal via Box-Muller (one cached spare). */
    double normal();

    /** Uniform integer in [0, n). n must be > 0. */
    std::uint64_t index(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ====================== formatting helpers ======================

/** Shortest round-trippable decimal form of a double (%.17g). */
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/** FNV-1a 64-bit digest, used to fingerprint serialized artifacts. */
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// ====================== little-endian scalar IO ======================

inline void put_u32_le(std::string& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.append(b, 4);
}

inline void put_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.append(b, 8);
}

std::uint32_t get_u32_le(const std::string& in, std::size_t& pos);
double get_f64_le(const std::string& in, std::size_t& pos);

// ====================== file IO ======================

/** Whole file as bytes; throws DataError when unreadable. */
std::string read_file(const std::string& path);

/**
 * Write bytes via a temporary file in the same directory followed by a
 * rename, so readers never observe a half-written artifact.
 */
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace fovcast
