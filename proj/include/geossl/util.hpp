#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geossl {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Bad configuration or out-of-range argument; maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate geometry: singular matrix, point at infinity, collinear quad.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor dimensions do not match the operation's contract.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite loss encountered during training; maps to CLI exit code 3.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Stored data does not match its recorded content hash.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dataset archive missing and could not be retrieved.
struct FetchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failure (missing artifact, unwritable path, ...).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding and random numbers
// ---------------------------------------------------------------------------

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a base seed and a stream name.
/// Used to keep e.g. B1 sampling, B2 sampling and weight init on separate
/// streams so that enabling one subsystem never perturbs another.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream);

/// Deterministic generator with explicitly pinned draw algorithms.
/// std distributions are implementation-defined, so every draw here is
/// spelled out; the state round-trips through text for checkpointing.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (two draws per call, no cached spare).
    double normal();
    bool bernoulli(double p);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::string state() const;
    void set_state(const std::string& s);

  private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Hashing and file helpers
// ---------------------------------------------------------------------------

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view s);
std::string sha256_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames into place.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

std::string timestamp_utc();

}  // namespace geossl
