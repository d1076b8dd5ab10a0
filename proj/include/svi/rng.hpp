#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace svi {

/// Deterministic pseudo-random stream.
///
/// Generator: xoshiro256** (Blackman & Vigna), state seeded by SplitMix64
/// from a 64-bit stream key. The root key is SplitMix64(seed); a child key is
/// derived from the parent's key and the FNV-1a hash of the split label, never
/// from the parent's current position, so children depend only on
/// (seed, label path) and not on how many values the parent has produced.
///
/// Streams are single-owner values. Copying one duplicates its position.
class RngStream {
public:
    static RngStream root(std::uint64_t seed);

    /// Child stream keyed by `label`. Throws InvalidLabel on an empty label.
    RngStream split(std::string_view label) const;

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (lo, hi). Throws InvalidRange if lo >= hi.
    double uniform(double lo, double hi);

    /// Normal(mean, sd) by Box-Muller (one variate per two uniforms).
    /// Throws InvalidRange if sd < 0; sd == 0 returns mean exactly.
    double normal(double mean, double sd);

    const std::string& label() const noexcept { return label_; }
    std::uint64_t key() const noexcept { return key_; }

private:
    RngStream(std::uint64_t key, std::string label);

    double unit_open() noexcept;

    std::uint64_t key_;
    std::string label_;
    std::array<std::uint64_t, 4> s_{};
};

// Free-function spellings used throughout the experiments code.
inline RngStream new_root(std::uint64_t seed) { return RngStream::root(seed); }
inline RngStream split(const RngStream& parent, std::string_view label) { return parent.split(label); }
inline double draw_uniform(RngStream& s, double lo, double hi) { return s.uniform(lo, hi); }
inline double draw_normal(RngStream& s, double mean, double sd) { return s.normal(mean, sd); }

}  // namespace svi
