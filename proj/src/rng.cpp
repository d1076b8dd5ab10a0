#include "svi/rng.hpp"

#include <cmath>
#include <numbers>

#include "svi/error.hpp"

namespace svi {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidLabel: return "InvalidLabel";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidDimension: return "InvalidDimension";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::MeanUnavailable: return "MeanUnavailable";
        case ErrorCode::InvalidStep: return "InvalidStep";
        case ErrorCode::LineSearchStalled: return "LineSearchStalled";
        case ErrorCode::DegenerateMixing: return "DegenerateMixing";
        case ErrorCode::TooLargeForEnumeration: return "TooLargeForEnumeration";
        case ErrorCode::InvalidCovariance: return "InvalidCovariance";
        case ErrorCode::WindowOverrun: return "WindowOverrun";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::DataError: return "DataError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) noexcept { return splitmix64(x); }

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t key, std::string label) : key_(key), label_(std::move(label)) {
    std::uint64_t sm = key_;
    for (auto& w : s_) w = splitmix64(sm);
}

RngStream RngStream::root(std::uint64_t seed) { return RngStream(mix(seed), ""); }

RngStream RngStream::split(std::string_view label) const {
    if (label.empty()) throw Error(ErrorCode::InvalidLabel, "split label must be nonempty");
    // Two rounds so that (key, label) pairs with equal XOR do not collide.
    const std::uint64_t child = mix(mix(key_) ^ mix(fnv1a64(label) + 0x632be59bd9b4e019ULL));
    std::string path = label_.empty() ? std::string(label) : label_ + "/" + std::string(label);
    return RngStream(child, std::move(path));
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::unit_open() noexcept {
    // 53 random mantissa bits, offset by half an ulp: never 0, never 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    if (!(lo < hi)) throw Error(ErrorCode::InvalidRange, "uniform requires lo < hi");
    for (;;) {
        const double v = lo + (hi - lo) * unit_open();
        if (v > lo && v < hi) return v;
    }
}

double RngStream::normal(double mean, double sd) {
    if (!(sd >= 0.0)) throw Error(ErrorCode::InvalidRange, "normal requires sd >= 0");
    const double u1 = unit_open();
    const double u2 = unit_open();
    if (sd == 0.0) return mean;
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace svi
