#include "scsl/rng.hpp"

#include <cmath>

namespace scsl {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t fold(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed + kGolden * (v + 1));
}
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RngHandle::RngHandle(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t RngHandle::next_u64() { return engine_(); }

double RngHandle::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngHandle::uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngHandle::uniform_below(std::uint64_t n) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t x = next_u64();
        if (x >= threshold) return x % n;
    }
}

bool RngHandle::bernoulli(double prob) { return uniform01() < prob; }

double RngHandle::normal(double mean, double sd) {
    double u1 = uniform_open01();
    double u2 = uniform_open01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    return mean + sd * z;
}

double RngHandle::gumbel() { return -std::log(-std::log(uniform_open01())); }

RngHandle RngHandle::child(std::uint64_t a) const { return RngHandle(fold(seed_, a)); }

RngHandle RngHandle::child(std::uint64_t a, std::uint64_t b) const {
    return RngHandle(fold(fold(seed_, a), b));
}

RngHandle RngHandle::child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return RngHandle(fold(fold(fold(seed_, a), b), c));
}

}  // namespace scsl
