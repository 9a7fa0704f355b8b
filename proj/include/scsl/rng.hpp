#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace scsl {

// Seedable stream with explicit child-stream derivation. Child streams are
// keyed by integer tags so that work scheduled across threads draws from
// streams that do not depend on scheduling order. All distribution transforms
// are implemented here (not via std distributions, whose output is not
// pinned down by the standard), so equal seeds give equal draws everywhere.
class RngHandle {
public:
    static constexpr const char* kFamily = "mt19937_64+splitmix64";

    explicit RngHandle(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // [0, 1), 53-bit resolution.
    double uniform01();

    // (0, 1), safe for log transforms.
    double uniform_open01();

    // Unbiased draw from {0, ..., n-1}; n must be nonzero.
    std::uint64_t uniform_below(std::uint64_t n);

    bool bernoulli(double prob);

    // Box-Muller, one value per call, two uniform draws consumed.
    double normal(double mean = 0.0, double sd = 1.0);

    // -log(-log(U)) with U in (0, 1).
    double gumbel();

    // Fisher-Yates, descending.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derived streams; distinct tag tuples give independent streams.
    RngHandle child(std::uint64_t a) const;
    RngHandle child(std::uint64_t a, std::uint64_t b) const;
    RngHandle child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used for seed mixing.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace scsl
