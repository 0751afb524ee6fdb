#pragma once

#include <cstdint>
#include <random>

namespace cirdetect {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for stream `index` under `master`. Each stream depends only on the
// pair, so adding replications never perturbs earlier ones.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Seedable source of the variates the samplers need. Identical seeds and call
// sequences give identical outputs within one build.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    RandomSource split(std::uint64_t index) const { return RandomSource(derive_seed(seed_hint(), index)); }

    double uniform() { return uniform_(engine_); }

    double normal() { return normal_(engine_); }

    // Gamma with the given shape and unit scale.
    double gamma(double shape) {
        return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        using P = std::poisson_distribution<std::uint64_t>;
        return poisson_(engine_, P::param_type(mean));
    }

private:
    std::uint64_t seed_hint() const {
        // A copy of the engine is advanced so the split is a pure function of
        // the current state.
        std::mt19937_64 copy = engine_;
        return copy();
    }

    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::gamma_distribution<double> gamma_;
    std::poisson_distribution<std::uint64_t> poisson_;
};

}  // namespace cirdetect
