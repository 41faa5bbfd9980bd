#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace txwin
{
    using Seed = std::uint64_t;

    // Derives an independent child seed from (parent, label, index). Labels keep
    // the streams of different consumers (offsets, pi1 draws, generators) apart.
    Seed derive_seed(Seed parent, std::string_view label, std::uint64_t index = 0) noexcept;

    // mt19937_64's output sequence is fixed by the standard; the distributions in
    // <random> are not, so bounded draws go through uniform_below instead.
    using Rng = std::mt19937_64;

    inline Rng make_rng(Seed parent, std::string_view label, std::uint64_t index = 0)
    {
        return Rng{derive_seed(parent, label, index)};
    }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(Rng &rng, std::uint64_t bound);

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(Rng &rng, std::int64_t lo, std::int64_t hi);

    // Bernoulli(p) with 53-bit resolution; p <= 0 never fires, p >= 1 always does.
    bool bernoulli(Rng &rng, double p);
} // namespace txwin
