#include "txwin/rng.hpp"

#include <limits>

namespace txwin
{
    namespace
    {
        constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
        {
            x += 0x9E3779B97F4A7C15ULL;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
            return x ^ (x >> 31);
        }

        constexpr std::uint64_t fnv1a(std::string_view s) noexcept
        {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (unsigned char c : s)
            {
                h ^= c;
                h *= 0x100000001B3ULL;
            }
            return h;
        }
    } // namespace

    Seed derive_seed(Seed parent, std::string_view label, std::uint64_t index) noexcept
    {
        std::uint64_t h = splitmix64(parent);
        h = splitmix64(h ^ fnv1a(label));
        h = splitmix64(h ^ index);
        return h;
    }

    std::uint64_t uniform_below(Rng &rng, std::uint64_t bound)
    {
        // Rejection on the top of the range keeps the draw exactly uniform.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = rng();
        while (x >= limit)
        {
            x = rng();
        }
        return x % bound;
    }

    std::int64_t uniform_int(Rng &rng, std::int64_t lo, std::int64_t hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(uniform_below(rng, span));
    }

    bool bernoulli(Rng &rng, double p)
    {
        if (p <= 0.0)
        {
            return false;
        }
        if (p >= 1.0)
        {
            return true;
        }
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return u < p;
    }
} // namespace txwin
