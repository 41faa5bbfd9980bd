#include "txwin/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace txwin
{
    double window_log(int threads, int columns)
    {
        return std::log(static_cast<double>(threads) * static_cast<double>(columns));
    }

    double offline_frame_real(int threads, int columns)
    {
        constexpr double e = std::numbers::e;
        return 1.0 + (e * e + 2.0) * window_log(threads, columns);
    }

    double online_frame_real(int threads, int columns)
    {
        return 16.0 * std::numbers::e * offline_frame_real(threads, columns) *
               window_log(threads, columns);
    }

    Step offline_frame_length(int threads, int columns)
    {
        return std::max<Step>(1, static_cast<Step>(std::ceil(offline_frame_real(threads, columns))));
    }

    Step online_frame_length(int threads, int columns)
    {
        return std::max<Step>(1, static_cast<Step>(std::ceil(online_frame_real(threads, columns))));
    }

    int offset_slots(std::size_t contention, int threads, int columns)
    {
        const double ln = window_log(threads, columns);
        if (contention == 0 || ln <= 0.0)
        {
            return 1;
        }
        return std::max(1, static_cast<int>(std::ceil(static_cast<double>(contention) / ln)));
    }

    std::vector<int> draw_offsets(int threads, int alpha, Seed seed)
    {
        std::vector<int> offsets(static_cast<std::size_t>(threads), 0);
        for (int i = 1; i <= threads; ++i)
        {
            Rng rng = make_rng(seed, "frame-offset", static_cast<std::uint64_t>(i));
            offsets[i - 1] = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(alpha)));
        }
        return offsets;
    }

    Priority priority_at(Step t, int frame_index, Step phi)
    {
        return t < static_cast<Step>(frame_index) * phi ? Priority::Low : Priority::High;
    }
} // namespace txwin
