#pragma once

#include "txwin/core_model.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace txwin
{
    // Congestion per column, exact.
    using Density = boost::rational<std::int64_t>;

    std::string to_string(const Density &d);

    // Contiguous column range [first, last] of the window, 1-based inclusive.
    struct SubWindow
    {
        int first = 1;
        int last = 1;
        std::size_t contention = 0;
        Density density{0};

        int width() const noexcept { return last - first + 1; }
        bool operator==(const SubWindow &) const = default;
    };

    struct Decomposition
    {
        std::vector<SubWindow> parts; // left to right, covering [1, N]
        Density max_density{0};

        // Columns c after which a new sub-window begins, strictly increasing.
        std::vector<int> cuts() const;
        bool operator==(const Decomposition &) const = default;
    };

    // Congestion of the subgraph induced by columns [first, last], divided by the
    // width. Throws InstanceError for an invalid range.
    Density subwindow_density(const WindowSpec &window, int first, int last);
    std::size_t subwindow_congestion(const WindowSpec &window, int first, int last);

    // Builds the decomposition given by the cut columns and scores it.
    Decomposition make_decomposition(const WindowSpec &window, const std::vector<int> &cuts);

    // Minimizes the maximum sub-window density over all contiguous decompositions
    // with an O(N^2) prefix recurrence.
    Decomposition optimal_decomposition(const WindowSpec &window);

    // Exhaustive search over all 2^(N-1) decompositions; refuses N > 16.
    Decomposition brute_force_decomposition(const WindowSpec &window);

    inline constexpr int kBruteForceMaxColumns = 16;
} // namespace txwin
