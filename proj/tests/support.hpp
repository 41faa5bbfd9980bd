#pragma once

#include "txwin/core_model.hpp"

#include <algorithm>
#include <vector>

namespace txwin::test
{
    inline TransactionId T(int i, int j) { return {i, j}; }

    inline WindowSpec conflict_free(int m, int n) { return WindowSpec::from_edges(m, n, {}); }

    // Every pair of transactions conflicts.
    inline WindowSpec complete(int m, int n)
    {
        std::vector<Edge> edges;
        const WindowSpec w = conflict_free(m, n);
        const auto ids = w.all_ids();
        for (std::size_t a = 0; a < ids.size(); ++a)
        {
            for (std::size_t b = a + 1; b < ids.size(); ++b)
            {
                edges.emplace_back(ids[a], ids[b]);
            }
        }
        return WindowSpec::from_edges(m, n, edges);
    }

    // Mixed workload family used by the property tests.
    inline WindowSpec mixed_window(int m, int n, Seed seed)
    {
        switch (seed % 3)
        {
        case 0:
            return generate_window(m, n, DegreeCapped{std::min(static_cast<int>(seed % 7), m * n - 1), 0.3},
                                   seed);
        case 1:
            return generate_window(m, n, ObjectUniform{6, 0.3, 0.15}, seed);
        default:
            return generate_window(m, n, ColumnClustered{0.4, 0.05}, seed);
        }
    }
} // namespace txwin::test
