#include "txwin/decomposition.hpp"

#include "txwin/errors.hpp"

#include <algorithm>
#include <optional>

namespace txwin
{
    std::string to_string(const Density &d)
    {
        if (d.denominator() == 1)
        {
            return std::to_string(d.numerator());
        }
        return std::to_string(d.numerator()) + "/" + std::to_string(d.denominator());
    }

    std::vector<int> Decomposition::cuts() const
    {
        std::vector<int> out;
        for (std::size_t k = 0; k + 1 < parts.size(); ++k)
        {
            out.push_back(parts[k].last);
        }
        return out;
    }

    std::size_t subwindow_congestion(const WindowSpec &window, int first, int last)
    {
        if (first < 1 || first > last || last > window.columns())
        {
            throw InstanceError("column range [" + std::to_string(first) + ", " +
                                std::to_string(last) + "] outside 1.." +
                                std::to_string(window.columns()));
        }
        std::size_t best = 0;
        const ConflictGraph &g = window.conflicts();
        for (int i = 1; i <= window.threads(); ++i)
        {
            for (int j = first; j <= last; ++j)
            {
                const auto &nb = g.neighbors({i, j});
                const auto inside = std::count_if(nb.begin(), nb.end(), [&](TransactionId n) {
                    return n.index >= first && n.index <= last;
                });
                best = std::max(best, static_cast<std::size_t>(inside));
            }
        }
        return best;
    }

    Density subwindow_density(const WindowSpec &window, int first, int last)
    {
        const auto c = subwindow_congestion(window, first, last);
        return Density(static_cast<std::int64_t>(c), last - first + 1);
    }

    Decomposition make_decomposition(const WindowSpec &window, const std::vector<int> &cuts)
    {
        Decomposition d;
        int first = 1;
        auto close = [&](int last) {
            SubWindow part{first, last, subwindow_congestion(window, first, last), Density(0)};
            part.density = Density(static_cast<std::int64_t>(part.contention), part.width());
            d.max_density = d.parts.empty() ? part.density : std::max(d.max_density, part.density);
            d.parts.push_back(part);
            first = last + 1;
        };
        for (int c : cuts)
        {
            if (c < first || c >= window.columns())
            {
                throw InstanceError("cuts must be strictly increasing inside [1, N-1]");
            }
            close(c);
        }
        close(window.columns());
        return d;
    }

    Decomposition optimal_decomposition(const WindowSpec &window)
    {
        const int n = window.columns();

        // density[j][k] for 1 <= j <= k <= n.
        std::vector<std::vector<Density>> density(n + 1, std::vector<Density>(n + 1, Density(0)));
        for (int j = 1; j <= n; ++j)
        {
            for (int k = j; k <= n; ++k)
            {
                density[j][k] = subwindow_density(window, j, k);
            }
        }

        // best[k]: optimal max density of the prefix [1, k]; last_cut[k]: column
        // after which the prefix's final sub-window begins (0 = no cut).
        std::vector<Density> best(n + 1, Density(0));
        std::vector<int> last_cut(n + 1, 0);
        for (int k = 1; k <= n; ++k)
        {
            best[k] = density[1][k];
            last_cut[k] = 0;
            for (int j = 1; j < k; ++j)
            {
                const Density candidate = std::max(best[j], density[j + 1][k]);
                if (candidate < best[k])
                {
                    best[k] = candidate;
                    last_cut[k] = j;
                }
            }
        }

        std::vector<int> cuts;
        for (int k = n; last_cut[k] != 0; k = last_cut[k])
        {
            cuts.push_back(last_cut[k]);
        }
        std::reverse(cuts.begin(), cuts.end());
        Decomposition d = make_decomposition(window, cuts);
        if (d.max_density != best[n])
        {
            throw ContractViolation("optimal_decomposition: witness does not reach the optimum");
        }
        return d;
    }

    Decomposition brute_force_decomposition(const WindowSpec &window)
    {
        const int n = window.columns();
        if (n > kBruteForceMaxColumns)
        {
            throw RefusalError("brute_force_decomposition: N = " + std::to_string(n) +
                               " exceeds " + std::to_string(kBruteForceMaxColumns));
        }
        std::optional<Decomposition> best;
        const std::uint32_t masks = 1u << (n - 1);
        for (std::uint32_t mask = 0; mask < masks; ++mask)
        {
            std::vector<int> cuts;
            for (int c = 1; c < n; ++c)
            {
                if (mask & (1u << (c - 1)))
                {
                    cuts.push_back(c);
                }
            }
            Decomposition d = make_decomposition(window, cuts);
            if (!best || d.max_density < best->max_density)
            {
                best = std::move(d);
            }
        }
        return *best;
    }
} // namespace txwin
