#include "txwin/offline.hpp"

#include "txwin/errors.hpp"

#include <algorithm>
#include <set>

namespace txwin
{
    FrameParams frame_params(int threads, int columns, std::size_t contention, Seed seed)
    {
        FrameParams p;
        p.phi = offline_frame_length(threads, columns);
        p.alpha = offset_slots(contention, threads, columns);
        p.offsets = draw_offsets(threads, p.alpha, seed);
        return p;
    }

    std::vector<TransactionId> greedy_mis(const ConflictGraph &graph,
                                          std::span<const TransactionId> order)
    {
        const std::set<TransactionId> listed(order.begin(), order.end());
        if (listed.size() != order.size() || order.size() != graph.node_count() ||
            !std::all_of(listed.begin(), listed.end(),
                         [&](TransactionId id) { return graph.contains(id); }))
        {
            throw InstanceError("greedy_mis: order must list every node once");
        }
        std::set<TransactionId> chosen;
        for (TransactionId id : order)
        {
            const auto &nb = graph.neighbors(id);
            const bool blocked =
                std::any_of(nb.begin(), nb.end(), [&](TransactionId n) { return chosen.contains(n); });
            if (!blocked)
            {
                chosen.insert(id);
            }
        }
        return {chosen.begin(), chosen.end()};
    }

    std::vector<TransactionId> greedy_mis(const ConflictGraph &graph)
    {
        return greedy_mis(graph, graph.nodes());
    }

    std::vector<TransactionId> commit_set(const ConflictGraph &active,
                                          const std::map<TransactionId, Priority> &priorities,
                                          std::span<const TransactionId> order)
    {
        auto level = [&](TransactionId id) {
            auto it = priorities.find(id);
            if (it == priorities.end())
            {
                throw InstanceError("commit_set: no priority for " + to_string(id));
            }
            return it->second;
        };

        std::vector<TransactionId> high;
        std::vector<TransactionId> high_order;
        for (TransactionId id : active.nodes())
        {
            if (level(id) == Priority::High)
            {
                high.push_back(id);
            }
        }
        for (TransactionId id : order)
        {
            if (level(id) == Priority::High)
            {
                high_order.push_back(id);
            }
        }
        const auto i_high = greedy_mis(restrict(active, high), high_order);

        // Low nodes adjacent to I_H are out (Q); the rest compete among themselves.
        std::vector<TransactionId> low;
        std::vector<TransactionId> low_order;
        auto eligible = [&](TransactionId id) {
            if (level(id) != Priority::Low)
            {
                return false;
            }
            const auto &nb = active.neighbors(id);
            return std::none_of(nb.begin(), nb.end(), [&](TransactionId n) {
                return std::binary_search(i_high.begin(), i_high.end(), n);
            });
        };
        for (TransactionId id : active.nodes())
        {
            if (eligible(id))
            {
                low.push_back(id);
            }
        }
        for (TransactionId id : order)
        {
            if (eligible(id))
            {
                low_order.push_back(id);
            }
        }
        const auto i_low = greedy_mis(restrict(active, low), low_order);

        std::vector<TransactionId> out;
        std::merge(i_high.begin(), i_high.end(), i_low.begin(), i_low.end(), std::back_inserter(out));
        return out;
    }

    // ---------------------------------------------------------------------------

    OfflineGreedy::OfflineGreedy(std::size_t contention, MisOrder order)
        : contention_(contention), order_(order)
    {
    }

    void OfflineGreedy::start(const WindowSpec &window, Seed seed)
    {
        columns_ = window.columns();
        params_ = frame_params(window.threads(), window.columns(), contention_, seed);
        order_rng_ = make_rng(seed, "mis-order");
    }

    Priority OfflineGreedy::priority(TransactionId id, Step t) const
    {
        return priority_at(t, params_.frame_index(id), params_.phi);
    }

    std::optional<Step> OfflineGreedy::frame_end(TransactionId id) const
    {
        return params_.frame_end(id);
    }

    StepDecision OfflineGreedy::arbitrate(Step t, std::span<const TransactionId> active,
                                          const ConflictInfo &info, EngineView &)
    {
        if (!info.graph)
        {
            throw ContractViolation("offline policy requires the induced conflict graph");
        }
        const ConflictGraph &g = *info.graph;

        std::map<TransactionId, Priority> prio;
        for (TransactionId id : active)
        {
            prio.emplace(id, priority(id, t));
        }

        std::vector<TransactionId> order(active.begin(), active.end());
        if (order_ == MisOrder::Random)
        {
            for (std::size_t k = order.size(); k > 1; --k)
            {
                std::swap(order[k - 1], order[uniform_below(order_rng_, k)]);
            }
        }

        StepDecision d;
        d.commits = commit_set(g, prio, order);
        for (TransactionId id : active)
        {
            if (std::binary_search(d.commits.begin(), d.commits.end(), id))
            {
                continue;
            }
            // Maximality guarantees a committing neighbor; prefer a high-priority one.
            std::optional<TransactionId> winner;
            for (TransactionId n : g.neighbors(id))
            {
                if (!std::binary_search(d.commits.begin(), d.commits.end(), n))
                {
                    continue;
                }
                if (!winner || (prio.at(n) == Priority::High && prio.at(*winner) == Priority::Low))
                {
                    winner = n;
                }
            }
            if (!winner)
            {
                throw ContractViolation("offline: " + to_string(id) +
                                        " lost without a committing neighbor");
            }
            d.aborts.push_back({id, *winner, false});
        }
        return d;
    }
} // namespace txwin
