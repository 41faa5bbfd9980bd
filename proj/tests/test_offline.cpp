#include "support.hpp"

#include "txwin/metrics.hpp"
#include "txwin/offline.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace txwin;
using txwin::test::T;

namespace
{
    ConflictGraph graph_of(std::vector<TransactionId> nodes, const std::vector<Edge> &edges)
    {
        ConflictGraph g(std::move(nodes));
        for (const auto &[a, b] : edges)
        {
            g.add_edge(a, b);
        }
        return g;
    }

    bool independent(const ConflictGraph &g, const std::vector<TransactionId> &set)
    {
        for (std::size_t a = 0; a < set.size(); ++a)
        {
            for (std::size_t b = a + 1; b < set.size(); ++b)
            {
                if (g.adjacent(set[a], set[b]))
                {
                    return false;
                }
            }
        }
        return true;
    }
} // namespace

TEST_CASE("frame parameters of a single transaction")
{
    const auto p = frame_params(1, 1, 0, 5);
    CHECK(p.phi == 1);
    CHECK(p.alpha == 1);
    CHECK(p.offsets == std::vector<int>{0});
    CHECK(p.frame_index(T(1, 1)) == 0);
}

TEST_CASE("frame parameters of a 4x4 window with C = 10")
{
    const auto p = frame_params(4, 4, 10, 5);
    CHECK(p.phi == 28);
    CHECK(p.alpha == 4);
    REQUIRE(p.offsets.size() == 4);
    for (int r : p.offsets)
    {
        CHECK(r >= 0);
        CHECK(r <= 3);
    }
    CHECK(p.frame_index(T(2, 3)) == p.offsets[1] + 2);
}

TEST_CASE("no contention means no randomization")
{
    for (Seed seed : {1u, 2u, 3u})
    {
        const auto p = frame_params(6, 5, 0, seed);
        CHECK(p.alpha == 1);
        CHECK(std::all_of(p.offsets.begin(), p.offsets.end(), [](int r) { return r == 0; }));
        CHECK(p.frame_index(T(4, 5)) == 4);
    }
}

TEST_CASE("offsets cover the whole slot range")
{
    std::set<int> seen;
    for (Seed seed = 1; seed <= 50; ++seed)
    {
        for (int r : frame_params(8, 8, 40, seed).offsets)
        {
            seen.insert(r);
        }
    }
    // alpha = ceil(40 / ln 64) = 10
    CHECK(seen == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("priority boundary")
{
    CHECK(priority_at(0, 0, 28) == Priority::High);
    CHECK(priority_at(27, 1, 28) == Priority::Low);
    CHECK(priority_at(28, 1, 28) == Priority::High);
    for (Step t : {0, 1, 100, 100000})
    {
        CHECK(priority_at(t, 0, 7) == Priority::High);
    }
}

TEST_CASE("greedy MIS examples")
{
    const auto a = T(1, 1), b = T(2, 1), c = T(3, 1);
    CHECK(greedy_mis(graph_of({a, b, c}, {})) == std::vector<TransactionId>{a, b, c});
    CHECK(greedy_mis(graph_of({a, b, c}, {{a, b}, {b, c}})) == std::vector<TransactionId>{a, c});

    const auto triangle = graph_of({a, b, c}, {{a, b}, {b, c}, {a, c}});
    std::vector<TransactionId> order{a, b, c};
    do
    {
        CHECK(greedy_mis(triangle, order).size() == 1);
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("commit set examples")
{
    const auto a = T(1, 1), b = T(2, 1), c = T(3, 1);
    {
        const auto g = graph_of({a, b, c}, {});
        const std::vector<TransactionId> order{a, b, c};
        CHECK(commit_set(g, {{a, Priority::Low}, {b, Priority::Low}, {c, Priority::Low}}, order) ==
              order);
    }
    {
        const auto g = graph_of({a, b}, {{a, b}});
        const std::vector<TransactionId> order{a, b};
        CHECK(commit_set(g, {{a, Priority::High}, {b, Priority::Low}}, order) ==
              std::vector<TransactionId>{a});
        // The low transaction loses even when it comes first in the scan.
        const std::vector<TransactionId> reversed{b, a};
        CHECK(commit_set(g, {{a, Priority::High}, {b, Priority::Low}}, reversed) ==
              std::vector<TransactionId>{a});
    }
    {
        const auto g = graph_of({a, b, c}, {{a, b}, {a, c}});
        const std::vector<TransactionId> order{a, b, c};
        CHECK(commit_set(g, {{a, Priority::High}, {b, Priority::High}, {c, Priority::Low}}, order) ==
              std::vector<TransactionId>{a});
    }
}

TEST_CASE("property: commit sets are independent and maximal under the priority rule")
{
    for (Seed seed = 1; seed <= 80; ++seed)
    {
        const auto w = txwin::test::mixed_window(5, 4, seed);
        const auto &g = w.conflicts();
        Rng rng = make_rng(seed, "test-priorities");
        std::map<TransactionId, Priority> prio;
        for (TransactionId id : w.all_ids())
        {
            prio[id] = bernoulli(rng, 0.5) ? Priority::High : Priority::Low;
        }
        const auto ids = w.all_ids();
        const auto chosen = commit_set(g, prio, ids);
        CHECK(independent(g, chosen));

        for (TransactionId id : ids)
        {
            if (std::binary_search(chosen.begin(), chosen.end(), id))
            {
                continue;
            }
            bool blocked = false;
            for (TransactionId n : g.neighbors(id))
            {
                blocked = blocked || std::binary_search(chosen.begin(), chosen.end(), n);
            }
            CHECK(blocked);
            if (prio[id] == Priority::High)
            {
                bool high_neighbor = false;
                for (TransactionId n : g.neighbors(id))
                {
                    high_neighbor = high_neighbor ||
                                    (prio[n] == Priority::High &&
                                     std::binary_search(chosen.begin(), chosen.end(), n));
                }
                CHECK(high_neighbor);
            }
        }
        for (TransactionId h : chosen)
        {
            if (prio[h] != Priority::High)
            {
                continue;
            }
            for (TransactionId n : g.neighbors(h))
            {
                CHECK_FALSE(std::binary_search(chosen.begin(), chosen.end(), n));
            }
        }
    }
}

TEST_CASE("property: high never loses to low in a run")
{
    for (Seed seed = 1; seed <= 40; ++seed)
    {
        const auto w = generate_window(6, 5, DegreeCapped{6, 0.4}, seed);
        for (MisOrder order : {MisOrder::Lexicographic, MisOrder::Random})
        {
            OfflineGreedy p(w.congestion(), order);
            const auto tr = run(w, p, seed);
            CHECK(verify_trace(w, tr).empty());
            for (const auto &e : tr.events)
            {
                if (e.kind == EventKind::Abort && p.priority(e.tx, e.step) == Priority::High)
                {
                    CHECK(p.priority(*e.other, e.step) == Priority::High);
                }
            }
        }
    }
}

TEST_CASE("random MIS order is seeded")
{
    const auto w = generate_window(6, 6, DegreeCapped{5, 0.5}, 3);
    OfflineGreedy a(w.congestion(), MisOrder::Random), b(w.congestion(), MisOrder::Random);
    CHECK(run(w, a, 9) == run(w, b, 9));
}
