#include "support.hpp"

#include "txwin/adaptive.hpp"
#include "txwin/metrics.hpp"

#include <doctest.h>

#include <algorithm>

using namespace txwin;
using txwin::test::T;

TEST_CASE("conflict-free window never doubles")
{
    const auto w = txwin::test::conflict_free(6, 5);
    AdaptiveGreedy p;
    const auto tr = run(w, p, 4);
    CHECK(makespan(tr) == 5);
    for (const auto &s : p.threads())
    {
        CHECK(s.estimate == 1);
        CHECK(s.doublings == 0);
    }
}

TEST_CASE("bad event detection")
{
    const FrameWindow f{10, 5}; // steps 10..14
    CHECK_FALSE(detect_bad_event(15, f, Step{14}));
    CHECK(detect_bad_event(15, f, std::nullopt));
    CHECK(detect_bad_event(16, f, std::nullopt));
    CHECK_FALSE(detect_bad_event(14, f, std::nullopt));
    CHECK_FALSE(detect_bad_event(3, f, std::nullopt));
}

TEST_CASE("larger estimate wins regardless of pi1")
{
    const PriorityVector big{4, Priority::High, 5};
    const PriorityVector small{1, Priority::High, 1};
    CHECK(resolve_conflict(T(1, 1), big, T(2, 1), small).victim == T(2, 1));
    CHECK(resolve_conflict(T(2, 1), small, T(1, 1), big).victim == T(2, 1));

    const PriorityVector low_big{4, Priority::Low, 5};
    CHECK(resolve_conflict(T(1, 1), low_big, T(2, 1), small).victim == T(2, 1));

    // Equal estimates fall through to the online rule.
    const PriorityVector a{2, Priority::High, 3};
    const PriorityVector b{2, Priority::High, 3};
    CHECK(resolve_conflict(T(1, 1), a, T(2, 1), b).victim == T(1, 1));
}

TEST_CASE("short frames force doublings")
{
    std::size_t total = 0;
    for (Seed seed = 1; seed <= 30; ++seed)
    {
        const auto w = generate_window(8, 6, DegreeCapped{7, 0.5}, seed);
        AdaptiveGreedy p(AdaptiveOptions{1});
        const auto tr = run(w, p, seed);
        CHECK(verify_trace(w, tr).empty());
        CHECK(tr.complete());

        std::vector<std::size_t> estimate(static_cast<std::size_t>(w.threads()) + 1, 1);
        std::vector<int> doublings(estimate.size(), 0);
        for (const auto &e : tr.events)
        {
            if (e.kind == EventKind::Double)
            {
                REQUIRE(e.value.has_value());
                REQUIRE(e.previous.has_value());
                const auto i = static_cast<std::size_t>(e.tx.thread);
                CHECK(static_cast<std::size_t>(*e.previous) == estimate[i]);
                CHECK(*e.value > *e.previous);
                CHECK(static_cast<std::size_t>(*e.value) ==
                      std::min<std::size_t>(2 * estimate[i], p.estimate_cap()));
                estimate[i] = static_cast<std::size_t>(*e.value);
                ++doublings[i];
                ++total;
            }
            else if (e.kind == EventKind::Abort && e.other && e.other->thread != e.tx.thread)
            {
                const auto v = static_cast<std::size_t>(e.tx.thread);
                const auto wi = static_cast<std::size_t>(e.other->thread);
                if (estimate[v] != estimate[wi])
                {
                    CHECK(estimate[v] < estimate[wi]);
                }
            }
        }
        for (int i = 1; i <= w.threads(); ++i)
        {
            const auto &s = p.threads()[i - 1];
            CHECK(s.estimate == estimate[i]);
            CHECK(s.doublings == doublings[i]);
            CHECK(s.estimate == std::min<std::size_t>(std::size_t{1} << s.doublings, p.estimate_cap()));
        }
        const RunStats stats = run_stats(tr);
        CHECK(stats.doublings.size() == static_cast<std::size_t>(w.threads()));
    }
    CHECK(total > 0);
}

TEST_CASE("estimates stop at the cap")
{
    const auto w = txwin::test::complete(3, 3);
    AdaptiveGreedy p(AdaptiveOptions{1});
    const auto tr = run(w, p, 2);
    CHECK(tr.complete());
    CHECK(p.estimate_cap() == 8);
    for (const auto &s : p.threads())
    {
        CHECK(s.estimate <= 8);
    }
}

TEST_CASE("offsets stay inside the current slot range")
{
    const auto w = txwin::test::complete(2, 2);
    AdaptiveGreedy p(AdaptiveOptions{1});
    const auto tr = run(w, p, 7);
    for (const auto &s : p.threads())
    {
        CHECK(s.offset >= 0);
        CHECK(s.offset < s.alpha);
        CHECK(s.origin <= makespan(tr));
    }
}
