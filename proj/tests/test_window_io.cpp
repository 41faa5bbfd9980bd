#include "support.hpp"

#include "txwin/errors.hpp"
#include "txwin/window_io.hpp"

#include <doctest.h>

#include <sstream>

using namespace txwin;
using txwin::test::T;

namespace
{
    WindowSpec parse(const std::string &text)
    {
        std::istringstream in(text);
        return read_window(in);
    }

    WindowSpec round_trip(const WindowSpec &w)
    {
        std::ostringstream out;
        write_window(out, w);
        return parse(out.str());
    }
} // namespace

TEST_CASE("edge file")
{
    const auto w = parse("# two threads\nwindow 2 2\n\nedge 1 1 2 1\nedge 2 2 1 2  # trailing\n");
    CHECK(w.threads() == 2);
    CHECK(w.columns() == 2);
    CHECK(w.conflicts().adjacent(T(1, 1), T(2, 1)));
    CHECK(w.conflicts().adjacent(T(1, 2), T(2, 2)));
    CHECK_FALSE(w.accesses().has_value());
}

TEST_CASE("access file")
{
    const auto w = parse("window 2 1\nobjects 3\naccess 1 1 R:1,2 W:3\naccess 2 1 W:2\n");
    REQUIRE(w.accesses().has_value());
    CHECK(w.object_count() == 3);
    CHECK(w.conflicts().adjacent(T(1, 1), T(2, 1)));
}

TEST_CASE("malformed files name the line")
{
    CHECK_THROWS_WITH_AS(parse("window 2 2\nedge 1 1 1 1\n"), doctest::Contains("line 2"),
                         InstanceError);
    CHECK_THROWS_AS(parse("window 2 2\nedge 1 1 2 1\naccess 1 1 W:1\n"), InstanceError);
    CHECK_THROWS_AS(parse("edge 1 1 2 1\n"), InstanceError);
    CHECK_THROWS_AS(parse("window 2 2\nedge 1 1 3 1\n"), InstanceError);
    CHECK_THROWS_AS(parse("window 2 2\nbogus\n"), InstanceError);
    CHECK_THROWS_AS(parse("window 1 1\nobjects 1\naccess 1 1 W:2\n"), InstanceError);
}

TEST_CASE("property: store then load reproduces the window")
{
    for (Seed seed = 1; seed <= 45; ++seed)
    {
        const auto w = txwin::test::mixed_window(1 + seed % 5, 1 + seed % 4, seed);
        CHECK(round_trip(w) == w);
    }
    CHECK(round_trip(txwin::test::conflict_free(3, 2)) == txwin::test::conflict_free(3, 2));
}
