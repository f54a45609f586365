#include <catch2/catch_amalgamated.hpp>

#include "niklab/descriptor.hpp"

using namespace niklab;
using Catch::Approx;

TEST_CASE("measure round trip preserves masses") {
    auto m = Measure::jacobi(Interval(-1.0, 1.0), -0.5, -0.5);
    auto j = measure_to_json(m);
    auto back = measure_from_json(j);
    CHECK(back->mass() == Approx(m->mass()).margin(1e-12));
    CHECK(back->jacobi_alpha() == -0.5);

    auto pm = Measure::jacobi(Interval(-1.0, 1.0), 0.0, 0.0, 1.0, nullptr, {PointMass{2.0, 0.5}});
    auto back2 = measure_from_json(measure_to_json(pm));
    CHECK(back2->mass() == Approx(pm->mass()).margin(1e-12));
}

TEST_CASE("system descriptor forms") {
    json j = {
        {"base", {{"kind", "jacobi"}, {"interval", {-1.0, 1.0}}}},
        {"s2_tail", {{{"kind", "jacobi"}, {"interval", {2.0, 3.0}}}}},
    };
    auto mix = system_from_json(j);
    CHECK(mix.m1() == 0);
    CHECK(mix.m2() == 1);
    CHECK(mix.base().get() == mix.S2().generator(0).get()); // shared object

    // round trip preserves masses
    auto again = system_from_json(system_to_json(mix));
    CHECK(again.S2().s(0, 1)->mass() == Approx(mix.S2().s(0, 1)->mass()).margin(1e-12));
}

TEST_CASE("two-list form requires structurally equal bases") {
    json good = {
        {"s1", {{{"kind", "jacobi"}, {"interval", {-1.0, 1.0}}}}},
        {"s2",
         {{{"kind", "jacobi"}, {"interval", {-1.0, 1.0}}},
          {{"kind", "jacobi"}, {"interval", {2.0, 3.0}}}}},
    };
    auto mix = system_from_json(good);
    CHECK(mix.m2() == 1);

    json bad = good;
    bad["s2"][0]["interval"] = {-1.0, 0.9};
    CHECK_THROWS_AS(system_from_json(bad), ValidationError);
}

TEST_CASE("validation failures") {
    json overlap = {
        {"base", {{"kind", "jacobi"}, {"interval", {-1.0, 1.0}}}},
        {"s2_tail", {{{"kind", "jacobi"}, {"interval", {0.5, 2.0}}}}},
    };
    CHECK_THROWS_AS(system_from_json(overlap), ValidationError);

    json badiv = {{"base", {{"kind", "jacobi"}, {"interval", {1.0, -1.0}}}}};
    CHECK_THROWS_AS(system_from_json(badiv), ValidationError);

    json nokind = {{"base", {{"interval", {-1.0, 1.0}}}}};
    CHECK_THROWS_AS(system_from_json(nokind), ValidationError);
}
