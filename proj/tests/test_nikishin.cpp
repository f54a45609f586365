#include <catch2/catch_amalgamated.hpp>

#include "niklab/nikishin.hpp"
#include "oracle.hpp"

using namespace niklab;
using Catch::Approx;

namespace {
MeasurePtr leb(double a, double b) { return Measure::lebesgue(Interval(a, b)); }

NikishinSystem demo01() {
    return NikishinSystem({leb(-1.0, 1.0), leb(2.0, 3.0)});
}
NikishinSystem demo3(double a2 = 4.5, double b2 = 5.5) {
    return NikishinSystem({leb(-1.0, 1.0), leb(2.0, 3.0), leb(a2, b2)});
}
} // namespace

TEST_CASE("build: base cases and adjacency") {
    NikishinSystem one({leb(-1.0, 1.0)});
    CHECK(one.s(0, 0)->mass() == Approx(2.0));

    auto sys = demo01();
    CHECK(sys.s(0, 1)->mass() == Approx(-std::log(64.0 / 27.0)).epsilon(1e-12));

    CHECK_THROWS_AS(NikishinSystem({leb(-1.0, 1.0), leb(0.0, 2.0)}), AdjacentOverlap);
}

TEST_CASE("markov_function reduces to the Cauchy transform for k = j") {
    auto sys = demo01();
    Complex z(5.0, 1.0);
    CHECK(std::abs(sys.markov(0, 0, z) - sys.generator(0)->cauchy(z)) < 1e-14);
}

TEST_CASE("markov_function mass at infinity") {
    auto sys = demo01();
    double z = 1e6;
    CHECK(z * sys.markov(0, 1, Complex(z, 0)).real() ==
          Approx(sys.s(0, 1)->mass()).epsilon(1e-4));
}

TEST_CASE("identity (2.1) residual via independent nested quadrature") {
    // sigma_a^ * sigma_b^ = <a,b>^ + <b,a>^ at z = 5 + i
    Complex z(5.0, 1.0);
    auto wa = [](double) { return 1.0; };
    Complex sa = oracle::cauchy_density(wa, -1.0, 1.0, z);
    Complex sb = oracle::cauchy_density(wa, 2.0, 3.0, z);
    auto sys = demo01();
    Complex ab = sys.markov(0, 1, z);
    // <b,a>^ by the oracle: density sigma_a^(x) on [2,3]
    Complex ba = oracle::cauchy_density(
        [](double x) { return std::log((x + 1.0) / (x - 1.0)); }, 2.0, 3.0, z);
    CHECK(std::abs(sa * sb - (ab + ba)) < 1e-9);
}

TEST_CASE("cache coherence: nested equals flattened") {
    auto sys = demo3();
    // flatten s_{0,2} by hand: density s_{1,2}^(x) dsigma_0, with s_{1,2}
    // itself integrated by the oracle
    Complex z(0.5, 4.0);
    auto s12_hat = [&](double x) {
        return oracle::cauchy_density([](double t) { return 1.0; }, 4.5, 5.5, x, 1e-13);
    };
    Complex flat = oracle::integrate<Complex>(
        [&](double x) {
            // s_{1,2}^(x) for x in [-1,1]: integral over [2,3] of s12_hat(t)/(x-t)
            double s12x = oracle::integrate<double>(
                [&](double t) { return s12_hat(t) / (x - t); }, 2.0, 3.0, 1e-13);
            return Complex(s12x) / (z - x);
        },
        -1.0, 1.0, 1e-11);
    CHECK(std::abs(sys.markov(0, 2, z) - flat) < 1e-8);
}

TEST_CASE("s_{1,k} has constant sign on Delta_0") {
    auto sys = demo3();
    for (int k = 1; k <= 2; ++k) {
        double first = sys.markov(1, k, -0.999);
        bool ok = true;
        for (int i = 0; i < 512; ++i) {
            double x = -0.999 + 1.998 * i / 511.0;
            ok = ok && (sys.markov(1, k, x) * first > 0.0);
        }
        CHECK(ok);
    }
}

TEST_CASE("mixed system: shared base identity and weight matrix") {
    auto base = leb(-1.0, 1.0);
    NikishinSystem s1({base, leb(2.0, 3.0)});
    NikishinSystem s2({base, leb(-4.0, -3.0)});
    MixedSystem mix(s1, s2);
    CHECK(mix.m1() == 1);
    CHECK(mix.m2() == 1);

    auto W = mix.weight_matrix(0.25);
    REQUIRE(W.rows() == 2);
    REQUIRE(W.cols() == 2);
    CHECK(W(0, 0) == Approx(1.0));
    CHECK(W(1, 1) == Approx(mix.f2(1, 0.25) * mix.f1(1, 0.25)).epsilon(1e-13));
    // rank one
    CHECK(W(0, 1) * W(1, 0) == Approx(W(0, 0) * W(1, 1)).epsilon(1e-12));

    // distinct base objects are rejected even if numerically identical
    NikishinSystem s2bad({leb(-1.0, 1.0), leb(-4.0, -3.0)});
    CHECK_THROWS_AS(MixedSystem(s1, s2bad), ValidationError);

    // single-component case: the 1x1 matrix [1]
    NikishinSystem t1({base});
    MixedSystem trivial(t1, t1);
    auto W0 = trivial.weight_matrix(0.1);
    CHECK(W0.rows() == 1);
    CHECK(W0(0, 0) == Approx(1.0));
}
