#include <catch2/catch_amalgamated.hpp>

#include "niklab/simquad.hpp"
#include "niklab/simquad_control.hpp"
#include "oracle.hpp"

using namespace niklab;
using Catch::Approx;

namespace {
MeasurePtr leb(double a, double b) { return Measure::lebesgue(Interval(a, b)); }
NikishinSystem m0() { return NikishinSystem({leb(-1, 1)}); }
NikishinSystem m1() { return NikishinSystem({leb(-1, 1), leb(2, 3)}); }
} // namespace

TEST_CASE("build_rule reduces to Gauss-Legendre for m = 0") {
    Type2Workspace ws(m0());
    auto rule = build_rule(ws, {2});
    REQUIRE(rule.nodes.size() == 2);
    CHECK(rule.nodes[0] == Approx(-1.0 / std::sqrt(3.0)).margin(1e-10));
    CHECK(rule.nodes[1] == Approx(1.0 / std::sqrt(3.0)).margin(1e-10));
    CHECK(rule.weights[0][0] == Approx(1.0).margin(1e-10));
    CHECK(rule.weights[0][1] == Approx(1.0).margin(1e-10));
}

TEST_CASE("constant exactness: weights sum to the masses") {
    Type2Workspace ws(m1());
    auto rule = build_rule(ws, {2, 2});
    auto sys = ws.system();
    for (int k = 0; k <= 1; ++k) {
        double sum = 0.0;
        for (double w : rule.weights[k]) sum += w;
        CHECK(sum == Approx(sys.s(0, k)->mass()).epsilon(1e-9));
    }
}

TEST_CASE("weight signs for staircase indices") {
    Type2Workspace ws(m1());
    auto sys = ws.system();
    for (int n = 1; n <= 4; ++n) {
        auto rule = build_rule(ws, {n, n + 1});
        for (int k = 0; k <= 1; ++k) {
            double want = sys.s(0, k)->sign();
            for (double w : rule.weights[k]) {
                INFO("n = " << n << " k = " << k);
                CHECK(w * want > 0.0);
            }
        }
    }
}

TEST_CASE("exactness to degree |n| + n_k - 1 and the negative control") {
    Type2Workspace ws(m1());
    auto rule = build_rule(ws, {2, 3});
    auto rep = exactness_test(rule, ws.system());
    CHECK(rep.max_relative < 1e-8);

    // negative control: m = 0, n = 2, monomial degree 4 must fail:
    // the 2-point Gauss rule gives 2/9 instead of 2/5
    Type2Workspace ws0(m0());
    auto r0 = build_rule(ws0, {2});
    double quad = 0.0;
    for (std::size_t i = 0; i < r0.nodes.size(); ++i)
        quad += r0.weights[0][i] * std::pow(r0.nodes[i], 4);
    CHECK(quad == Approx(2.0 / 9.0).margin(1e-9));
    CHECK(std::abs(quad - 2.0 / 5.0) > 0.1);

    // degree 3 exact by parity
    double d3 = 0.0;
    for (std::size_t i = 0; i < r0.nodes.size(); ++i)
        d3 += r0.weights[0][i] * std::pow(r0.nodes[i], 3);
    CHECK(d3 == Approx(0.0).margin(1e-12));
}

TEST_CASE("simultaneous integration of exp converges") {
    Type2Workspace ws(m0());
    auto rule = build_rule(ws, {10});
    auto vals = integrate_simultaneously(rule, [](double x) { return std::exp(x); });
    CHECK(vals[0] == Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-10));

    Type2Workspace ws1(m1());
    auto rule1 = build_rule(ws1, {5, 5});
    auto vals1 = integrate_simultaneously(rule1, [](double x) { return std::exp(x); });
    for (int k = 0; k <= 1; ++k) {
        double exact = ws1.system().s(0, k)->integrate([](double x) { return std::exp(x); }, 1e-13);
        CHECK(vals1[k] == Approx(exact).epsilon(1e-7));
    }

    // |x| converges too, just slower
    auto abs10 = integrate_simultaneously(build_rule(ws, {10}), [](double x) { return std::abs(x); });
    CHECK(abs10[0] == Approx(1.0).margin(2e-2));
}

TEST_CASE("phi_t closed forms and normalization") {
    Interval hull(-1.0, 1.0);
    // |phi_inf(3)| = 1/(3 + 2 sqrt 2)
    CHECK(std::abs(phi_t(hull, Complex(0, 0), Complex(3.0, 0.0), true)) ==
          Approx(1.0 / (3.0 + 2.0 * std::sqrt(2.0))).epsilon(1e-12));
    // phi_t(t) = 0
    CHECK(std::abs(phi_t(hull, Complex(2.5, 0.0), Complex(2.5, 0.0))) < 1e-12);
    // boundary modulus tends to 1
    CHECK(std::abs(phi_t(hull, Complex(2.5, 0.0), Complex(0.3, 1e-6))) == Approx(1.0).margin(1e-3));
    // positive derivative at t
    double h = 1e-6;
    Complex d = (phi_t(hull, Complex(2.5, 0.0), Complex(2.5 + h, 0.0)) -
                 phi_t(hull, Complex(2.5, 0.0), Complex(2.5 - h, 0.0))) /
                (2.0 * h);
    CHECK(d.real() > 0.0);
    CHECK(std::abs(d.imag()) < 1e-6);
}

TEST_CASE("phi_t is invariant under affine hull reduction") {
    Interval h1(-1.0, 1.0), h2(2.0, 8.0);
    auto map = [&](Complex z) { return Complex(5.0, 0.0) + 3.0 * z; }; // [-1,1] -> [2,8]
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 8; ++t) {
        Complex z(2.0 + U(rng), 1.0 + U(rng));
        double tt = 3.0 + U(rng);
        double a = std::abs(phi_t(h1, Complex(tt, 0.0), z));
        double b = std::abs(phi_t(h2, map(Complex(tt, 0.0)).real(), map(z)));
        CHECK(a == Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("markov rate: m = 0 control in double precision up to the floor") {
    Type2Workspace ws(m0());
    std::vector<std::vector<int>> idx;
    for (int n = 2; n <= 8; n += 2) idx.push_back({n});
    std::vector<Complex> probes = {Complex(3.0, 0.0)};
    auto rep = markov_rate(ws, idx, probes);
    CHECK(rep.delta == Approx(1.0 / (3.0 + 2.0 * std::sqrt(2.0))).epsilon(1e-10));
    // e_n decreasing, roots near delta already at n = 8
    CHECK(rep.points.back().e_n < rep.points.front().e_n);
    CHECK(rep.points.back().root == Approx(rep.delta).margin(0.05));
    for (const auto& pt : rep.points) CHECK(pt.root <= rep.delta + 0.05);
}

TEST_CASE("markov rate: m = 1 demo stays under the conformal bound") {
    Type2Workspace ws(m1());
    std::vector<std::vector<int>> idx = {{2, 2}, {4, 4}, {6, 6}};
    std::vector<Complex> probes = {Complex(-1.5, 0.0), Complex(1.5, 0.2), Complex(0.0, 1.0)};
    auto rep = markov_rate(ws, idx, probes);
    CHECK(rep.delta < 1.0);
    for (const auto& pt : rep.points) {
        INFO("|n| = " << pt.total << " root " << pt.root << " delta " << rep.delta);
        CHECK(pt.root <= rep.delta + 0.05);
    }
}

TEST_CASE("high-precision classical control at n = 18") {
    double root = classical_pade_rate_control(3.0, 18);
    double delta = 1.0 / (3.0 + 2.0 * std::sqrt(2.0));
    CHECK(root == Approx(delta).epsilon(0.05));
    // and the trend tightens with n
    double r10 = classical_pade_rate_control(3.0, 10);
    CHECK(std::abs(root - delta) < std::abs(r10 - delta) + 1e-3);
}
