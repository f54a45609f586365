#include <catch2/catch_amalgamated.hpp>

#include "niklab/polynomial.hpp"
#include "niklab/quadrature.hpp"

using namespace niklab;
using Catch::Approx;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    auto r = gauss_legendre(16, Interval(-1.0, 1.0));
    CHECK(r.sum([](double) { return 1.0; }) == Approx(2.0).epsilon(1e-14));
    CHECK(r.sum([](double x) { return x * x; }) == Approx(2.0 / 3.0).epsilon(1e-14));
    // degree 31 is still exact for 16 nodes
    CHECK(r.sum([](double x) { return std::pow(x, 30); }) == Approx(2.0 / 31.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre 2-point rule matches the classical nodes") {
    auto r = gauss_legendre(2, Interval(-1.0, 1.0));
    CHECK(r.nodes[0] == Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r.nodes[1] == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r.weights[0] == Approx(1.0).epsilon(1e-14));
    CHECK(r.weights[1] == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre on shifted intervals") {
    auto r = gauss_legendre(32, Interval(2.0, 3.0));
    CHECK(r.sum([](double x) { return 1.0 / x; }) == Approx(std::log(3.0 / 2.0)).epsilon(1e-14));
}

TEST_CASE("Poly basics") {
    Poly p({1.0, 0.0, 3.0}); // 1 + 3x^2
    CHECK(p(2.0) == Approx(13.0));
    CHECK(p.derivative()(2.0) == Approx(12.0));
    Poly q = p.affine_times(2.0, -1.0); // (2x - 1) p
    CHECK(q(2.0) == Approx(3.0 * 13.0));
    CHECK(q.degree() == 3);
}

TEST_CASE("ChebPoly eval, derivative, division") {
    Interval fr(-1.0, 1.0);
    ChebPoly t3 = cheb_basis(fr, 3);
    CHECK(t3(0.5) == Approx(4 * 0.125 - 3 * 0.5).epsilon(1e-14)); // T3 = 4y^3-3y

    // derivative against finite differences
    ChebPoly p(fr, {0.3, -1.2, 0.7, 0.25});
    auto dp = p.derivative();
    double x = 0.37, h = 1e-6;
    CHECK(dp(x) == Approx((p(x + h) - p(x - h)) / (2 * h)).epsilon(1e-7));

    // division by a root: rebuild p = (x - r) q + rem
    double r = 0.21;
    double rem = 0.0;
    auto q = p.divided_by_root(r, &rem);
    for (double xx : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
        CHECK(p(xx) == Approx((xx - r) * q(xx) + rem).margin(1e-13));
    }
}

TEST_CASE("ChebPoly on a shifted frame") {
    Interval fr(2.0, 5.0);
    ChebPoly p(fr, {0.0, 1.0}); // T1(y) = y = (x - 3.5)/1.5
    CHECK(p(5.0) == Approx(1.0));
    CHECK(p(2.0) == Approx(-1.0));
    CHECK(p.leading_monomial() == Approx(1.0 / 1.5));

    auto mono = p.monomial_local();
    REQUIRE(mono.size() == 2);
    CHECK(mono[0] == Approx(0.0).margin(1e-15));
    CHECK(mono[1] == Approx(1.0));
}
