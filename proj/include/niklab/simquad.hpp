#pragma once

#include <algorithm>
#include <vector>

#include "niklab/hermite_pade.hpp"
#include "niklab/nikishin.hpp"
#include "niklab/polynomial.hpp"

namespace niklab {

// Shared nodes with per-measure weights: one rule integrating every s_{0,k}
// of the system exactly to degree |n| + n_k - 1.
struct SimultaneousRule {
    std::vector<int> n;                       // type II multi-index
    std::vector<double> nodes;                // zeros of Q_n, increasing
    std::vector<std::vector<double>> weights; // weights[k][i]
    ChebPoly Q;
};

// Workspace holding one solver per system so repeated builds share moment
// tables (rate sweeps, acceptance runs).
class Type2Workspace {
public:
    explicit Type2Workspace(NikishinSystem sys)
        : sys_(std::move(sys)),
          mix_(NikishinSystem({sys_.generator(0)}), sys_),
          solver_(mix_) {}

    const NikishinSystem& system() const { return sys_; }

    // monic Q for the type II index ntilde
    ChebPoly solve_monic(const std::vector<int>& ntilde, SolveInfo* info = nullptr) const {
        MultiIndex2 n;
        int total = std::accumulate(ntilde.begin(), ntilde.end(), 0);
        n.n1 = {total + 1};
        n.n2 = ntilde;
        auto form = monic_normalize(solver_.solve(n, info));
        return form.coeffs()[0];
    }

    MixedForm solve_form(const std::vector<int>& ntilde) const {
        MultiIndex2 n;
        n.n1 = {std::accumulate(ntilde.begin(), ntilde.end(), 0) + 1};
        n.n2 = ntilde;
        return monic_normalize(solver_.solve(n));
    }

private:
    NikishinSystem sys_;
    MixedSystem mix_;
    HermitePadeSolver solver_;
};

inline SimultaneousRule build_rule(const Type2Workspace& ws, const std::vector<int>& ntilde) {
    const auto& sys = ws.system();
    auto form = ws.solve_form(ntilde);
    SimultaneousRule rule;
    rule.n = ntilde;
    rule.Q = form.coeffs()[0];
    rule.nodes = zeros_in_hull(form);

    const int m = sys.m();
    rule.weights.assign(m + 1, std::vector<double>(rule.nodes.size(), 0.0));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        // q_i = Q / (x - x_i) by Chebyshev-stable synthetic division
        ChebPoly qi = rule.Q.divided_by_root(rule.nodes[i]);
        double dQ = qi(rule.nodes[i]); // Q'(x_i) since the root is simple
        for (int k = 0; k <= m; ++k) {
            double integral = sys.s(0, k)->integrate([&](double x) { return qi(x); }, 1e-13);
            rule.weights[k][i] = integral / dQ;
        }
    }
    return rule;
}

// Max residual of |int p ds_{0,k} - sum_i w_{k,i} p(x_i)| over the Chebyshev
// basis up to the guaranteed exactness degree |n| + n_k - 1, relative scales
// attached.
struct ExactnessReport {
    double max_residual = 0.0;
    double max_relative = 0.0;
};

inline ExactnessReport exactness_test(const SimultaneousRule& rule, const NikishinSystem& sys) {
    const Interval frame = sys.generator(0)->hull();
    int total = std::accumulate(rule.n.begin(), rule.n.end(), 0);
    ExactnessReport rep;
    for (int k = 0; k <= sys.m(); ++k) {
        int dmax = total + rule.n[k] - 1;
        auto s0k = sys.s(0, k);
        for (int d = 0; d <= dmax; ++d) {
            ChebPoly Td = cheb_basis(frame, d);
            double lhs = s0k->integrate([&](double x) { return Td(x); }, 1e-13);
            double rhs = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                double term = rule.weights[k][i] * Td(rule.nodes[i]);
                rhs += term;
                scale += std::abs(term);
            }
            scale = std::max({scale, std::abs(lhs), 1.0});
            rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
            rep.max_relative = std::max(rep.max_relative, std::abs(lhs - rhs) / scale);
        }
    }
    return rep;
}

template <class F>
std::vector<double> integrate_simultaneously(const SimultaneousRule& rule, F&& f) {
    std::vector<double> out(rule.weights.size(), 0.0);
    for (std::size_t k = 0; k < rule.weights.size(); ++k)
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            out[k] += rule.weights[k][i] * f(rule.nodes[i]);
    return out;
}

// --- conformal machinery ------------------------------------------------------

// Exterior inverse Joukowski: J(u) = u + sqrt(u^2 - 1) with |J| > 1.
inline Complex joukowski_exterior(Complex u) {
    Complex s = std::sqrt(u * u - 1.0);
    Complex j1 = u + s, j2 = u - s;
    return std::abs(j1) >= std::abs(j2) ? j1 : j2;
}

// Canonical map of the hull exterior onto the unit disk with phi_t(t) = 0 and
// phi_t'(t) > 0; t may be infinity (quiet NaN argument).
inline Complex phi_t(const Interval& hull, Complex t, Complex z, bool t_at_infinity = false) {
    auto psi = [&](Complex w) {
        Complex u = (w - hull.mid()) / hull.half();
        return 1.0 / joukowski_exterior(u);
    };
    double dz = std::hypot(distance(hull, z.real()), z.imag());
    if (dz < 1e-8 * hull.length()) throw PointOnSupport("phi_t: z on the hull");
    Complex pz = psi(z);
    if (t_at_infinity) return pz; // psi(z) ~ h/(4z): positive orientation at infinity
    double dt = std::hypot(distance(hull, t.real()), t.imag());
    if (dt < 1e-8 * hull.length()) throw PointOnSupport("phi_t: t on the hull");
    Complex pt = psi(t);
    Complex w = (pz - pt) / (1.0 - std::conj(pt) * pz);
    // rotation fixed by phi_t'(t) > 0; for real t this is the sign of psi'(t)
    double h = 1e-6 * (1.0 + std::abs(t));
    double dpsi = (psi(t + h).real() - psi(t - h).real()) / (2.0 * h);
    return (dpsi > 0 ? 1.0 : -1.0) * w;
}

// delta_K for a probe set: max over probes and t in Co(supp sigma_1) U {inf}
// of |phi_t(z)|; the t-grid is Chebyshev on the interval.  Pass hull1 as
// nullptr when the system has no second measure (t = infinity only).
inline double delta_K(const Interval& hull0, const Interval* hull1,
                      const std::vector<Complex>& probes, int tgrid = 64) {
    double best = 0.0;
    for (const auto& z : probes) {
        best = std::max(best, std::abs(phi_t(hull0, Complex(0, 0), z, true)));
        if (!hull1) continue;
        for (int i = 0; i < tgrid; ++i) {
            double th = M_PI * (i + 0.5) / tgrid;
            double t = hull1->mid() + hull1->half() * std::cos(th);
            best = std::max(best, std::abs(phi_t(hull0, Complex(t, 0.0), z)));
        }
    }
    return best;
}

// --- Markov-rate measurement ---------------------------------------------------

struct RatePoint {
    int total = 0;        // |n|
    double e_n = 0.0;     // max_k max_probe |s_{0,k}^ - P_{n,k}/Q_n|
    double root = 0.0;    // e_n^{1/(2|n|)}
};

struct RateReport {
    std::vector<RatePoint> points;
    double delta = 1.0; // conformal bound for the probe set
};

// Per index, e_n via the remainder identity: s^ - P/Q = (int Q ds/(z-x))/Q(z).
inline RateReport markov_rate(const Type2Workspace& ws,
                              const std::vector<std::vector<int>>& indices,
                              const std::vector<Complex>& probes) {
    const auto& sys = ws.system();
    RateReport rep;
    if (sys.m() >= 1) {
        Interval hull1 = sys.generator(1)->hull();
        rep.delta = delta_K(sys.generator(0)->hull(), &hull1, probes);
    } else {
        rep.delta = delta_K(sys.generator(0)->hull(), nullptr, probes);
    }
    for (const auto& nt : indices) {
        ChebPoly Q = ws.solve_monic(nt);
        int total = std::accumulate(nt.begin(), nt.end(), 0);
        double e = 0.0;
        for (int k = 0; k <= sys.m(); ++k) {
            auto s0k = sys.s(0, k);
            for (const auto& z : probes) {
                Complex r = s0k->integrate([&](double x) { return Complex(Q(x)) / (z - x); },
                                           1e-15);
                e = std::max(e, std::abs(r / Q(z)));
            }
        }
        RatePoint pt;
        pt.total = total;
        pt.e_n = e;
        pt.root = std::pow(e, 1.0 / (2.0 * total));
        rep.points.push_back(pt);
    }
    return rep;
}

} // namespace niklab
