#pragma once

// Classical Markov-rate control in 50-digit arithmetic.  The Pade error of
// log((z+1)/(z-1)) at z = 3 decays like (3 + 2 sqrt 2)^{-2n}, which reaches
// ~1e-28 at n = 18 -- far below double precision, so the control path runs in
// cpp_bin_float_50 end to end: monic Legendre recurrence plus a high-order
// Gauss rule for the remainder integral.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <vector>

namespace niklab {

using float50 = boost::multiprecision::cpp_bin_float_50;

namespace detail_hp {

struct GaussHP {
    std::vector<float50> nodes, weights;
};

inline GaussHP gauss_legendre_hp(int n) {
    GaussHP r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const float50 pi = boost::math::constants::pi<float50>();
    for (int i = 0; i < (n + 1) / 2; ++i) {
        float50 x = cos(pi * (float50(i) + 0.75) / (float50(n) + 0.5));
        float50 pp = 0;
        for (int it = 0; it < 200; ++it) {
            float50 p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                float50 p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
            }
            pp = n * (x * p0 - p1) / (x * x - 1);
            float50 dx = p0 / pp;
            x -= dx;
            if (abs(dx) < float50("1e-45")) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        float50 w = 2 / ((1 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

} // namespace detail_hp

// e_n = |s^(z) - P_n(z)/Q_n(z)| for the Lebesgue measure on [-1,1] at real
// z > 1, with Q_n the monic Legendre polynomial; returns e_n^{1/(2n)}.
inline double classical_pade_rate_control(double z_, int n) {
    const float50 z = z_;
    auto g = detail_hp::gauss_legendre_hp(96);
    // monic Legendre values at the rule nodes and at z
    std::vector<float50> qm(g.nodes.size(), 1), qc(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) qc[i] = g.nodes[i];
    float50 Qm = 1, Qc = z;
    for (int k = 1; k < n; ++k) {
        float50 bk = float50(k) * k / (4 * float50(k) * k - 1);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            float50 qn = g.nodes[i] * qc[i] - bk * qm[i];
            qm[i] = qc[i];
            qc[i] = qn;
        }
        float50 Qn = z * Qc - bk * Qm;
        Qm = Qc;
        Qc = Qn;
    }
    if (n == 0) { Qc = 1; for (auto& v : qc) v = 1; }
    float50 rem = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) rem += g.weights[i] * qc[i] / (z - g.nodes[i]);
    float50 e = abs(rem / Qc);
    float50 root = pow(e, float50(1) / (2 * n));
    return static_cast<double>(root);
}

} // namespace niklab
