#pragma once

// High-precision certification tier.  The mixed moment matrices have
// geometrically decaying spectra; at desk sizes the smallest singular value
// can fall below double-precision noise, so rank and nullity are certified by
// reassembling the matrix in 50-digit arithmetic.  Only systems generated by
// plain Jacobi weights are supported here; everything else keeps the
// double-precision verdict.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <map>
#include <vector>

#include "niklab/measure.hpp"
#include "niklab/nikishin.hpp"

namespace niklab {

using float50 = boost::multiprecision::cpp_bin_float_50;

namespace hp {

struct Rule {
    std::vector<float50> nodes, weights;
};

inline const Rule& gauss_legendre_ref(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const float50 pi = boost::math::constants::pi<float50>();
    for (int i = 0; i < (n + 1) / 2; ++i) {
        float50 x = cos(pi * (float50(i) + 0.75) / (float50(n) + 0.5));
        float50 pp = 0;
        for (int iter = 0; iter < 200; ++iter) {
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
    return cache.emplace(n, std::move(r)).first->second;
}

struct JacobiGen {
    double a = -1.0, b = 1.0;
    double alpha = 0.0, beta = 0.0;
    double sgn = 1.0;
};

// Effective rule (nodes and density-carrying weights) in float50.
inline Rule jacobi_rule(const JacobiGen& g, int n) {
    const Rule& ref = gauss_legendre_ref(n);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const float50 mid = (float50(g.a) + float50(g.b)) / 2;
    const float50 half = (float50(g.b) - float50(g.a)) / 2;
    if (g.alpha == 0.0 && g.beta == 0.0) {
        for (int i = 0; i < n; ++i) {
            r.nodes[i] = mid + half * ref.nodes[i];
            r.weights[i] = g.sgn * half * ref.weights[i];
        }
        return r;
    }
    const float50 pi = boost::math::constants::pi<float50>();
    const float50 pref = pow(2 * half, float50(g.alpha) + float50(g.beta) + 1);
    for (int i = 0; i < n; ++i) {
        float50 th = pi * (ref.nodes[i] + 1) / 2; // map [-1,1] -> [0,pi]
        float50 wth = ref.weights[i] * pi / 2;
        float50 x = mid - half * cos(th);
        float50 w = pref * pow(cos(th / 2), 2 * float50(g.alpha) + 1) *
                    pow(sin(th / 2), 2 * float50(g.beta) + 1);
        r.nodes[i] = x;
        r.weights[i] = wth * w * g.sgn;
    }
    return r;
}

// One-sided Jacobi SVD of an rows x cols matrix (rows <= cols is fine);
// returns singular values (descending) and the right singular vectors.
struct Svd {
    std::vector<float50> sigma;
    std::vector<std::vector<float50>> V; // V[c] = column c
};

inline Svd one_sided_jacobi(std::vector<std::vector<float50>> col, int rows) {
    const int cols = static_cast<int>(col.size());
    std::vector<std::vector<float50>> V(cols, std::vector<float50>(cols, 0));
    for (int i = 0; i < cols; ++i) V[i][i] = 1;
    auto dot = [&](const std::vector<float50>& x, const std::vector<float50>& y) {
        float50 s = 0;
        for (int i = 0; i < rows; ++i) s += x[i] * y[i];
        return s;
    };
    const float50 tol("1e-46");
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool changed = false;
        for (int p = 0; p < cols; ++p) {
            for (int q = p + 1; q < cols; ++q) {
                float50 app = dot(col[p], col[p]);
                float50 aqq = dot(col[q], col[q]);
                float50 apq = dot(col[p], col[q]);
                if (abs(apq) <= tol * sqrt(app * aqq) || apq == 0) continue;
                changed = true;
                float50 zeta = (aqq - app) / (2 * apq);
                float50 t = (zeta >= 0 ? 1 : float50(-1)) / (abs(zeta) + sqrt(1 + zeta * zeta));
                float50 cs = 1 / sqrt(1 + t * t);
                float50 sn = cs * t;
                for (int i = 0; i < rows; ++i) {
                    float50 vp = col[p][i], vq = col[q][i];
                    col[p][i] = cs * vp - sn * vq;
                    col[q][i] = sn * vp + cs * vq;
                }
                for (int i = 0; i < cols; ++i) {
                    float50 vp = V[p][i], vq = V[q][i];
                    V[p][i] = cs * vp - sn * vq;
                    V[q][i] = sn * vp + cs * vq;
                }
            }
        }
        if (!changed) break;
    }
    Svd out;
    out.sigma.resize(cols);
    std::vector<int> order(cols);
    for (int i = 0; i < cols; ++i) {
        out.sigma[i] = sqrt(dot(col[i], col[i]));
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return out.sigma[a] > out.sigma[b]; });
    Svd sorted;
    sorted.sigma.resize(cols);
    sorted.V.resize(cols);
    for (int i = 0; i < cols; ++i) {
        sorted.sigma[i] = out.sigma[order[i]];
        sorted.V[i] = V[order[i]];
    }
    return sorted;
}

// Weighted Chebyshev moments t_{j,k,d} of a mixed system with plain Jacobi
// generators, evaluated in float50 with fixed generous rules.
class MomentOracle {
public:
    // throws Error when the system has generators outside the Jacobi class
    explicit MomentOracle(const MixedSystem& sys, int nodes = 128) : nodes_(nodes) {
        base_ = extract(sys.base());
        for (int p = 1; p <= sys.m1(); ++p) s1_.push_back(extract(sys.S1().generator(p)));
        for (int p = 1; p <= sys.m2(); ++p) s2_.push_back(extract(sys.S2().generator(p)));
        base_rule_ = jacobi_rule(base_, nodes_);
        f1_ = chain_values(s1_);
        f2_ = chain_values(s2_);
    }

    static bool supported(const MixedSystem& sys) {
        auto ok = [](const MeasurePtr& m) {
            return m->kind() == Measure::Kind::WeightedInterval && !m->has_analytic_factor() &&
                   m->point_masses().empty();
        };
        if (!ok(sys.base())) return false;
        for (int p = 1; p <= sys.m1(); ++p)
            if (!ok(sys.S1().generator(p))) return false;
        for (int p = 1; p <= sys.m2(); ++p)
            if (!ok(sys.S2().generator(p))) return false;
        return true;
    }

    // t_{j,k,d}, d = 0..dmax
    const std::vector<float50>& weighted_moments(int j, int k, int dmax) {
        auto key = std::make_pair(j, k);
        auto it = cache_.find(key);
        if (it != cache_.end() && static_cast<int>(it->second.size()) >= dmax + 1)
            return it->second;
        const float50 mid = (float50(base_.a) + float50(base_.b)) / 2;
        const float50 half = (float50(base_.b) - float50(base_.a)) / 2;
        std::vector<float50> t(dmax + 1, 0);
        const std::size_t n = base_rule_.nodes.size();
        std::vector<float50> y(n), T0(n, 1), T1(n), fw(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = (base_rule_.nodes[i] - mid) / half;
            T1[i] = y[i];
            float50 v2 = (j == 0) ? float50(1) : f2_[j - 1][i];
            float50 v1 = (k == 0) ? float50(1) : f1_[k - 1][i];
            fw[i] = base_rule_.weights[i] * v1 * v2;
        }
        for (int d = 0; d <= dmax; ++d) {
            float50 acc = 0;
            if (d == 0)
                for (std::size_t i = 0; i < n; ++i) acc += fw[i];
            else if (d == 1)
                for (std::size_t i = 0; i < n; ++i) acc += fw[i] * T1[i];
            else
                for (std::size_t i = 0; i < n; ++i) {
                    float50 Tn = 2 * y[i] * T1[i] - T0[i];
                    T0[i] = T1[i];
                    T1[i] = Tn;
                    acc += fw[i] * Tn;
                }
            t[d] = acc;
        }
        cache_[key] = t;
        return cache_[key];
    }

private:
    JacobiGen extract(const MeasurePtr& m) {
        if (m->kind() != Measure::Kind::WeightedInterval || m->has_analytic_factor() ||
            !m->point_masses().empty())
            throw Error("high-precision tier requires plain Jacobi generators");
        JacobiGen g;
        g.a = m->interval().a;
        g.b = m->interval().b;
        g.alpha = m->jacobi_alpha();
        g.beta = m->jacobi_beta();
        g.sgn = m->sign();
        return g;
    }

    // transform values of the chains <sigma_1..sigma_k>^ at the base nodes
    std::vector<std::vector<float50>> chain_values(const std::vector<JacobiGen>& gens) {
        std::vector<std::vector<float50>> out;
        if (gens.empty()) return out;
        const int m = static_cast<int>(gens.size());
        std::vector<Rule> rules;
        for (const auto& g : gens) rules.push_back(jacobi_rule(g, nodes_));
        // inner[p][i]: value of <sigma_{p+1}..sigma_k>^ at node i of sigma_p,
        // built bottom-up per chain length k
        for (int k = 1; k <= m; ++k) {
            // V_{k+1} == 1; walk down to level 1
            std::vector<float50> cur(rules[k - 1].nodes.size(), 1);
            for (int p = k; p >= 2; --p) {
                // values of V_p at nodes of sigma_{p-1}
                std::vector<float50> nxt(rules[p - 2].nodes.size(), 0);
                for (std::size_t i = 0; i < nxt.size(); ++i) {
                    float50 x = rules[p - 2].nodes[i];
                    float50 acc = 0;
                    for (std::size_t r = 0; r < rules[p - 1].nodes.size(); ++r)
                        acc += rules[p - 1].weights[r] * cur[r] / (x - rules[p - 1].nodes[r]);
                    nxt[i] = acc;
                }
                cur = std::move(nxt);
            }
            // V_1 at the base nodes
            std::vector<float50> vals(base_rule_.nodes.size(), 0);
            for (std::size_t i = 0; i < vals.size(); ++i) {
                float50 x = base_rule_.nodes[i];
                float50 acc = 0;
                for (std::size_t r = 0; r < rules[0].nodes.size(); ++r)
                    acc += rules[0].weights[r] * cur[r] / (x - rules[0].nodes[r]);
                vals[i] = acc;
            }
            out.push_back(std::move(vals));
        }
        return out;
    }

    int nodes_;
    JacobiGen base_;
    std::vector<JacobiGen> s1_, s2_;
    Rule base_rule_;
    std::vector<std::vector<float50>> f1_, f2_;
    std::map<std::pair<int, int>, std::vector<float50>> cache_;
};

} // namespace hp
} // namespace niklab
