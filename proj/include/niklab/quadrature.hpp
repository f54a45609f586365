#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "niklab/interval.hpp"

namespace niklab {

// Nodes and (signed) weights; a plain container shared by every measure kind.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    auto sum(F&& f) const {
        using R = decltype(f(0.0) * 1.0);
        R acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline QuadRule gauss_legendre_reference(int n) {
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one polishing step
                p0 = 1.0; p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                x -= p0 / pp;
                break;
            }
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

// Process-wide cache of reference rules; rules are immutable once built.
inline const QuadRule& gauss_legendre_cached(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre_reference(n)).first;
    return it->second;
}

inline QuadRule gauss_legendre(int n, const Interval& iv) {
    const QuadRule& ref = gauss_legendre_cached(n);
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = iv.from_local(ref.nodes[i]);
        r.weights[i] = ref.weights[i] * iv.half();
    }
    return r;
}

} // namespace niklab
