#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "niklab/errors.hpp"

namespace niklab {

using Complex = std::complex<double>;

// Closed bounded interval [a, b], a < b.
struct Interval {
    double a = -1.0;
    double b = 1.0;

    Interval() = default;
    Interval(double a_, double b_) : a(a_), b(b_) {
        if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
            throw Error("Interval: endpoints must be finite with a < b, got [" +
                        std::to_string(a_) + ", " + std::to_string(b_) + "]");
    }

    double mid() const { return 0.5 * (a + b); }
    double half() const { return 0.5 * (b - a); }
    double length() const { return b - a; }

    bool contains(double x) const { return x >= a && x <= b; }
    bool disjoint(const Interval& o) const { return b < o.a || o.b < a; }

    // Signed coordinates of the hull frame: y in [-1, 1].
    double to_local(double x) const { return (x - mid()) / half(); }
    double from_local(double y) const { return mid() + half() * y; }

    Interval merged(const Interval& o) const {
        return Interval(std::min(a, o.a), std::max(b, o.b));
    }
};

inline double distance(const Interval& iv, double x) {
    if (x < iv.a) return iv.a - x;
    if (x > iv.b) return x - iv.b;
    return 0.0;
}

} // namespace niklab
