#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "niklab/interval.hpp"

namespace niklab {

// Dense polynomial in the monomial basis, ascending coefficients.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly constant(double v) { return Poly({v}); }
    static Poly x() { return Poly({0.0, 1.0}); }

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool zero() const { return c.empty(); }

    void trim() {
        while (!c.empty() && c.back() == 0.0) c.pop_back();
    }

    template <class T>
    T operator()(T z) const {
        T acc{};
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + T(c[i]);
        return acc;
    }

    Poly& operator+=(const Poly& o) {
        if (o.c.size() > c.size()) c.resize(o.c.size(), 0.0);
        for (std::size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
        trim();
        return *this;
    }
    Poly& operator*=(double s) {
        for (double& v : c) v *= s;
        trim();
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { a += b; return a; }
    friend Poly operator*(Poly a, double s) { a *= s; return a; }
    friend Poly operator*(double s, Poly a) { a *= s; return a; }

    // Multiplication by (az + b).
    Poly affine_times(double a, double b) const {
        if (zero()) return {};
        std::vector<double> out(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            out[i] += b * c[i];
            out[i + 1] += a * c[i];
        }
        return Poly(std::move(out));
    }

    Poly derivative() const {
        if (c.size() <= 1) return {};
        std::vector<double> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = i * c[i];
        return Poly(std::move(d));
    }
};

// Polynomial in the Chebyshev basis of a frame interval: p(x) = sum c_k T_k(y),
// y = frame.to_local(x).  Keeps high-degree work conditioned on the hull.
struct ChebPoly {
    Interval frame;
    std::vector<double> c;

    ChebPoly() = default;
    ChebPoly(Interval fr, std::vector<double> coeffs) : frame(fr), c(std::move(coeffs)) {}

    int degree() const {
        int d = static_cast<int>(c.size()) - 1;
        while (d > 0 && c[d] == 0.0) --d;
        return c.empty() ? -1 : d;
    }

    template <class T>
    T operator()(T x) const {
        if (c.empty()) return T{};
        T y = (x - T(frame.mid())) / T(frame.half());
        // Clenshaw
        T b1{}, b2{};
        for (std::size_t k = c.size(); k-- > 1;) {
            T b0 = 2.0 * y * b1 - b2 + T(c[k]);
            b2 = b1;
            b1 = b0;
        }
        return y * b1 - b2 + T(c[0]);
    }

    // d/dx
    ChebPoly derivative() const {
        int n = degree();
        if (n <= 0) return ChebPoly(frame, {0.0});
        std::vector<double> dd(n + 2, 0.0);
        for (int k = n; k >= 1; --k) dd[k - 1] = dd[k + 1] + 2.0 * k * c[k];
        dd[0] *= 0.5;
        std::vector<double> d(n, 0.0);
        for (int k = 0; k < n; ++k) d[k] = dd[k] / frame.half();
        return ChebPoly(frame, std::move(d));
    }

    // Divide by (x - root): *this = (x - root) q + rem.  Stable for roots in
    // or near the frame.
    ChebPoly divided_by_root(double root, double* rem_out = nullptr) const {
        int n = degree();
        double rho = frame.to_local(root);
        double h = frame.half();
        if (n <= 0) {
            if (rem_out) *rem_out = c.empty() ? 0.0 : c[0];
            return ChebPoly(frame, {0.0});
        }
        std::vector<double> b(n + 2, 0.0); // b[k], valid for k <= n-1
        b[n - 1] = 2.0 * c[n];
        for (int j = n - 1; j >= 2; --j) b[j - 1] = 2.0 * c[j] + 2.0 * rho * b[j] - b[j + 1];
        if (n >= 2)
            b[0] = c[1] + rho * b[1] - 0.5 * b[2];
        else
            b[0] = c[1] + rho * b[1];
        double rem = c[0] - 0.5 * b[1] + rho * b[0];
        if (rem_out) *rem_out = rem;
        std::vector<double> q(b.begin(), b.begin() + n);
        for (double& v : q) v /= h; // account for x - root = h (y - rho)
        return ChebPoly(frame, std::move(q));
    }

    // Monomial coefficients in the local variable y.
    std::vector<double> monomial_local() const {
        int n = degree();
        if (n < 0) return {};
        std::vector<double> out(n + 1, 0.0);
        std::vector<double> tkm1{1.0}, tk{0.0, 1.0};
        out[0] += c[0];
        if (n >= 1)
            for (std::size_t i = 0; i < tk.size(); ++i) out[i] += c[1] * tk[i];
        for (int k = 2; k <= n; ++k) {
            std::vector<double> tkp1(k + 1, 0.0);
            for (std::size_t i = 0; i < tk.size(); ++i) tkp1[i + 1] += 2.0 * tk[i];
            for (std::size_t i = 0; i < tkm1.size(); ++i) tkp1[i] -= tkm1[i];
            for (int i = 0; i <= k; ++i) out[i] += c[k] * tkp1[i];
            tkm1 = std::move(tk);
            tk = std::move(tkp1);
        }
        return out;
    }

    // Leading coefficient of x^degree in the global variable.
    double leading_monomial() const {
        int n = degree();
        if (n < 0) return 0.0;
        if (n == 0) return c[0];
        return c[n] * std::pow(2.0, n - 1) / std::pow(frame.half(), n);
    }

    ChebPoly& operator+=(const ChebPoly& o) {
        if (o.c.size() > c.size()) c.resize(o.c.size(), 0.0);
        for (std::size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    ChebPoly& operator*=(double s) {
        for (double& v : c) v *= s;
        return *this;
    }
};

// Basis vector T_k on a frame.
inline ChebPoly cheb_basis(const Interval& frame, int k) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = 1.0;
    return ChebPoly(frame, std::move(c));
}

} // namespace niklab
