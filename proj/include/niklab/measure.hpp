#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "niklab/errors.hpp"
#include "niklab/interval.hpp"
#include "niklab/quadrature.hpp"

namespace niklab {

class Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

// Multiplicative weight built from Cauchy transforms of other measures:
// constant * fn(x) * num^(x) / den^(x).  Every part is optional.
struct CauchyFactor {
    MeasurePtr numerator;
    MeasurePtr denominator;
    double constant = 1.0;
    std::function<double(double)> fn;
};

struct PointMass {
    double location = 0.0;
    double mass = 0.0;
};

namespace detail {
inline constexpr double kInnerTol = 1e-13;
inline constexpr int kBaseNodes = 16;
inline constexpr int kMaxLevelInterval = 8; // 16 * 2^8 = 4096 node cap
}

// A finite signed measure of constant sign on a real compact.  Instances are
// immutable after construction and shared through MeasurePtr; quadrature
// tables and moments are cached lazily under a mutex.
class Measure : public std::enable_shared_from_this<Measure> {
public:
    enum class Kind { WeightedInterval, MomentBacked, CauchyWeighted };

    static MeasurePtr lebesgue(const Interval& iv, double sgn = 1.0) {
        return jacobi(iv, 0.0, 0.0, sgn);
    }

    // d mu = sgn * (b-x)^alpha (x-a)^beta g(x) dx on [a,b], plus point masses.
    static MeasurePtr jacobi(const Interval& iv, double alpha, double beta,
                             double sgn = 1.0,
                             std::function<double(double)> g = nullptr,
                             std::vector<PointMass> pm = {}) {
        auto m = std::shared_ptr<Measure>(new Measure());
        m->kind_ = Kind::WeightedInterval;
        m->iv_ = iv;
        m->alpha_ = alpha;
        m->beta_ = beta;
        m->sgn_ = sgn < 0 ? -1.0 : 1.0;
        m->g_ = std::move(g);
        m->pm_ = std::move(pm);
        m->hull_ = iv;
        for (const auto& p : m->pm_) {
            if (iv.contains(p.location))
                throw Error("point masses must lie outside the continuous interval");
            if (p.mass * m->sgn_ <= 0.0)
                throw Error("point masses must share the measure sign");
            m->hull_ = Interval(std::min(m->hull_.a, p.location), std::max(m->hull_.b, p.location));
        }
        m->finalize();
        return m;
    }

    // Discrete rule standing in for a measure known through its moments.
    static MeasurePtr from_rule(QuadRule rule, const Interval& hull) {
        if (rule.size() < 1) throw Error("empty quadrature rule");
        auto m = std::shared_ptr<Measure>(new Measure());
        m->kind_ = Kind::MomentBacked;
        m->mb_rule_ = std::move(rule);
        m->hull_ = hull;
        m->iv_ = hull;
        m->finalize();
        return m;
    }

    // d mu = prod(factors)(x) d base(x).
    static MeasurePtr weighted(MeasurePtr base, std::vector<CauchyFactor> factors) {
        for (const auto& f : factors) {
            if (!f.numerator && !f.denominator && f.constant == 1.0)
                continue;
            for (const MeasurePtr& ref : {f.numerator, f.denominator})
                if (ref && !ref->hull().disjoint(base->hull()))
                    throw OverlappingSupports(
                        "cauchy factor support [" + std::to_string(ref->hull().a) + ", " +
                        std::to_string(ref->hull().b) + "] overlaps base hull [" +
                        std::to_string(base->hull().a) + ", " + std::to_string(base->hull().b) +
                        "]");
        }
        if (factors.empty()) return base;
        auto m = std::shared_ptr<Measure>(new Measure());
        m->kind_ = Kind::CauchyWeighted;
        m->base_ = std::move(base);
        m->factors_ = std::move(factors);
        m->hull_ = m->base_->hull();
        m->iv_ = m->hull_;
        m->finalize();
        return m;
    }

    Kind kind() const { return kind_; }
    const Interval& hull() const { return hull_; }
    double mass() const { return mass_; }
    double sign() const { return sign_; }

    // Introspection for the WeightedInterval representation.
    const Interval& interval() const { return iv_; }
    double jacobi_alpha() const { return alpha_; }
    double jacobi_beta() const { return beta_; }
    bool has_analytic_factor() const { return static_cast<bool>(g_); }
    const std::vector<PointMass>& point_masses() const { return pm_; }

    // Rank of the carrying rule: a measure backed by an N-node rule has moment
    // sequences of rank N; continuous carriers are unbounded.
    int carrier_rank() const {
        switch (kind_) {
            case Kind::WeightedInterval: return std::numeric_limits<int>::max();
            case Kind::MomentBacked: return static_cast<int>(mb_rule_.size());
            case Kind::CauchyWeighted: return base_->carrier_rank();
        }
        return std::numeric_limits<int>::max();
    }

    int max_level() const {
        switch (kind_) {
            case Kind::WeightedInterval: return detail::kMaxLevelInterval;
            case Kind::MomentBacked: return 1;
            case Kind::CauchyWeighted: return base_->max_level();
        }
        return 0;
    }

    // Effective rule at a refinement level: weights carry the full density
    // (sign, Jacobi factors, Cauchy factors, point masses).
    std::shared_ptr<const QuadRule> table(int level) const {
        {
            std::lock_guard<std::mutex> lock(mtx_);
            if (level < static_cast<int>(tables_.size()) && tables_[level]) return tables_[level];
        }
        auto built = std::make_shared<QuadRule>(build_table(level));
        std::lock_guard<std::mutex> lock(mtx_);
        if (level >= static_cast<int>(tables_.size())) tables_.resize(level + 1);
        if (!tables_[level]) tables_[level] = built;
        return tables_[level];
    }

    template <class F>
    auto integrate_level(F&& f, int level) const {
        return table(level)->sum(f);
    }

    // Adaptive node doubling until two successive levels agree.  The noise
    // floor tracks the total variation of the summands: inner transform
    // evaluations carry relative noise, so cancellation-heavy integrals
    // cannot stabilize below ~1e-13 times that scale.
    template <class F>
    auto integrate(F&& f, double tol = 1e-12) const {
        auto eval = [&](int level) {
            auto t = table(level);
            using R = decltype(f(0.0) * 1.0);
            R acc{};
            double var = 0.0;
            for (std::size_t i = 0; i < t->size(); ++i) {
                R term = t->weights[i] * f(t->nodes[i]);
                acc += term;
                var += std::abs(term);
            }
            return std::make_pair(acc, var);
        };
        if (max_level() <= 1) return eval(1).first; // fixed-rule carriers
        auto [prev, pvar] = eval(0);
        for (int lvl = 1; lvl <= max_level(); ++lvl) {
            auto [cur, cvar] = eval(lvl);
            double floor = 3e-13 * cvar;
            if (std::abs(cur - prev) <= std::max(tol * (1.0 + std::abs(cur)), floor)) return cur;
            prev = cur;
        }
        throw NonConvergence("integrate: node cap reached without stabilizing");
    }

    // Total-variation weighted sum: sum |w_i| f(x_i); used for residual scales.
    template <class F>
    double integrate_abs(F&& f, double tol = 1e-10) const {
        auto run = [&](int level) {
            auto t = table(level);
            double acc = 0.0;
            for (std::size_t i = 0; i < t->size(); ++i)
                acc += std::abs(t->weights[i]) * f(t->nodes[i]);
            return acc;
        };
        if (max_level() <= 1) return run(1);
        double prev = run(0);
        for (int lvl = 1; lvl <= max_level(); ++lvl) {
            double cur = run(lvl);
            if (std::abs(cur - prev) <= std::max(tol * (1.0 + std::abs(cur)), 3e-13 * cur))
                return cur;
            prev = cur;
        }
        throw NonConvergence("integrate_abs: node cap reached without stabilizing");
    }

    Complex cauchy(Complex z, double tol = detail::kInnerTol) const {
        require_off_support(z);
        return integrate([z](double x) { return 1.0 / (z - x); }, tol);
    }

    double cauchy(double x, double tol = detail::kInnerTol) const {
        require_off_support(Complex(x, 0.0));
        return integrate([x](double t) { return 1.0 / (x - t); }, tol);
    }

    // Moments of the pushforward under y = hull.to_local(x).
    double local_moment(int k) const {
        {
            std::lock_guard<std::mutex> lock(mtx_);
            if (k < static_cast<int>(local_moments_.size())) return local_moments_[k];
        }
        const Interval h = hull_;
        double v = integrate([&](double x) { return std::pow(h.to_local(x), k); }, 1e-13);
        std::lock_guard<std::mutex> lock(mtx_);
        if (k >= static_cast<int>(local_moments_.size())) {
            // fill any gaps lazily on demand; store only this entry's slot
            local_moments_.resize(k + 1, std::numeric_limits<double>::quiet_NaN());
        }
        local_moments_[k] = v;
        return v;
    }

    std::vector<double> local_moments(int count) const {
        std::vector<double> out(count);
        for (int k = 0; k < count; ++k) {
            double v;
            {
                std::lock_guard<std::mutex> lock(mtx_);
                v = (k < static_cast<int>(local_moments_.size())) ? local_moments_[k]
                                                                  : std::numeric_limits<double>::quiet_NaN();
            }
            out[k] = std::isnan(v) ? local_moment(k) : v;
        }
        return out;
    }

    // Raw moments m_k = int x^k dmu.
    double moment(int k) const {
        const double c = hull_.mid(), h = hull_.half();
        double acc = 0.0, binom = 1.0;
        for (int i = 0; i <= k; ++i) {
            acc += binom * std::pow(c, k - i) * std::pow(h, i) * local_moment(i);
            binom *= double(k - i) / double(i + 1);
        }
        return acc;
    }

    std::vector<double> moments(int count) const {
        if (count < 1) throw Error("moments: count must be >= 1");
        std::vector<double> out(count);
        for (int k = 0; k < count; ++k) out[k] = moment(k);
        return out;
    }

private:
    Measure() = default;

    void require_off_support(Complex z) const {
        double dx = distance(hull_, z.real());
        double d = std::hypot(dx, z.imag());
        if (d < 1e-8 * hull_.length())
            throw PointOnSupport("evaluation point within epsilon of the support hull");
    }

    double factor_product(double x) const {
        double v = 1.0;
        for (const auto& f : factors_) {
            v *= f.constant;
            if (f.fn) v *= f.fn(x);
            if (f.numerator) v *= f.numerator->cauchy(x);
            if (f.denominator) v /= f.denominator->cauchy(x);
        }
        return v;
    }

    QuadRule build_table(int level) const {
        switch (kind_) {
            case Kind::WeightedInterval: {
                const int n = detail::kBaseNodes << std::min(level, detail::kMaxLevelInterval);
                QuadRule r;
                if (alpha_ == 0.0 && beta_ == 0.0) {
                    r = gauss_legendre(n, iv_);
                    for (std::size_t i = 0; i < r.size(); ++i)
                        r.weights[i] *= sgn_ * (g_ ? g_(r.nodes[i]) : 1.0);
                } else {
                    // x = mid - half*cos(theta) removes the endpoint
                    // singularities of the Jacobi weight.
                    QuadRule th = gauss_legendre(n, Interval(0.0, M_PI));
                    const double h = iv_.half();
                    const double pref = std::pow(2.0 * h, alpha_ + beta_ + 1.0);
                    r.nodes.resize(n);
                    r.weights.resize(n);
                    for (int i = 0; i < n; ++i) {
                        double t = th.nodes[i];
                        double x = iv_.mid() - h * std::cos(t);
                        double w = pref * std::pow(std::cos(0.5 * t), 2.0 * alpha_ + 1.0) *
                                   std::pow(std::sin(0.5 * t), 2.0 * beta_ + 1.0);
                        r.nodes[i] = x;
                        r.weights[i] = th.weights[i] * w * sgn_ * (g_ ? g_(x) : 1.0);
                    }
                }
                for (const auto& p : pm_) {
                    r.nodes.push_back(p.location);
                    r.weights.push_back(p.mass);
                }
                return r;
            }
            case Kind::MomentBacked: {
                if (level >= 1 || mb_rule_.size() == 1) return mb_rule_;
                // leave-one-out companion rule for error estimation
                return reduced_rule();
            }
            case Kind::CauchyWeighted: {
                auto base = base_->table(level);
                QuadRule r = *base;
                for (std::size_t i = 0; i < r.size(); ++i)
                    r.weights[i] *= factor_product(r.nodes[i]);
                return r;
            }
        }
        throw Error("unreachable");
    }

    // Gauss rule with one node fewer, rebuilt from the rule's own moments.
    QuadRule reduced_rule() const;

    void finalize() {
        mass_ = integrate([](double) { return 1.0; }, 1e-12);
        // constant-sign check on a representative node set
        auto t = table(std::min(1, max_level()));
        int sgn = 0;
        for (double w : t->weights) {
            if (w == 0.0) continue;
            int s = w > 0 ? 1 : -1;
            if (sgn == 0) sgn = s;
            else if (sgn != s)
                throw SignChangeDetected("effective density changes sign on the node set");
        }
        sign_ = sgn >= 0 ? 1.0 : -1.0;
    }

    Kind kind_ = Kind::WeightedInterval;
    Interval iv_;
    double alpha_ = 0.0, beta_ = 0.0, sgn_ = 1.0;
    std::function<double(double)> g_;
    std::vector<PointMass> pm_;
    QuadRule mb_rule_;
    MeasurePtr base_;
    std::vector<CauchyFactor> factors_;
    Interval hull_;
    double mass_ = 0.0;
    double sign_ = 1.0;

    mutable std::mutex mtx_;
    mutable std::vector<std::shared_ptr<const QuadRule>> tables_;
    mutable std::vector<double> local_moments_;
};

// --- moment machinery -------------------------------------------------------

// N-node Gauss rule from the first 2N moments of a constant-sign measure.
// Chebyshev algorithm for the recurrence, then the Jacobi matrix spectrum.
inline QuadRule gauss_from_moments(const std::vector<double>& moms) {
    if (moms.size() < 2 || moms.size() % 2 != 0)
        throw Error("gauss_from_moments: need an even number of moments, at least 2");
    const int N = static_cast<int>(moms.size()) / 2;
    if (moms[0] == 0.0) throw IndefiniteHankel("zero total mass");
    const double sgn = moms[0] > 0 ? 1.0 : -1.0;
    std::vector<double> nu(moms.size());
    for (std::size_t i = 0; i < moms.size(); ++i) nu[i] = sgn * moms[i];

    // Chebyshev algorithm: sigma_{k,l} rows for k-2, k-1, k.
    std::vector<double> alpha(N), beta(N);
    std::vector<double> sig_mm(2 * N, 0.0); // sigma_{k-2, .}
    std::vector<double> sig_m = nu;         // sigma_{k-1, .}
    alpha[0] = nu[1] / nu[0];
    beta[0] = nu[0];
    for (int k = 1; k < N; ++k) {
        std::vector<double> sig(2 * N, 0.0);
        for (int l = k; l <= 2 * N - k - 1; ++l)
            sig[l] = sig_m[l + 1] - alpha[k - 1] * sig_m[l] -
                     (k >= 2 ? beta[k - 1] * sig_mm[l] : 0.0);
        if (!(std::abs(sig_m[k - 1]) > 0.0) || !(std::abs(sig[k]) > 0.0))
            throw IndefiniteHankel("breakdown in moment recurrence");
        alpha[k] = sig[k + 1] / sig[k] - sig_m[k] / sig_m[k - 1];
        beta[k] = sig[k] / sig_m[k - 1];
        if (!(beta[k] > 0.0) || !std::isfinite(alpha[k]))
            throw IndefiniteHankel("moment sequence is not of constant sign at this depth");
        sig_mm = std::move(sig_m);
        sig_m = std::move(sig);
    }

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        J(i, i) = alpha[i];
        if (i + 1 < N) {
            double b = std::sqrt(beta[i + 1]);
            J(i, i + 1) = b;
            J(i + 1, i) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw IndefiniteHankel("Jacobi matrix eigensolve failed");
    QuadRule r;
    r.nodes.resize(N);
    r.weights.resize(N);
    for (int i = 0; i < N; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        r.weights[i] = sgn * beta[0] * v0 * v0;
    }
    return r;
}

inline QuadRule Measure::reduced_rule() const {
    const int N = static_cast<int>(mb_rule_.size());
    const int M = N - 1;
    std::vector<double> moms(2 * M);
    for (int k = 0; k < 2 * M; ++k)
        moms[k] = mb_rule_.sum([&](double x) { return std::pow(iv_.to_local(x), k); });
    QuadRule local = gauss_from_moments(moms);
    QuadRule out;
    out.nodes.resize(M);
    out.weights.resize(M);
    for (int i = 0; i < M; ++i) {
        out.nodes[i] = iv_.from_local(local.nodes[i]);
        out.weights[i] = local.weights[i];
    }
    return out;
}

// Nikishin product <a, b>: d<a,b>(x) = b^(x) da(x).
inline MeasurePtr product(const MeasurePtr& a, const MeasurePtr& b) {
    if (!a->hull().disjoint(b->hull()))
        throw OverlappingSupports("product: support hulls intersect");
    return Measure::weighted(a, {CauchyFactor{b, nullptr, 1.0}});
}

inline MeasurePtr weighted_derivate(const MeasurePtr& base, std::vector<CauchyFactor> factors) {
    return Measure::weighted(base, std::move(factors));
}

struct InverseMeasure {
    double a = 0.0; // ell(z) = a z + b, a = 1/|s|
    double b = 0.0;
    MeasurePtr tau;
};

// Inverse measure: 1/s^(z) = ell(z) + tau^(z), computed by triangular Laurent
// inversion of the moment series in the hull frame.
inline InverseMeasure inverse_measure(const MeasurePtr& s, int tau_nodes = 12) {
    // inverting an N-node carrier yields an (N-1)-point measure exactly
    int N = tau_nodes;
    if (s->carrier_rank() <= N) N = std::max(1, s->carrier_rank() - 1);
    const auto ml = s->local_moments(2 * N + 2);
    const double m0 = ml[0];
    if (std::abs(m0) < 1e-14) throw SingularInversion("inverse_measure: zero total mass");

    std::vector<double> bcoef(2 * N + 2, 0.0);
    bcoef[0] = 1.0;
    for (int k = 1; k <= 2 * N + 1; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= k; ++i) acc += (ml[i] / m0) * bcoef[k - i];
        bcoef[k] = -acc;
    }
    std::vector<double> tau_local(2 * N);
    for (int l = 0; l < 2 * N; ++l) tau_local[l] = bcoef[l + 2] / m0;

    QuadRule local = gauss_from_moments(tau_local);
    const Interval h = s->hull();
    QuadRule rule;
    rule.nodes.resize(local.size());
    rule.weights.resize(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        rule.nodes[i] = h.from_local(local.nodes[i]);
        rule.weights[i] = h.half() * h.half() * local.weights[i];
    }
    InverseMeasure out;
    out.a = 1.0 / m0;
    out.b = -h.mid() / m0 + h.half() * bcoef[1] / m0;
    out.tau = Measure::from_rule(std::move(rule), h);
    return out;
}

} // namespace niklab
