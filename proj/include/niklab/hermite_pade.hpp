#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "niklab/hp.hpp"
#include "niklab/nikishin.hpp"
#include "niklab/polynomial.hpp"

namespace niklab {

// Pair of multi-indices (n1; n2) with |n1| = |n2| + 1 when used for solving.
struct MultiIndex2 {
    std::vector<int> n1;
    std::vector<int> n2;

    int total1() const { return std::accumulate(n1.begin(), n1.end(), 0); }
    int total2() const { return std::accumulate(n2.begin(), n2.end(), 0); }

    void validate_mixed() const {
        for (int v : n1)
            if (v < 0) throw Error("multi-index components must be nonnegative");
        for (int v : n2)
            if (v < 0) throw Error("multi-index components must be nonnegative");
        if (total1() != total2() + 1)
            throw Error("mixed solving requires |n1| = |n2| + 1");
    }

    std::string str() const {
        auto one = [](const std::vector<int>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "|" : "") + std::to_string(v[i]);
            return s;
        };
        return "(" + one(n1) + ";" + one(n2) + ")";
    }
};

// Coefficient vectors a_{n,0..m1} in the Chebyshev frame of Delta_0;
// evaluates A_n(z) = a_0(z) + sum_k a_k(z) s^1_{1,k}^(z).
class MixedForm {
public:
    MixedForm(MixedSystem sys, MultiIndex2 n, std::vector<ChebPoly> coeffs)
        : sys_(std::move(sys)), n_(std::move(n)), coeffs_(std::move(coeffs)) {}

    const MixedSystem& system() const { return sys_; }
    const MultiIndex2& index() const { return n_; }
    const std::vector<ChebPoly>& coeffs() const { return coeffs_; }

    template <class Z>
    Z operator()(Z z) const {
        Z acc{};
        for (int k = 0; k < static_cast<int>(coeffs_.size()); ++k) {
            if (coeffs_[k].degree() < 0) continue;
            acc += coeffs_[k](z) * sys_.f1(k, z);
        }
        return acc;
    }

    // Evaluate with precomputed values f1k[k] = s^1_{1,k}^(z).
    template <class Z>
    Z eval_with(const std::vector<Z>& f1k, Z z) const {
        Z acc{};
        for (int k = 0; k < static_cast<int>(coeffs_.size()); ++k)
            acc += coeffs_[k](z) * f1k[k];
        return acc;
    }

    MixedForm scaled(double s) const {
        auto c = coeffs_;
        for (auto& p : c) p *= s;
        return MixedForm(sys_, n_, std::move(c));
    }

private:
    MixedSystem sys_;
    MultiIndex2 n_;
    std::vector<ChebPoly> coeffs_;
};

struct NormalityReport {
    MultiIndex2 index;
    std::vector<int> achieved_degrees;
    int nullity = 0;
    double singular_gap = 0.0;
    bool normal = false;
    std::string error;
};

struct SolveInfo {
    int nullity = 1;
    double singular_gap = 0.0;
    std::vector<int> achieved_degrees;
    bool normal = false;
    double residual = 0.0;       // max orthogonality residual
    double residual_scale = 1.0; // |M|_F * |c|
};

// Solves the mixed-type problem over one MixedSystem, caching the weighted
// Chebyshev moments t_{j,k,d} = int T_d(y) s^2_{1,j}^ s^1_{1,k}^ dsigma_0.
class HermitePadeSolver {
public:
    explicit HermitePadeSolver(MixedSystem sys)
        : sys_(std::move(sys)), frame_(sys_.base()->hull()), cache_(std::make_shared<Cache>()) {}

    const MixedSystem& system() const { return sys_; }
    const Interval& frame() const { return frame_; }

    // Escalation chain: default quadrature tier, fine-quadrature tier, then
    // 50-digit certification when the rank stays unresolved in doubles (the
    // singular values of these matrices decay geometrically, so at moderate
    // sizes the smallest one falls below double-precision noise).
    MixedForm solve(const MultiIndex2& n, SolveInfo* info = nullptr) const {
        n.validate_mixed();
        if (static_cast<int>(n.n1.size()) != sys_.m1() + 1 ||
            static_cast<int>(n.n2.size()) != sys_.m2() + 1)
            throw Error("multi-index does not match the system dimensions");
        SolveInfo local;
        SolveInfo* out = info ? info : &local;
        MixedForm f0 = solve_tier(n, 0, out);
        if (out->normal) return f0;
        MixedForm f1 = solve_tier(n, 1, out);
        if (out->normal) return f1;
        if (hp_supported()) return solve_hp(n, out);
        return f1; // honest: nullity and degrees stay as reported
    }

    std::vector<NormalityReport> scan(int max_total) const {
        if (max_total < 1) throw Error("normality_scan: max_total must be >= 1");
        std::vector<NormalityReport> out;
        for (int N = 1; N <= max_total; ++N) {
            auto shapes1 = compositions(N, sys_.m1() + 1);
            auto shapes2 = compositions(N - 1, sys_.m2() + 1);
            for (const auto& a : shapes1)
                for (const auto& b : shapes2) {
                    MultiIndex2 n{a, b};
                    NormalityReport rep;
                    rep.index = n;
                    try {
                        SolveInfo info;
                        solve(n, &info);
                        rep.achieved_degrees = info.achieved_degrees;
                        rep.nullity = info.nullity;
                        rep.singular_gap = info.singular_gap;
                        rep.normal = info.normal;
                    } catch (const Error& e) {
                        rep.error = e.what();
                    }
                    out.push_back(std::move(rep));
                }
        }
        return out;
    }

    // All compositions of total into `parts` nonnegative parts, lexicographic.
    static std::vector<std::vector<int>> compositions(int total, int parts) {
        std::vector<std::vector<int>> out;
        std::vector<int> cur(parts, 0);
        struct Rec {
            int parts;
            std::vector<std::vector<int>>& out;
            std::vector<int>& cur;
            void go(int pos, int left) {
                if (pos == parts - 1) {
                    cur[pos] = left;
                    out.push_back(cur);
                    return;
                }
                for (int v = 0; v <= left; ++v) {
                    cur[pos] = v;
                    go(pos + 1, left - v);
                }
            }
        } rec{parts, out, cur};
        rec.go(0, total);
        return out;
    }

    // t_{j,k,d} for d = 0..dmax (inclusive), at the given precision tier.
    const std::vector<double>& weighted_moments(int j, int k, int dmax, int tier = 0) const {
        std::lock_guard<std::mutex> lock(cache_->mtx);
        auto& slot = cache_->tmom[{j, k, tier}];
        if (static_cast<int>(slot.size()) >= dmax + 1) return slot;
        slot = compute_weighted_moments(j, k, dmax, tier);
        return slot;
    }

private:
    struct Cache {
        std::mutex mtx;
        std::map<std::tuple<int, int, int>, std::vector<double>> tmom;
        // node values of f1/f2 per (side, index, level)
        std::map<std::tuple<int, int, int>, std::vector<double>> nodevals;
        std::shared_ptr<void> hp_oracle; // hp::MomentOracle, type-erased
        bool hp_checked = false;
        bool hp_ok = false;
    };

    const std::vector<double>& node_values(int side, int idx, int level) const {
        auto key = std::make_tuple(side, idx, level);
        auto it = cache_->nodevals.find(key);
        if (it != cache_->nodevals.end()) return it->second;
        auto tab = sys_.base()->table(level);
        std::vector<double> vals(tab->size(), 1.0);
        if (idx > 0) {
            MeasurePtr chain = (side == 1) ? sys_.chain1(idx) : sys_.chain2(idx);
            for (std::size_t i = 0; i < tab->size(); ++i) vals[i] = chain->cauchy(tab->nodes[i]);
        }
        return cache_->nodevals.emplace(key, std::move(vals)).first->second;
    }

    std::vector<double> compute_weighted_moments(int j, int k, int dmax, int tier) const {
        const double tol = (tier == 0) ? 1e-12 : 1e-14;
        std::vector<double> prev = level_moments_fixed(j, k, dmax, 0);
        for (int lvl = 1; lvl <= sys_.base()->max_level(); ++lvl) {
            std::vector<double> cur = level_moments_fixed(j, k, dmax, lvl);
            double diff = 0.0, scale = 0.0;
            for (int d = 0; d <= dmax; ++d) {
                diff = std::max(diff, std::abs(cur[d] - prev[d]));
                scale = std::max(scale, std::abs(cur[d]));
            }
            if (diff <= tol * (1.0 + scale)) return cur;
            prev = std::move(cur);
        }
        throw NonConvergence("weighted moment table did not stabilize");
    }

    // Chebyshev values by recurrence, one pass per level.
    std::vector<double> level_moments_fixed(int j, int k, int dmax, int level) const {
        auto tab = sys_.base()->table(level);
        const auto& f2 = node_values(2, j, level);
        const auto& f1 = node_values(1, k, level);
        const std::size_t n = tab->size();
        std::vector<double> y(n), T0(n, 1.0), T1(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = frame_.to_local(tab->nodes[i]);
        for (std::size_t i = 0; i < n; ++i) T1[i] = y[i];
        std::vector<double> t(dmax + 1, 0.0);
        for (int d = 0; d <= dmax; ++d) {
            double acc = 0.0;
            if (d == 0) {
                for (std::size_t i = 0; i < n; ++i) acc += tab->weights[i] * f2[i] * f1[i];
            } else if (d == 1) {
                for (std::size_t i = 0; i < n; ++i) acc += tab->weights[i] * f2[i] * f1[i] * T1[i];
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    double Tn = 2.0 * y[i] * T1[i] - T0[i];
                    T0[i] = T1[i];
                    T1[i] = Tn;
                    acc += tab->weights[i] * f2[i] * f1[i] * Tn;
                }
            }
            t[d] = acc;
        }
        return t;
    }

    // row blocks (j, nu), column blocks (k, i); T_nu T_i = (T_{nu+i} + T_{|nu-i|})/2
    Eigen::MatrixXd assemble(const MultiIndex2& n, int tier) const {
        const int rows = n.total2();
        const int cols = n.total1();
        Eigen::MatrixXd M(std::max(rows, 1), cols);
        M.setZero();
        int r = 0;
        for (int j = 0; j < static_cast<int>(n.n2.size()); ++j) {
            if (n.n2[j] == 0) continue;
            int dmax = (n.n2[j] - 1) + *std::max_element(n.n1.begin(), n.n1.end()) - 1;
            for (int k = 0; k < static_cast<int>(n.n1.size()); ++k) {
                if (n.n1[k] == 0) continue;
                const auto& t = weighted_moments(j, k, std::max(dmax, 0), tier);
                int c0 = 0;
                for (int kk = 0; kk < k; ++kk) c0 += n.n1[kk];
                for (int nu = 0; nu < n.n2[j]; ++nu)
                    for (int i = 0; i < n.n1[k]; ++i)
                        M(r + nu, c0 + i) = 0.5 * (t[nu + i] + t[std::abs(nu - i)]);
            }
            r += n.n2[j];
        }
        return M;
    }

    MixedForm solve_tier(const MultiIndex2& n, int tier, SolveInfo* info) const {
        const int rows = n.total2();
        const int cols = n.total1();
        Eigen::MatrixXd M = assemble(n, tier);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double smax = (rows > 0 && sv.size() > 0) ? sv(0) : 0.0;
        // Singular values below the quadrature noise floor carry no rank
        // information; the cut is keyed to entry accuracy, not to an absolute
        // condition-number budget.
        const double noise = ((tier == 0) ? 1e-12 : 1e-13) * (smax > 0 ? smax : 1.0);
        int kept = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) >= noise) ++kept;
        const int nullity = cols - kept;
        double smallest_kept = kept > 0 ? sv(kept - 1) : smax;
        double largest_dropped = (kept < sv.size()) ? sv(kept) : 0.0;
        const double floor = std::numeric_limits<double>::epsilon() * (smax > 0 ? smax : 1.0);
        double gap = smallest_kept / std::max(largest_dropped, floor);
        if (rows == 0) gap = std::numeric_limits<double>::infinity();

        Eigen::VectorXd c = svd.matrixV().col(cols - 1);
        return pack(n, c, nullity, gap, M, info, nullptr);
    }

    MixedForm pack(const MultiIndex2& n, Eigen::VectorXd c, int nullity, double gap,
                   const Eigen::MatrixXd& M, SolveInfo* info,
                   const std::vector<int>* achieved_override) const {
        c.normalize();
        // deterministic orientation: coefficient of largest magnitude is > 0
        int imax = 0;
        for (int i = 1; i < c.size(); ++i)
            if (std::abs(c(i)) > std::abs(c(imax))) imax = i;
        if (c(imax) < 0) c = -c;

        std::vector<ChebPoly> coeffs;
        int pos = 0;
        for (int k = 0; k < static_cast<int>(n.n1.size()); ++k) {
            std::vector<double> cv(std::max(n.n1[k], 0), 0.0);
            for (int i = 0; i < n.n1[k]; ++i) cv[i] = c(pos + i);
            pos += n.n1[k];
            coeffs.emplace_back(frame_, std::move(cv));
        }

        if (info) {
            info->nullity = nullity;
            info->singular_gap = gap;
            if (achieved_override) {
                info->achieved_degrees = *achieved_override;
            } else {
                info->achieved_degrees.assign(n.n1.size(), -1);
                const double lead_tol = 1e-6; // times ||c|| = 1
                for (int k = 0; k < static_cast<int>(n.n1.size()); ++k) {
                    for (int i = n.n1[k] - 1; i >= 0; --i)
                        if (std::abs(coeffs[k].c[i]) > lead_tol) {
                            info->achieved_degrees[k] = i;
                            break;
                        }
                }
            }
            info->normal = (nullity == 1);
            for (int k = 0; k < static_cast<int>(n.n1.size()); ++k)
                if (n.n1[k] >= 1 && info->achieved_degrees[k] != n.n1[k] - 1) info->normal = false;
            Eigen::VectorXd res = M * c;
            info->residual = M.rows() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
            info->residual_scale = M.norm() * c.norm();
        }
        return MixedForm(sys_, n, std::move(coeffs));
    }

    bool hp_supported() const;
    MixedForm solve_hp(const MultiIndex2& n, SolveInfo* info) const;

    MixedSystem sys_;
    Interval frame_;
    std::shared_ptr<Cache> cache_;
};

// Monic normalization per the min-component selection rule; j is the last
// index attaining min(n1) (equivalently m1 itself when n1[m1] is minimal).
inline int monic_slot(const std::vector<int>& n1) {
    int mn = *std::min_element(n1.begin(), n1.end());
    int j = 0;
    for (int k = 0; k < static_cast<int>(n1.size()); ++k)
        if (n1[k] == mn) j = k;
    return j;
}

inline MixedForm monic_normalize(const MixedForm& form) {
    const auto& n1 = form.index().n1;
    if (*std::min_element(n1.begin(), n1.end()) < 1)
        throw NotNormal("monic normalization needs every n1 component >= 1");
    int j = monic_slot(n1);
    const ChebPoly& aj = form.coeffs()[j];
    // leading coefficient of degree n1[j]-1 in the global variable
    int want = n1[j] - 1;
    if (aj.degree() != want) throw NotNormal("form does not attain the required degree");
    double lead = ChebPoly(aj.frame, aj.c).leading_monomial();
    if (std::abs(lead) < 1e-12) throw ZeroLeadingCoefficient("vanishing leading coefficient");
    return form.scaled(1.0 / lead);
}

// R_{n,j}(z) = int s^2_{1,j}^(x) A_n(x) dsigma_0(x) / (z - x).
inline Complex remainder(const MixedForm& form, int j, Complex z) {
    const auto& sys = form.system();
    return sys.base()->integrate(
        [&](double x) {
            double w = sys.f2(j, x);
            return w * form(x) / (z - x);
        },
        1e-13);
}

// Sign-change zeros of A_n inside the open hull of supp sigma_0.
inline std::vector<double> zeros_in_hull(const MixedForm& form, int grid_points = 2048) {
    const auto& sys = form.system();
    const Interval hull = sys.base()->hull();
    const double eps = 1e-9 * hull.length();
    const double a = hull.a + eps, b = hull.b - eps;
    const int expected = form.index().total2();

    const int m1 = sys.m1();
    std::vector<std::vector<double>> f1vals(m1 + 1);
    std::vector<double> xs(grid_points);
    for (int i = 0; i < grid_points; ++i) xs[i] = a + (b - a) * i / (grid_points - 1.0);
    for (int k = 0; k <= m1; ++k) {
        f1vals[k].resize(grid_points, 1.0);
        if (k >= 1) {
            auto chain = sys.chain1(k);
            for (int i = 0; i < grid_points; ++i) f1vals[k][i] = chain->cauchy(xs[i]);
        }
    }
    auto eval = [&](double x) {
        double acc = 0.0;
        for (int k = 0; k <= m1; ++k) {
            double fk = (k == 0) ? 1.0 : sys.chain1(k)->cauchy(x);
            acc += form.coeffs()[k](x) * fk;
        }
        return acc;
    };
    std::vector<double> vals(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        double acc = 0.0;
        for (int k = 0; k <= m1; ++k) acc += form.coeffs()[k](xs[i]) * f1vals[k][i];
        vals[i] = acc;
    }

    std::vector<double> roots;
    for (int i = 0; i + 1 < grid_points; ++i) {
        if (vals[i] == 0.0) continue;
        if (vals[i] * vals[i + 1] < 0.0) {
            double lo = xs[i], hi = xs[i + 1], flo = vals[i];
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = eval(mid);
                if (flo * fm <= 0.0) hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
                if (hi - lo < 1e-12) break;
            }
            roots.push_back(0.5 * (lo + hi));
        }
    }
    if (static_cast<int>(roots.size()) != expected)
        throw ZeroCountMismatch("found " + std::to_string(roots.size()) + " sign changes, expected " +
                                std::to_string(expected) + " at index " + form.index().str() +
                                " (contradicts the orthogonality zero count)");
    return roots;
}

// Type II embedding: S1 = N(sigma_0), S2 = sys; n1 = (|n~|+1), n2 = n~.
struct Type2Pade {
    MixedForm form;       // monic Q_n as the single coefficient a_0
    ChebPoly Q;
    std::vector<ChebPoly> P; // P_{n,k}, k = 0..m
};

inline ChebPoly cheb_from_local_monomial(const Interval& frame, const std::vector<double>& mono);

inline Type2Pade type2_pade(const NikishinSystem& sys, const std::vector<int>& ntilde) {
    NikishinSystem s1({sys.generator(0)});
    MixedSystem mix(s1, sys);
    MultiIndex2 n;
    int total = std::accumulate(ntilde.begin(), ntilde.end(), 0);
    if (total < 1) throw Error("type2_pade: |n| must be >= 1");
    n.n1 = {total + 1};
    n.n2 = ntilde;
    HermitePadeSolver solver(mix);
    MixedForm f = monic_normalize(solver.solve(n));
    ChebPoly Q = f.coeffs()[0];

    // P_k(z) = int (Q(z) - Q(x)) / (z - x) ds_{0,k}(x), via local moments
    const Interval frame = Q.frame;
    auto qloc = Q.monomial_local();
    std::vector<ChebPoly> P;
    for (int k = 0; k <= sys.m(); ++k) {
        MeasurePtr s0k = sys.s(0, k);
        auto ml = s0k->local_moments(std::max<int>(1, qloc.size()));
        std::vector<double> pl(std::max<std::size_t>(qloc.size(), 1) - 1, 0.0);
        for (std::size_t a = 0; a + 1 < qloc.size(); ++a) {
            double acc = 0.0;
            for (std::size_t i = a + 1; i < qloc.size(); ++i) acc += qloc[i] * ml[i - 1 - a];
            pl[a] = acc / frame.half();
        }
        P.push_back(cheb_from_local_monomial(frame, pl));
    }
    return Type2Pade{std::move(f), std::move(Q), std::move(P)};
}

// y^a = 2^{1-a} sum_{k = a mod 2} C(a, (a-k)/2) T_k (halved at k = 0).
inline ChebPoly cheb_from_local_monomial(const Interval& frame, const std::vector<double>& mono) {
    if (mono.empty()) return ChebPoly(frame, {0.0});
    int n = static_cast<int>(mono.size()) - 1;
    std::vector<double> c(n + 1, 0.0);
    for (int a = 0; a <= n; ++a) {
        if (mono[a] == 0.0) continue;
        double scale = std::pow(2.0, 1 - a);
        if (a == 0) scale = 1.0;
        double binom = 1.0; // C(a, 0)
        for (int j = 0; 2 * j <= a; ++j) {
            int k = a - 2 * j;
            double term = scale * binom;
            if (k == 0) term *= 0.5;
            if (a == 0) term = 1.0;
            c[k] += mono[a] * term;
            binom *= double(a - j) / double(j + 1);
        }
    }
    return ChebPoly(frame, std::move(c));
}

// --- high-precision tier -------------------------------------------------------

inline bool HermitePadeSolver::hp_supported() const {
    std::lock_guard<std::mutex> lock(cache_->mtx);
    if (!cache_->hp_checked) {
        cache_->hp_ok = hp::MomentOracle::supported(sys_);
        cache_->hp_checked = true;
    }
    return cache_->hp_ok;
}

inline MixedForm HermitePadeSolver::solve_hp(const MultiIndex2& n, SolveInfo* info) const {
    std::shared_ptr<hp::MomentOracle> oracle;
    {
        std::lock_guard<std::mutex> lock(cache_->mtx);
        if (!cache_->hp_oracle) cache_->hp_oracle = std::make_shared<hp::MomentOracle>(sys_);
        oracle = std::static_pointer_cast<hp::MomentOracle>(cache_->hp_oracle);
    }
    const int rows = n.total2();
    const int cols = n.total1();
    std::vector<std::vector<float50>> col(cols, std::vector<float50>(std::max(rows, 1), 0));
    int r = 0;
    for (int j = 0; j < static_cast<int>(n.n2.size()); ++j) {
        if (n.n2[j] == 0) continue;
        int dmax = (n.n2[j] - 1) + *std::max_element(n.n1.begin(), n.n1.end()) - 1;
        int c0 = 0;
        for (int k = 0; k < static_cast<int>(n.n1.size()); ++k) {
            if (n.n1[k] == 0) { continue; }
            const auto& t = oracle->weighted_moments(j, k, std::max(dmax, 0));
            int base = 0;
            for (int kk = 0; kk < k; ++kk) base += n.n1[kk];
            for (int nu = 0; nu < n.n2[j]; ++nu)
                for (int i = 0; i < n.n1[k]; ++i)
                    col[base + i][r + nu] = (t[nu + i] + t[std::abs(nu - i)]) / 2;
        }
        (void)c0;
        r += n.n2[j];
    }
    auto svd = hp::one_sided_jacobi(std::move(col), std::max(rows, 1));
    const float50 smax = svd.sigma[0];
    const float50 drop = float50("1e-40") * smax;
    int kept = 0;
    for (const auto& s : svd.sigma)
        if (s >= drop && rows > 0) ++kept;
    const int nullity = cols - kept;
    float50 smallest_kept = kept > 0 ? svd.sigma[kept - 1] : smax;
    float50 largest_dropped = (kept < cols) ? svd.sigma[kept] : float50(0);
    float50 gfloor = float50("1e-45") * smax;
    float50 gap50 = smallest_kept / (largest_dropped > gfloor ? largest_dropped : gfloor);
    double gap = gap50 > float50("1e300") ? 1e300 : static_cast<double>(gap50);
    if (rows == 0) gap = std::numeric_limits<double>::infinity();

    if (nullity > 1)
        throw NullspaceTooLarge("nullity " + std::to_string(nullity) + " at index " + n.str() +
                                " certified in high precision; contradicts mixed-type perfectness");

    const auto& v = svd.V[cols - 1];
    float50 norm = 0;
    for (const auto& x : v) norm += x * x;
    norm = sqrt(norm);
    // certified degree attainment: the tier resolves coefficients to ~1e-45
    // relative, so 1e-20 separates a true zero from a genuinely tiny leader
    std::vector<int> achieved(n.n1.size(), -1);
    {
        const float50 lead_tol = float50("1e-20") * norm;
        int pos = 0;
        for (int k = 0; k < static_cast<int>(n.n1.size()); ++k) {
            for (int i = n.n1[k] - 1; i >= 0; --i)
                if (abs(v[pos + i]) > lead_tol) {
                    achieved[k] = i;
                    break;
                }
            pos += n.n1[k];
        }
    }
    Eigen::VectorXd c(cols);
    for (int i = 0; i < cols; ++i) c(i) = static_cast<double>(v[i]);
    return pack(n, c, nullity, gap, assemble(n, 1), info, &achieved);
}

// --- AT-system zero counting -------------------------------------------------

struct ZeroCountConfig {
    Interval probe;          // real interval disjoint from Delta_1
    double margin = 0.5;     // rectangle inflation around the probe interval
    int grid = 1024;
    int contour_samples = 4096;
    std::uint64_t seed = 20240901;
};

// Max observed zero count of p_0 + sum p_k s_{1,k}^ over random draws, via a
// sign grid on the probe interval and an argument-principle winding count on
// a rectangle in C \ Delta_1.
inline int at_zero_count(const NikishinSystem& tail, const std::vector<int>& n, int trials,
                         const ZeroCountConfig& cfg) {
    if (trials < 1) throw Error("at_zero_count: trials must be >= 1");
    const int m = tail.m(); // functions 1, s_{1,1}^ .. s_{1,m}^
    if (static_cast<int>(n.size()) != m + 1) throw Error("at_zero_count: bad index length");
    if (!cfg.probe.disjoint(tail.generator(0)->hull()))
        throw Error("probe interval must be disjoint from Delta_1");

    // precompute transforms on the grid and on candidate contours
    std::vector<double> xs(cfg.grid);
    for (int i = 0; i < cfg.grid; ++i)
        xs[i] = cfg.probe.a + cfg.probe.length() * i / (cfg.grid - 1.0);
    std::vector<std::vector<double>> fgrid(m + 1, std::vector<double>(cfg.grid, 1.0));
    for (int k = 1; k <= m; ++k) {
        auto chain = tail.s(0, k - 1);
        for (int i = 0; i < cfg.grid; ++i) fgrid[k][i] = chain->cauchy(xs[i]);
    }

    auto contour_points = [&](double margin) {
        std::vector<Complex> pts;
        pts.reserve(cfg.contour_samples);
        const double x0 = cfg.probe.a - margin, x1 = cfg.probe.b + margin;
        const double y0 = -margin, y1 = margin;
        const int per = cfg.contour_samples / 4;
        for (int i = 0; i < per; ++i) pts.emplace_back(x0 + (x1 - x0) * i / per, y0);
        for (int i = 0; i < per; ++i) pts.emplace_back(x1, y0 + (y1 - y0) * i / per);
        for (int i = 0; i < per; ++i) pts.emplace_back(x1 - (x1 - x0) * i / per, y1);
        for (int i = 0; i < per; ++i) pts.emplace_back(x0, y1 - (y1 - y0) * i / per);
        return pts;
    };

    // candidate margins; contour moved slightly if a zero is hit
    std::vector<double> margins = {cfg.margin, cfg.margin * 1.13, cfg.margin * 0.87,
                                   cfg.margin * 1.29, cfg.margin * 0.71};
    std::vector<std::vector<Complex>> contours;
    std::vector<std::vector<std::vector<Complex>>> fcont; // [margin][k][pt]
    for (double mg : margins) {
        auto pts = contour_points(mg);
        bool off = true;
        for (const auto& z : pts) {
            double d = std::hypot(distance(tail.generator(0)->hull(), z.real()), z.imag());
            if (d <= 0.05) { off = false; break; }
        }
        if (!off) continue;
        std::vector<std::vector<Complex>> vals(m + 1, std::vector<Complex>(pts.size(), Complex(1.0)));
        for (int k = 1; k <= m; ++k) {
            auto chain = tail.s(0, k - 1);
            for (std::size_t i = 0; i < pts.size(); ++i) vals[k][i] = chain->cauchy(pts[i]);
        }
        contours.push_back(std::move(pts));
        fcont.push_back(std::move(vals));
    }
    if (contours.empty()) throw Error("no admissible contour around the probe interval");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int max_count = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<Poly> p(m + 1);
        for (int k = 0; k <= m; ++k) {
            std::vector<double> cv(std::max(n[k], 0));
            for (auto& v : cv) v = U(rng);
            p[k] = Poly(std::move(cv));
        }
        // sign grid count
        int sign_changes = 0;
        double prev = 0.0;
        for (int i = 0; i < cfg.grid; ++i) {
            double acc = 0.0;
            for (int k = 0; k <= m; ++k)
                if (!p[k].zero()) acc += p[k](xs[i]) * fgrid[k][i];
            if (i > 0 && prev * acc < 0.0) ++sign_changes;
            if (acc != 0.0) prev = acc;
        }
        // winding count, first contour that stays away from zeros
        int winding = -1;
        for (std::size_t ci = 0; ci < contours.size(); ++ci) {
            const auto& pts = contours[ci];
            double total_arg = 0.0;
            double minmod = std::numeric_limits<double>::infinity();
            double maxmod = 0.0;
            Complex prevv;
            bool first = true;
            bool bad = false;
            for (std::size_t i = 0; i <= pts.size(); ++i) {
                std::size_t ii = i % pts.size();
                Complex acc{};
                for (int k = 0; k <= m; ++k)
                    if (!p[k].zero()) acc += p[k](pts[ii]) * fcont[ci][k][ii];
                double mod = std::abs(acc);
                minmod = std::min(minmod, mod);
                maxmod = std::max(maxmod, mod);
                if (mod == 0.0) { bad = true; break; }
                if (!first) {
                    double da = std::arg(acc / prevv);
                    total_arg += da;
                }
                prevv = acc;
                first = false;
            }
            if (bad || minmod < 1e-9 * maxmod) continue; // ContourThroughZero: try next
            winding = static_cast<int>(std::lround(total_arg / (2.0 * M_PI)));
            break;
        }
        if (winding < 0) throw ContourThroughZero("all candidate contours pass near a zero");
        max_count = std::max(max_count, std::max(sign_changes, winding));
    }
    return max_count;
}

} // namespace niklab
