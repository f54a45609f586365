#pragma once

#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "niklab/hermite_pade.hpp"
#include "niklab/interval.hpp"

namespace niklab {

// Tridiagonal interaction matrix with entries indexed j, k in {-m2, ..., m1}:
// c_jj = P_j^2, c_{j,j+1} = -P_j P_{j+1} / 2.
struct InteractionMatrix {
    int m1 = 0, m2 = 0;
    Eigen::MatrixXd C;
    std::vector<double> P; // P_j at slot j + m2

    int dim() const { return m1 + m2 + 1; }
    int slot(int j) const { return j + m2; }
    double smallest_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        return es.eigenvalues().minCoeff();
    }
};

// P_j = sum of the j-th and later entries after reordering decreasingly; the
// probability vectors are the componentwise limits n_{i,j} / |n_i|.
inline InteractionMatrix build_interaction(std::vector<double> p1, std::vector<double> p2) {
    auto check = [](std::vector<double>& p) {
        if (p.empty()) throw BadProbabilityVector("empty probability vector");
        double sum = 0.0;
        for (double v : p) {
            if (!(v > 0.0) || v > 1.0) throw BadProbabilityVector("entries must lie in (0, 1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw BadProbabilityVector("entries must sum to 1");
        std::stable_sort(p.begin(), p.end(), std::greater<double>());
    };
    check(p1);
    check(p2);
    InteractionMatrix M;
    M.m1 = static_cast<int>(p1.size()) - 1;
    M.m2 = static_cast<int>(p2.size()) - 1;
    M.P.assign(M.dim(), 0.0);
    for (int j = 0; j <= M.m1; ++j) {
        double s = 0.0;
        for (int k = j; k <= M.m1; ++k) s += p1[k];
        M.P[M.slot(j)] = s;
    }
    for (int j = 1; j <= M.m2; ++j) {
        double s = 0.0;
        for (int k = j; k <= M.m2; ++k) s += p2[k];
        M.P[M.slot(-j)] = s;
    }
    M.C = Eigen::MatrixXd::Zero(M.dim(), M.dim());
    for (int a = 0; a < M.dim(); ++a) {
        M.C(a, a) = M.P[a] * M.P[a];
        if (a + 1 < M.dim()) {
            double off = -0.5 * M.P[a] * M.P[a + 1];
            M.C(a, a + 1) = off;
            M.C(a + 1, a) = off;
        }
    }
    return M;
}

// Piecewise-constant probability measure on a union of intervals.
struct DiscretizedMeasure {
    std::vector<double> cells;  // midpoints
    std::vector<double> width;  // cell widths
    std::vector<double> masses; // nonnegative, summing to 1

    double mass_of(const Interval& window) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double a = cells[i] - width[i] / 2, b = cells[i] + width[i] / 2;
            double lo = std::max(a, window.a), hi = std::min(b, window.b);
            if (hi > lo) acc += masses[i] * (hi - lo) / (b - a);
        }
        return acc;
    }
};

struct EquilibriumProblem {
    InteractionMatrix C;
    std::vector<std::vector<Interval>> supports; // E_j, slot order -m2..m1
    int grid = 512;                              // cells per component
    std::vector<std::function<double(double)>> fields; // optional phi_j per slot
};

struct EquilibriumSolution {
    std::vector<DiscretizedMeasure> measures; // slot order
    std::vector<double> constants;            // w_j
    double energy = 0.0;
    double residual = 0.0; // refined-grid equilibrium violation
    int iterations = 0;
    std::vector<double> energy_trace; // sampled J values (weakly decreasing)
};

namespace detail_eq {

// int int log|x - y| over [a1,b1] x [a2,b2], via Phi(t) = t^2 (2 log|t| - 3)/4.
inline double log_cell_pair(double a1, double b1, double a2, double b2) {
    auto Phi = [](double t) {
        if (t == 0.0) return 0.0;
        return t * t * (2.0 * std::log(std::abs(t)) - 3.0) / 4.0;
    };
    return Phi(b1 - a2) + Phi(a1 - b2) - Phi(b1 - b2) - Phi(a1 - a2);
}

// average of log|z - t| over a cell
inline double log_cell_point(Complex z, double a, double b) {
    auto F = [](Complex w) { return w * (std::log(w) - 1.0); };
    Complex val = F(z - a) - F(z - b);
    return val.real() / (b - a);
}

inline void project_simplex(Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        css += u[i];
        double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0) {
            rho = i + 1;
            theta = t;
        }
    }
    for (int i = 0; i < n; ++i) v(i) = std::max(0.0, v(i) - theta);
}

} // namespace detail_eq

// Minimizes the discretized vector energy over the product simplex by
// projected gradient with exact line search on the quadratic model.
inline EquilibriumSolution solve_vector_equilibrium(const EquilibriumProblem& prob,
                                                    int max_iterations = 50000,
                                                    double target_residual = 0.0,
                                                    std::uint64_t init_seed = 0) {
    const int comps = prob.C.dim();
    if (static_cast<int>(prob.supports.size()) != comps)
        throw Error("equilibrium: supports do not match the interaction dimension");
    if (prob.C.smallest_eigenvalue() < -1e-10)
        throw IndefiniteInteraction("interaction matrix is not positive semidefinite");

    // grid construction: cells proportional to interval lengths
    std::vector<DiscretizedMeasure> mus(comps);
    std::vector<int> offset(comps + 1, 0);
    for (int c = 0; c < comps; ++c) {
        double total_len = 0.0;
        for (const auto& iv : prob.supports[c]) total_len += iv.length();
        for (const auto& iv : prob.supports[c]) {
            int cells = std::max(1, static_cast<int>(std::lround(prob.grid * iv.length() / total_len)));
            for (int i = 0; i < cells; ++i) {
                double w = iv.length() / cells;
                mus[c].cells.push_back(iv.a + (i + 0.5) * w);
                mus[c].width.push_back(w);
            }
        }
        mus[c].masses.assign(mus[c].cells.size(), 0.0);
        offset[c + 1] = offset[c] + static_cast<int>(mus[c].cells.size());
    }
    const int N = offset[comps];

    // kernel with interaction coefficients folded in; exact cell-pair averages
    Eigen::MatrixXd K(N, N);
    for (int cj = 0; cj < comps; ++cj)
        for (int ck = 0; ck < comps; ++ck) {
            double cjk = prob.C.C(cj, ck);
            if (cjk == 0.0) {
                for (std::size_t p = 0; p < mus[cj].cells.size(); ++p)
                    for (std::size_t q = 0; q < mus[ck].cells.size(); ++q)
                        K(offset[cj] + p, offset[ck] + q) = 0.0;
                continue;
            }
            for (std::size_t p = 0; p < mus[cj].cells.size(); ++p) {
                double a1 = mus[cj].cells[p] - mus[cj].width[p] / 2;
                double b1 = mus[cj].cells[p] + mus[cj].width[p] / 2;
                for (std::size_t q = 0; q < mus[ck].cells.size(); ++q) {
                    double a2 = mus[ck].cells[q] - mus[ck].width[q] / 2;
                    double b2 = mus[ck].cells[q] + mus[ck].width[q] / 2;
                    double avg = detail_eq::log_cell_pair(a1, b1, a2, b2) /
                                 (mus[cj].width[p] * mus[ck].width[q]);
                    K(offset[cj] + p, offset[ck] + q) = -cjk * avg; // log(1/|x-y|)
                }
            }
        }

    Eigen::VectorXd f = Eigen::VectorXd::Zero(N);
    if (!prob.fields.empty())
        for (int c = 0; c < comps; ++c)
            if (prob.fields[c])
                for (std::size_t p = 0; p < mus[c].cells.size(); ++p)
                    f(offset[c] + p) = prob.fields[c](mus[c].cells[p]);

    // start from uniform (or randomized) masses
    Eigen::VectorXd m(N);
    if (init_seed == 0) {
        for (int c = 0; c < comps; ++c) {
            int nc = offset[c + 1] - offset[c];
            for (int p = 0; p < nc; ++p) m(offset[c] + p) = 1.0 / nc;
        }
    } else {
        std::mt19937_64 rng(init_seed);
        std::uniform_real_distribution<double> U(0.1, 1.0);
        for (int c = 0; c < comps; ++c) {
            double sum = 0.0;
            for (int p = offset[c]; p < offset[c + 1]; ++p) {
                m(p) = U(rng);
                sum += m(p);
            }
            for (int p = offset[c]; p < offset[c + 1]; ++p) m(p) /= sum;
        }
    }

    EquilibriumSolution sol;
    double base_step = 1.0 / std::max(1.0, K.cwiseAbs().maxCoeff());
    Eigen::VectorXd Km = K * m;
    auto energy = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& Kx) {
        return x.dot(Kx) + 2.0 * f.dot(x);
    };
    double J = energy(m, Km);
    sol.energy_trace.push_back(J);

    // KKT gap on the solution grid, cheap check between heavy iterations
    auto kkt_gap = [&](const Eigen::VectorXd& g) {
        double worst = 0.0;
        for (int c = 0; c < comps; ++c) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            double cellmass = 1.0 / (offset[c + 1] - offset[c]);
            for (int p = offset[c]; p < offset[c + 1]; ++p) {
                lo = std::min(lo, g(p));
                if (m(p) > 1e-10 * cellmass) hi = std::max(hi, g(p));
            }
            worst = std::max(worst, (hi - lo) / 2.0);
        }
        return worst;
    };

    int it = 0;
    double tol = target_residual > 0 ? target_residual : 1e-7;
    for (; it < max_iterations; ++it) {
        Eigen::VectorXd g = 2.0 * (Km + f);
        if (it % 16 == 0 && kkt_gap(g) <= tol) break;
        Eigen::VectorXd y = m - base_step * g;
        for (int c = 0; c < comps; ++c) {
            Eigen::VectorXd seg = y.segment(offset[c], offset[c + 1] - offset[c]);
            detail_eq::project_simplex(seg);
            y.segment(offset[c], offset[c + 1] - offset[c]) = seg;
        }
        Eigen::VectorXd d = y - m;
        double dn = d.norm();
        if (dn < 1e-15) break;
        Eigen::VectorXd Kd = K * d;
        double denom = d.dot(Kd);
        double t = denom > 0 ? std::clamp(-0.5 * g.dot(d) / denom, 0.0, 1.0) : 1.0;
        m += t * d;
        Km += t * Kd;
        if (it % 64 == 0) {
            double Jn = energy(m, Km);
            sol.energy_trace.push_back(Jn);
            J = Jn;
        }
    }
    sol.iterations = it;
    if (it >= max_iterations && target_residual > 0)
        throw NonConvergence("equilibrium minimizer hit the iteration cap");

    Km = K * m;
    sol.energy = energy(m, Km);
    sol.energy_trace.push_back(sol.energy);

    // report measures, constants, and the refined-grid residual
    sol.measures = mus;
    for (int c = 0; c < comps; ++c)
        for (int p = offset[c]; p < offset[c + 1]; ++p)
            sol.measures[c].masses[p - offset[c]] = m(p);

    sol.constants.assign(comps, 0.0);
    sol.residual = 0.0;
    for (int c = 0; c < comps; ++c) {
        double w = std::numeric_limits<double>::infinity();
        double wsup = -w;
        double cellmass = 1.0 / (offset[c + 1] - offset[c]);
        for (int p = offset[c]; p < offset[c + 1]; ++p) {
            double v = Km(p) + f(p);
            w = std::min(w, v);
            if (m(p) > 1e-10 * cellmass) wsup = std::max(wsup, v);
        }
        sol.constants[c] = w;
        // probe the continuous lower-bound condition on a refined grid
        auto potential_at = [&](double x) {
            double acc = 0.0;
            for (int ck = 0; ck < comps; ++ck) {
                double cjk = prob.C.C(c, ck);
                if (cjk == 0.0) continue;
                const auto& mu = sol.measures[ck];
                for (std::size_t q = 0; q < mu.cells.size(); ++q) {
                    if (mu.masses[q] == 0.0) continue;
                    acc -= cjk * mu.masses[q] *
                           detail_eq::log_cell_point(Complex(x, 0.0), mu.cells[q] - mu.width[q] / 2,
                                                     mu.cells[q] + mu.width[q] / 2);
                }
            }
            return acc;
        };
        // Probe between the grid points, trimmed a fixed fraction away from
        // the endpoints: the cell-averaged measure has an O(sqrt h) boundary
        // layer there when the density is unbounded, while the interior
        // violation is first order in the cell width.
        for (const auto& iv : prob.supports[c]) {
            const int refine = 4 * prob.grid;
            const double trim = 0.01 * iv.length();
            for (int i = 0; i < refine; ++i) {
                double x = iv.a + trim + (iv.length() - 2 * trim) * (i + 0.5) / refine;
                double phi = (!prob.fields.empty() && prob.fields[c]) ? prob.fields[c](x) : 0.0;
                double viol = wsup - (potential_at(x) + phi);
                sol.residual = std::max(sol.residual, viol);
            }
        }
    }
    return sol;
}

// Logarithmic potential of a discretized component at a complex point.
inline double potential(const DiscretizedMeasure& mu, Complex z) {
    double acc = 0.0;
    for (std::size_t q = 0; q < mu.cells.size(); ++q) {
        if (mu.masses[q] == 0.0) continue;
        acc -= mu.masses[q] * detail_eq::log_cell_point(z, mu.cells[q] - mu.width[q] / 2,
                                                        mu.cells[q] + mu.width[q] / 2);
    }
    return acc;
}

// G(z) = exp(P_1 V^{mu_1}(z) - P_0 V^{mu_0}(z) - 2 sum_{k=1..m1} w_k / P_k);
// the P_1 term drops when the first system has a single measure.
inline double G_function(const EquilibriumSolution& sol, const InteractionMatrix& C, Complex z) {
    double expo = -C.P[C.slot(0)] * potential(sol.measures[C.slot(0)], z);
    if (C.m1 >= 1) {
        expo += C.P[C.slot(1)] * potential(sol.measures[C.slot(1)], z);
        for (int k = 1; k <= C.m1; ++k)
            expo -= 2.0 * sol.constants[C.slot(k)] / C.P[C.slot(k)];
    }
    return std::exp(expo);
}

// --- asymptotics experiments ---------------------------------------------------

struct NthRootPoint {
    int total1 = 0;
    double value = 0.0; // |A_n(z)|^{1/|n1|}
    double gap = 0.0;   // relative gap to G(z)
};

// per probe, the trend of | |A_n|^{1/|n1|} - G | / G along the index ray
inline std::vector<std::vector<NthRootPoint>> nth_root_compare(
    const HermitePadeSolver& solver, const std::vector<MultiIndex2>& ray,
    const std::vector<Complex>& probes, const std::function<double(Complex)>& G) {
    std::vector<std::vector<NthRootPoint>> out(probes.size());
    for (const auto& n : ray) {
        auto form = monic_normalize(solver.solve(n));
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            Complex z = probes[pi];
            double v = std::pow(std::abs(form(z)), 1.0 / n.total1());
            double g = G(z);
            out[pi].push_back({n.total1(), v, std::abs(v - g) / g});
        }
    }
    return out;
}

enum class RatioScaling { Monic, Orthonormal };

struct RatioPoint {
    int total1 = 0;
    Complex ratio;
};

// r_n(z) = A_{n^l}(z) / A_n(z) along consecutive ray elements; orthonormal
// scaling divides each form by its weighted L2 norm against sigma_0.
inline std::vector<std::vector<RatioPoint>> ratio_experiment(
    const HermitePadeSolver& solver, const std::vector<MultiIndex2>& ray,
    const std::vector<Complex>& probes, RatioScaling scaling = RatioScaling::Monic) {
    std::vector<MixedForm> forms;
    std::vector<double> norms;
    for (const auto& n : ray) {
        forms.push_back(monic_normalize(solver.solve(n)));
        if (scaling == RatioScaling::Orthonormal) {
            double n2 = solver.system().base()->integrate(
                [&](double x) {
                    double v = forms.back()(x);
                    return v * v;
                },
                1e-13);
            norms.push_back(std::sqrt(std::abs(n2)));
        } else {
            norms.push_back(1.0);
        }
    }
    std::vector<std::vector<RatioPoint>> out(probes.size());
    for (std::size_t i = 0; i + 1 < forms.size(); ++i) {
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            Complex z = probes[pi];
            Complex r = (forms[i + 1](z) / norms[i + 1]) / (forms[i](z) / norms[i]);
            out[pi].push_back({ray[i].total1(), r});
        }
    }
    return out;
}

// Period step: add M/(m_i+1) to every component of n_i, M = lcm(m1+1, m2+1).
inline MultiIndex2 period_step(const MultiIndex2& n) {
    int a = static_cast<int>(n.n1.size());
    int b = static_cast<int>(n.n2.size());
    int M = std::lcm(a, b);
    MultiIndex2 out = n;
    for (auto& v : out.n1) v += M / a;
    for (auto& v : out.n2) v += M / b;
    return out;
}

} // namespace niklab
