#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "niklab/measure.hpp"

namespace niklab {

// Generator chain sigma_0..sigma_m with the derived measures
// s_{j,k} = <sigma_j, s_{j+1,k}> cached on demand.  s_{j,k} is materialized as
// a CauchyWeighted measure over sigma_j (one factor referencing s_{j+1,k})
// rather than flattened, so evaluation stays O(depth x nodes).
class NikishinSystem {
public:
    NikishinSystem() = default;

    explicit NikishinSystem(std::vector<MeasurePtr> generators)
        : gens_(std::move(generators)), cache_(std::make_shared<Cache>()) {
        if (gens_.empty()) throw Error("NikishinSystem: need at least one generator");
        for (std::size_t j = 0; j + 1 < gens_.size(); ++j) {
            if (!gens_[j]->hull().disjoint(gens_[j + 1]->hull()))
                throw AdjacentOverlap("generators " + std::to_string(j) + " and " +
                                      std::to_string(j + 1) + " have intersecting hulls");
        }
    }

    int size() const { return static_cast<int>(gens_.size()); } // m + 1
    int m() const { return size() - 1; }
    const MeasurePtr& generator(int j) const { return gens_.at(j); }
    const std::vector<MeasurePtr>& generators() const { return gens_; }

    // s_{j,k} = <sigma_j, ..., sigma_k>, 0 <= j <= k <= m.
    MeasurePtr s(int j, int k) const {
        if (j > k || j < 0 || k >= size()) throw Error("NikishinSystem::s: bad indices");
        if (j == k) return gens_[j];
        std::lock_guard<std::mutex> lock(cache_->mtx);
        return s_locked(j, k);
    }

    // s_{1,k} with the convention s_{1,0} == 1 handled by callers.
    Complex markov(int j, int k, Complex z) const { return s(j, k)->cauchy(z); }
    double markov(int j, int k, double x) const { return s(j, k)->cauchy(x); }

    // System generated by (sigma_from, ..., sigma_m).
    NikishinSystem tail(int from) const {
        return NikishinSystem(std::vector<MeasurePtr>(gens_.begin() + from, gens_.end()));
    }

private:
    MeasurePtr s_locked(int j, int k) const {
        if (j == k) return gens_[j];
        auto key = std::make_pair(j, k);
        auto it = cache_->chains.find(key);
        if (it != cache_->chains.end()) return it->second;
        MeasurePtr out = product(gens_[j], s_locked(j + 1, k));
        cache_->chains.emplace(key, out);
        return out;
    }

    struct Cache {
        std::mutex mtx;
        std::map<std::pair<int, int>, MeasurePtr> chains;
    };
    std::vector<MeasurePtr> gens_;
    std::shared_ptr<Cache> cache_;
};

// Two Nikishin systems stemming from the same basis measure; the carrier of
// the matrix Markov function S^ = int U^t V dsigma_0 / (z - x).
class MixedSystem {
public:
    MixedSystem(NikishinSystem s1, NikishinSystem s2) : s1_(std::move(s1)), s2_(std::move(s2)) {
        if (s1_.generator(0).get() != s2_.generator(0).get())
            throw ValidationError("mixed system: sigma_0^1 and sigma_0^2 must be the same object");
    }

    int m1() const { return s1_.m(); }
    int m2() const { return s2_.m(); }
    const NikishinSystem& S1() const { return s1_; }
    const NikishinSystem& S2() const { return s2_; }
    const MeasurePtr& base() const { return s1_.generator(0); }

    // f1(k, .) = s^1_{1,k}^ with f1(0, .) == 1; same on the other side.
    template <class Z>
    Z f1(int k, Z z) const {
        if (k == 0) return Z(1.0);
        return chain1(k)->cauchy(z);
    }
    template <class Z>
    Z f2(int j, Z z) const {
        if (j == 0) return Z(1.0);
        return chain2(j)->cauchy(z);
    }

    // s^1_{1,k} and s^2_{1,j} as measures (k, j >= 1).
    MeasurePtr chain1(int k) const { return s1_.s(1, k); }
    MeasurePtr chain2(int j) const { return s2_.s(1, j); }

    // W(x) = U^t V, rank one by construction.
    Eigen::MatrixXd weight_matrix(double x) const {
        Eigen::VectorXd u(m2() + 1), v(m1() + 1);
        for (int j = 0; j <= m2(); ++j) u(j) = f2(j, x);
        for (int k = 0; k <= m1(); ++k) v(k) = f1(k, x);
        return u * v.transpose();
    }

private:
    NikishinSystem s1_, s2_;
};

} // namespace niklab
