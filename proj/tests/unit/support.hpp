#pragma once

#include "kmu/model.hpp"

#include <random>
#include <utility>
#include <vector>

namespace testing {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

inline kmu::Vec vec(std::initializer_list<double> xs) {
    kmu::Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline kmu::Vec unit(int dim, int i) { return kmu::Vec::Unit(dim, i); }

/// Seeded (kappa, mu) draws with kappa in [-5, 0.99].
inline std::vector<std::pair<double, double>> kappa_mu_draws(std::size_t count, std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> kappa(-5.0, 0.99);
    std::uniform_real_distribution<double> mu(-5.0, 5.0);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < count; ++i) {
        double k = kappa(rng);
        out.emplace_back(k, mu(rng));
    }
    return out;
}

inline const std::vector<std::pair<double, double>>& named_generators() {
    static const std::vector<std::pair<double, double>> v{{0.0, 0.0}, {0.75, 1.0}, {-1.0, 2.0}, {0.5, -3.0}};
    return v;
}

}  // namespace testing
