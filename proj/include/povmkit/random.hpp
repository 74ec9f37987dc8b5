// Deterministic randomness: seed-stream derivation and uniform doubles that do
// not depend on libstdc++ distribution internals, plus random test objects.
#pragma once

#include <cstdint>
#include <random>

#include "povmkit/qops.hpp"

namespace povmkit {

// splitmix64; used to derive independent seed streams from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0,1): top 53 bits of the engine output. Identical across
    // platforms, unlike std::uniform_real_distribution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // Marsaglia polar method, deterministic given the engine stream.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::uint64_t next() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline Matrix random_ginibre(Rng& rng, Eigen::Index d) {
    Matrix g(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
    return g;
}

inline DensityOperator random_density(Rng& rng, int n) {
    Eigen::Index d = Eigen::Index{1} << n;
    Matrix g = random_ginibre(rng, d);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityOperator(hermitize(rho));
}

inline Vector random_pure_state(Rng& rng, int n) {
    Eigen::Index d = Eigen::Index{1} << n;
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v / v.norm();
}

inline Matrix2 random_single_qubit_unitary(Rng& rng) {
    // Haar-ish via QR of a Ginibre sample; exact distribution is irrelevant,
    // only determinism and unitarity are.
    Matrix g = random_ginibre(rng, 2);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 2; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    Matrix2 out = q;
    return out;
}

inline LocalUnitary random_local_unitary(Rng& rng, int n) {
    std::vector<Matrix2> fs;
    fs.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) fs.push_back(random_single_qubit_unitary(rng));
    return LocalUnitary(std::move(fs), 1e-9);
}

// Random complete POVM with 2^n outcomes: Ginibre effects under a symmetric
// normalization S^{-1/2} G_a S^{-1/2}.
inline std::vector<Matrix> random_effects(Rng& rng, int n) {
    Eigen::Index d = Eigen::Index{1} << n;
    std::vector<Matrix> gs;
    for (Eigen::Index k = 0; k < d; ++k) {
        Matrix g = random_ginibre(rng, d);
        gs.push_back(hermitize(g * g.adjoint()));
    }
    Matrix s = Matrix::Zero(d, d);
    for (const auto& g : gs) s += g;
    EigResult es = eig_hermitian(s);
    Matrix s_inv_sqrt = es.vectors *
                        es.values.cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.vectors.adjoint();
    for (auto& g : gs) g = hermitize(s_inv_sqrt * g * s_inv_sqrt);
    return gs;
}

}  // namespace povmkit
