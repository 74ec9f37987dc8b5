// Quantum detector tomography: informationally complete probe sets, a seeded
// Born-rule shot sampler, least-squares reconstruction of the POVM from
// frequencies, and projection back to a physical (PSD, complete) measurement.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "povmkit/qops.hpp"
#include "povmkit/random.hpp"

namespace povmkit {

// --------------------------- POVM types ------------------------------------

struct PovmElement {
    OutcomeString outcome;
    Matrix matrix;

    void validate() const {
        if (!is_hermitian(matrix, kStructTol))
            throw std::invalid_argument("POVM element " + outcome.str() + ": not Hermitian");
        EigResult e = eig_hermitian(matrix);
        if (e.values.minCoeff() < -kAlgebraTol)
            throw std::invalid_argument("POVM element " + outcome.str() + ": negative eigenvalue");
        if (e.values.maxCoeff() > 1.0 + kAlgebraTol)
            throw std::invalid_argument("POVM element " + outcome.str() + ": eigenvalue above 1");
    }
};

// Complete measurement: one element per outcome string, stored in basis-index
// order, with sum_a Pi_a = I within 1e-8.
struct Povm {
    std::vector<PovmElement> elements;

    int qubits() const {
        if (elements.empty()) throw std::invalid_argument("POVM has no elements");
        return elements.front().outcome.size();
    }

    Eigen::Index dim() const { return elements.front().matrix.rows(); }

    const PovmElement& element(const OutcomeString& a) const {
        return elements.at(a.basis_index());
    }

    void validate() const {
        int n = qubits();
        if (elements.size() != (std::size_t{1} << n))
            throw std::invalid_argument("POVM: expected one element per outcome string");
        Matrix sum = Matrix::Zero(dim(), dim());
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (elements[i].outcome.basis_index() != i)
                throw std::invalid_argument("POVM: elements out of outcome order");
            elements[i].validate();
            sum += elements[i].matrix;
        }
        if (max_abs(sum - Matrix::Identity(dim(), dim())) > kAlgebraTol)
            throw std::invalid_argument("POVM: completeness violated");
    }

    static Povm ideal(int n) {
        Povm p;
        for (const auto& a : OutcomeString::all(n))
            p.elements.push_back({a, basis_projector(n, a)});
        return p;
    }

    static Povm from_effects(std::vector<Matrix> effects) {
        int n = qubit_count(effects.front().rows());
        Povm p;
        auto outcomes = OutcomeString::all(n);
        for (std::size_t i = 0; i < effects.size(); ++i)
            p.elements.push_back({outcomes.at(i), std::move(effects[i])});
        return p;
    }
};

struct CountTable {
    int shots = 0;
    std::uint64_t seed = 0;
    // probe id -> (outcome bitstring -> count)
    std::map<std::string, std::map<std::string, long>> counts;

    void validate() const {
        if (shots <= 0) throw std::invalid_argument("count table: shots must be positive");
        for (const auto& [probe, row] : counts) {
            long total = 0;
            for (const auto& [outcome, c] : row) {
                if (c < 0) throw std::invalid_argument("count table: negative count");
                total += c;
            }
            if (total != shots)
                throw std::invalid_argument("count table: counts for probe " + probe + " do not sum to shots");
        }
    }
};

// --------------------------- probe states ----------------------------------

enum class ProbeScheme { pauli6, mub4 };

inline ProbeScheme probe_scheme_from_string(const std::string& s) {
    if (s == "pauli6") return ProbeScheme::pauli6;
    if (s == "mub4") return ProbeScheme::mub4;
    throw std::invalid_argument("unknown probe scheme: " + s);
}

struct Probe {
    std::string id;
    DensityOperator state;
};

namespace detail {

inline std::vector<std::pair<char, Vector>> single_qubit_probes(ProbeScheme scheme) {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<std::pair<char, Vector>> out;
    if (scheme == ProbeScheme::pauli6) {
        Vector v(2);
        v << 1, 0; out.push_back({'0', v});
        v << 0, 1; out.push_back({'1', v});
        v << s, s; out.push_back({'+', v});
        v << s, -s; out.push_back({'-', v});
        v << s, Complex(0, s); out.push_back({'r', v});
        v << s, Complex(0, -s); out.push_back({'l', v});
    } else {
        // Tetrahedral frame: Bloch vectors (0,0,1) and three at z=-1/3,
        // pairwise overlap |<i|j>|^2 = 1/3.
        const double bloch[4][3] = {
            {0.0, 0.0, 1.0},
            {2.0 * std::sqrt(2.0) / 3.0, 0.0, -1.0 / 3.0},
            {-std::sqrt(2.0) / 3.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
            {-std::sqrt(2.0) / 3.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0}};
        const char labels[4] = {'a', 'b', 'c', 'd'};
        for (int k = 0; k < 4; ++k) {
            double theta = std::acos(bloch[k][2]);
            double phi = std::atan2(bloch[k][1], bloch[k][0]);
            Vector v(2);
            v << std::cos(theta / 2.0), std::exp(Complex(0, phi)) * std::sin(theta / 2.0);
            out.push_back({labels[k], v});
        }
    }
    return out;
}

}  // namespace detail

// Product probes over n qubits: 6^n Pauli eigenstates or 4^n tetrahedral
// states. Either set spans single-qubit operator space, hence is
// informationally complete for product probes.
inline std::vector<Probe> probe_states(int n, ProbeScheme scheme) {
    if (n < 1) throw std::invalid_argument("probe_states: n must be >= 1");
    auto singles = detail::single_qubit_probes(scheme);
    std::vector<Probe> probes;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        std::string id;
        Vector v = Vector::Ones(1);
        for (int q = 0; q < n; ++q) {
            const auto& [label, ket] = singles[idx[static_cast<std::size_t>(q)]];
            id += label;
            v = Vector(kron(Matrix(v), Matrix(ket)));
        }
        probes.push_back({id, DensityOperator::pure(v)});
        int q = n - 1;
        while (q >= 0 && ++idx[static_cast<std::size_t>(q)] == singles.size()) {
            idx[static_cast<std::size_t>(q)] = 0;
            --q;
        }
        if (q < 0) break;
    }
    return probes;
}

// --------------------------- shot simulation -------------------------------

inline std::vector<double> outcome_probabilities(const Povm& povm, const DensityOperator& probe) {
    if (povm.dim() != probe.dim())
        throw std::invalid_argument("outcome_probabilities: dimension mismatch");
    std::vector<double> p;
    p.reserve(povm.elements.size());
    double total = 0.0;
    for (const auto& el : povm.elements) {
        double v = (probe.matrix() * el.matrix).trace().real();
        p.push_back(std::max(v, 0.0));
        total += p.back();
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw std::runtime_error("outcome_probabilities: probabilities do not sum to 1 (broken POVM)");
    for (auto& v : p) v /= total;
    return p;
}

// i.i.d. Born-rule samples via inverse CDF on a platform-stable uniform
// stream; equal (povm, probe, shots, seed) always give identical counts.
inline std::map<std::string, long> simulate_shots(const Povm& povm, const DensityOperator& probe,
                                                  int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("simulate_shots: shots must be >= 1");
    std::vector<double> p = outcome_probabilities(povm, probe);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    Rng rng(seed);
    std::vector<long> tallies(p.size(), 0);
    for (int s = 0; s < shots; ++s) {
        double u = rng.uniform();
        std::size_t k = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (k >= tallies.size()) k = tallies.size() - 1;
        ++tallies[k];
    }

    std::map<std::string, long> out;
    for (std::size_t i = 0; i < tallies.size(); ++i)
        out[povm.elements[i].outcome.str()] = tallies[i];
    return out;
}

// Full tomography pass: every probe measured with its own derived seed stream.
inline CountTable run_tomography(const Povm& povm, const std::vector<Probe>& probes,
                                 int shots, std::uint64_t seed) {
    CountTable table;
    table.shots = shots;
    table.seed = seed;
    for (std::size_t i = 0; i < probes.size(); ++i)
        table.counts[probes[i].id] = simulate_shots(povm, probes[i].state, shots, derive_seed(seed, i));
    return table;
}

// --------------------------- reconstruction --------------------------------

namespace detail {

// Orthonormal Hermitian operator basis of C^{d x d}: diagonal units, then
// real/imaginary off-diagonal pairs.
inline std::vector<Matrix> hermitian_basis(Eigen::Index d) {
    std::vector<Matrix> basis;
    const double s = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        Matrix e = Matrix::Zero(d, d);
        e(i, i) = 1.0;
        basis.push_back(e);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = s;
            e(j, i) = s;
            basis.push_back(e);
            Matrix f = Matrix::Zero(d, d);
            f(i, j) = Complex(0, -s);
            f(j, i) = Complex(0, s);
            basis.push_back(f);
        }
    }
    return basis;
}

}  // namespace detail

// Each raw element is clipped to PSD (eigenvalue floor at 0) and the set is
// jointly rescaled as S^{-1/2} E_a S^{-1/2} so completeness holds exactly.
// Idempotent on already-physical input.
inline Povm project_to_physical(const std::vector<Matrix>& raw) {
    Eigen::Index d = raw.front().rows();
    Matrix sum_raw = Matrix::Zero(d, d);
    for (const auto& e : raw) sum_raw += e;
    if (max_abs(sum_raw - Matrix::Identity(d, d)) > 0.2)
        throw std::invalid_argument("project_to_physical: input far from a resolution of identity");

    std::vector<Matrix> clipped;
    Matrix s = Matrix::Zero(d, d);
    for (const auto& e : raw) {
        EigResult eg = eig_hermitian(hermitize(e));
        Matrix c = eg.vectors * eg.values.cwiseMax(0.0).asDiagonal() * eg.vectors.adjoint();
        clipped.push_back(hermitize(c));
        s += clipped.back();
    }
    EigResult es = eig_hermitian(s);
    if (es.values.minCoeff() <= 0.0)
        throw std::invalid_argument("project_to_physical: clipped sum is singular");
    Matrix s_inv_sqrt = es.vectors * es.values.cwiseSqrt().cwiseInverse().asDiagonal() * es.vectors.adjoint();
    std::vector<Matrix> phys;
    for (const auto& c : clipped) phys.push_back(hermitize(s_inv_sqrt * c * s_inv_sqrt));
    return Povm::from_effects(std::move(phys));
}

struct Reconstruction {
    std::vector<Matrix> raw;  // least-squares effects before projection
    Povm povm;                // physical result
};

// Least-squares inversion of outcome frequencies on a spanning probe set.
// frequencies[i][k] is the relative frequency of outcome k on probe i; with
// exact probabilities this recovers the true POVM up to numerical precision.
inline Reconstruction reconstruct_from_frequencies(const std::vector<Probe>& probes,
                                                   const std::vector<std::vector<double>>& frequencies) {
    if (probes.empty()) throw std::invalid_argument("reconstruct: no probes");
    if (frequencies.size() != probes.size())
        throw std::invalid_argument("reconstruct: frequency rows do not match probes");
    Eigen::Index d = probes.front().state.dim();
    auto basis = detail::hermitian_basis(d);
    const Eigen::Index nb = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index np = static_cast<Eigen::Index>(probes.size());

    Eigen::MatrixXd design(np, nb);
    for (Eigen::Index i = 0; i < np; ++i)
        for (Eigen::Index b = 0; b < nb; ++b)
            design(i, b) = (probes[static_cast<std::size_t>(i)].state.matrix() *
                            basis[static_cast<std::size_t>(b)]).trace().real();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues().minCoeff() < 1e-10 * svd.singularValues().maxCoeff() ||
        svd.rank() < nb)
        throw std::invalid_argument("reconstruct: probe set is rank deficient");

    const std::size_t n_outcomes = frequencies.front().size();
    Reconstruction rec;
    for (std::size_t k = 0; k < n_outcomes; ++k) {
        Eigen::VectorXd y(np);
        for (Eigen::Index i = 0; i < np; ++i) {
            const auto& row = frequencies[static_cast<std::size_t>(i)];
            if (row.size() != n_outcomes)
                throw std::invalid_argument("reconstruct: ragged frequency table");
            y(i) = row[k];
        }
        Eigen::VectorXd x = svd.solve(y);
        Matrix e = Matrix::Zero(d, d);
        for (Eigen::Index b = 0; b < nb; ++b) e += x(b) * basis[static_cast<std::size_t>(b)];
        rec.raw.push_back(hermitize(e));
    }
    rec.povm = project_to_physical(rec.raw);
    return rec;
}

inline Reconstruction reconstruct_povm(const std::vector<Probe>& probes, const CountTable& counts) {
    counts.validate();
    if (probes.empty()) throw std::invalid_argument("reconstruct_povm: no probes");
    int n = probes.front().state.qubits();
    auto outcomes = OutcomeString::all(n);
    std::vector<std::vector<double>> freqs;
    for (const auto& probe : probes) {
        auto it = counts.counts.find(probe.id);
        if (it == counts.counts.end())
            throw std::invalid_argument("reconstruct_povm: missing counts for probe " + probe.id);
        std::vector<double> row;
        row.reserve(outcomes.size());
        for (const auto& a : outcomes) {
            auto jt = it->second.find(a.str());
            row.push_back(jt == it->second.end() ? 0.0
                                                 : static_cast<double>(jt->second) / counts.shots);
        }
        freqs.push_back(std::move(row));
    }
    return reconstruct_from_frequencies(probes, freqs);
}

// Exact-probability path (infinite-shot limit); used by tests and the CLI.
inline Reconstruction reconstruct_exact(const std::vector<Probe>& probes, const Povm& truth) {
    std::vector<std::vector<double>> freqs;
    for (const auto& probe : probes) freqs.push_back(outcome_probabilities(truth, probe.state));
    return reconstruct_from_frequencies(probes, freqs);
}

// Complete a measurement around one characterized element: the remaining mass
// R = I - Pi_anchor is split as Pi_b = R^{1/2} M_b R^{1/2} with the classical
// pattern M_b = |b><b| + |a><a| / (2^n - 1). Tomography only publishes the
// anchor element, so the completion is a model, not data.
inline Povm complete_anchored_povm(const PovmElement& anchor) {
    anchor.validate();
    const int n = anchor.outcome.size();
    const Eigen::Index d = anchor.matrix.rows();
    Matrix rest = Matrix::Identity(d, d) - anchor.matrix;
    EigResult er = eig_hermitian(rest);
    if (er.values.minCoeff() < -kAlgebraTol)
        throw std::invalid_argument("complete_anchored_povm: anchor exceeds identity");
    Matrix sqrt_rest = er.vectors * er.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * er.vectors.adjoint();

    Matrix anchor_proj = basis_projector(n, anchor.outcome);
    const double share = 1.0 / static_cast<double>(d - 1);
    Povm out;
    for (const auto& b : OutcomeString::all(n)) {
        if (b == anchor.outcome) {
            out.elements.push_back(anchor);
            continue;
        }
        Matrix pattern = basis_projector(n, b) + share * anchor_proj;
        out.elements.push_back({b, hermitize(sqrt_rest * pattern * sqrt_rest)});
    }
    return out;
}

}  // namespace povmkit
