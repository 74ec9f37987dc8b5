// Decomposition of a normalized POVM element into
//   Pi~ = (1-eps) V |a><a| V^dag + eps P,   V = V_1 (x) ... (x) V_n,  P >= 0,
// with the smallest feasible eps for a given V in closed form, and a
// multistart simplex search over product unitaries minimizing eps * delta(P).
// Also: crosstalk detection via operator Schmidt rank and a PPT test.
#pragma once

#include <optional>
#include <vector>

#include "povmkit/optimize.hpp"
#include "povmkit/qops.hpp"
#include "povmkit/random.hpp"
#include "povmkit/tomography.hpp"

namespace povmkit {

// --------------------------- result types ----------------------------------

struct SpectralWindow {
    double b_minus = 0.0;
    double b_plus = 0.0;
    double delta = 0.0;
    double q_c = 0.0;
};

// Extreme expectation values of tr[rho P] over density operators are the
// extreme eigenvalues of P.
inline SpectralWindow spectral_window(const Matrix& p) {
    EigResult e = eig_hermitian(p);
    SpectralWindow w;
    w.b_minus = e.values.minCoeff();
    w.b_plus = e.values.maxCoeff();
    w.delta = 0.5 * (w.b_plus - w.b_minus);
    w.q_c = 0.5 * (w.b_plus + w.b_minus);
    return w;
}

struct ElementDecomposition {
    OutcomeString outcome;
    double epsilon = 0.0;
    LocalUnitary V;
    Matrix P;            // unit-trace Hermitian; zero matrix when exact
    SpectralWindow window;
    double objective = 0.0;  // epsilon * delta(P)
    bool exact = false;      // epsilon ~ 0, P undefined
    double trace_pi = 1.0;   // trace of the element before normalization
};

struct OutcomeRecord {
    OutcomeString outcome;
    double epsilon = 0.0;
    Matrix P;
    SpectralWindow window;
    bool exact = false;
};

struct FullDecomposition {
    LocalUnitary V;             // shared, outcome independent
    std::vector<OutcomeRecord> records;
    double objective = 0.0;     // sum_a eps_a * delta(P_a)
};

struct OptimizerSettings {
    int starts = 32;          // identity plus seeded-random starts
    int max_evals = 2000;     // per start
    double f_tol = 1e-8;      // convergence tolerance on the objective
    std::uint64_t seed = 0;
};

// --------------------------- element normalization -------------------------

inline std::pair<Matrix, double> normalize_element(const PovmElement& pi) {
    double tr = pi.matrix.trace().real();
    if (tr <= 1e-12) throw std::invalid_argument("normalize_element: near-zero trace");
    return {pi.matrix / tr, tr};
}

// --------------------------- inner solve -----------------------------------

namespace detail {

struct ElementSpectrum {
    EigResult eig;
    Eigen::Index support_rank = 0;
};

inline ElementSpectrum element_spectrum(const Matrix& pi_tilde) {
    if (!is_hermitian(pi_tilde, kAlgebraTol))
        throw std::invalid_argument("min_epsilon: input not Hermitian");
    ElementSpectrum s{eig_hermitian(pi_tilde), 0};
    double max_ev = s.eig.values.maxCoeff();
    if (s.eig.values.minCoeff() < -kAlgebraTol)
        throw std::invalid_argument("min_epsilon: input not positive semidefinite");
    for (Eigen::Index i = 0; i < s.eig.values.size(); ++i)
        if (s.eig.values(i) > 1e-12 * std::max(max_ev, 1.0)) ++s.support_rank;
    return s;
}

// Smallest eps with pi_tilde - (1-eps)|phi><phi| >= 0. For phi in the support
// this is 1 - 1/<phi|pinv(pi_tilde)|phi>; weight outside the support forces
// eps = 1.
inline double min_epsilon_for_state(const ElementSpectrum& s, const Vector& phi) {
    double inv_quad = 0.0;
    double outside = 0.0;
    const Eigen::Index d = s.eig.values.size();
    for (Eigen::Index i = 0; i < d; ++i) {
        double c2 = std::norm(s.eig.vectors.col(i).dot(phi));
        if (i >= d - s.support_rank || s.eig.values(i) > 1e-12)
            inv_quad += c2 / std::max(s.eig.values(i), 1e-300);
        else
            outside += c2;
    }
    if (outside > 1e-10) return 1.0;
    double eps = 1.0 - 1.0 / inv_quad;
    return std::clamp(eps, 0.0, 1.0);
}

}  // namespace detail

struct InnerSolution {
    double epsilon = 0.0;
    Matrix P;          // residual / epsilon; zero when exact
    bool exact = false;
};

inline InnerSolution min_epsilon_for_unitary(const Matrix& pi_tilde, const LocalUnitary& v,
                                             const OutcomeString& a) {
    detail::ElementSpectrum s = detail::element_spectrum(pi_tilde);
    Vector phi = v.apply_to_basis(a);
    InnerSolution sol;
    sol.epsilon = detail::min_epsilon_for_state(s, phi);
    if (sol.epsilon <= 1e-12) {
        sol.exact = true;
        sol.epsilon = 0.0;
        sol.P = Matrix::Zero(pi_tilde.rows(), pi_tilde.cols());
    } else {
        sol.P = hermitize((pi_tilde - (1.0 - sol.epsilon) * (phi * phi.adjoint())) / sol.epsilon);
    }
    return sol;
}

// --------------------------- outer optimization ----------------------------

namespace detail {

// Z-Y-Z Euler chart per qubit; the diagonal phases never move V|a>, but the
// full 3-angle chart keeps the search uniform.
inline LocalUnitary unitary_from_angles(const std::vector<double>& angles, int n) {
    std::vector<Matrix2> fs;
    fs.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
        double az = angles[static_cast<std::size_t>(3 * q)];
        double ay = angles[static_cast<std::size_t>(3 * q + 1)];
        double bz = angles[static_cast<std::size_t>(3 * q + 2)];
        Matrix2 rza, ry, rzb;
        rza << std::exp(Complex(0, -az / 2)), 0, 0, std::exp(Complex(0, az / 2));
        ry << std::cos(ay / 2), -std::sin(ay / 2), std::sin(ay / 2), std::cos(ay / 2);
        rzb << std::exp(Complex(0, -bz / 2)), 0, 0, std::exp(Complex(0, bz / 2));
        fs.push_back(rza * ry * rzb);
    }
    return LocalUnitary(std::move(fs), 1e-9);
}

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct MultistartBest {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    int start_index = -1;

    // Strict improvement wins; exact ties resolve to the lexicographically
    // smallest parameter vector from the earliest start.
    void offer(const std::vector<double>& x_new, double f_new, int start) {
        if (f_new < fx || (f_new == fx && lex_less(x_new, x))) {
            x = x_new;
            fx = f_new;
            start_index = start;
        }
    }
};

template <typename Objective>
MultistartBest run_multistart(const Objective& objective, int n_angles,
                              const OptimizerSettings& opts) {
    NelderMeadOptions nm;
    nm.max_evals = opts.max_evals;
    nm.f_tol = opts.f_tol;
    MultistartBest best;
    for (int start = 0; start < opts.starts; ++start) {
        std::vector<double> x0(static_cast<std::size_t>(n_angles), 0.0);
        if (start > 0) {
            Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(start)));
            for (auto& a : x0) a = rng.uniform(-M_PI, M_PI);
        }
        NelderMeadResult r = nelder_mead(objective, x0, nm);
        best.offer(r.x, r.fx, start);
    }
    return best;
}

}  // namespace detail

// Eq.-style single-element optimization: minimize eps * delta(P) over product
// unitaries with P >= 0 enforced by the inner solve. Identity is always a
// feasible start, so the result never exceeds the V = I baseline.
inline ElementDecomposition decompose_element(const PovmElement& pi, const OptimizerSettings& opts = {}) {
    pi.validate();
    auto [pi_tilde, trace] = normalize_element(pi);
    const int n = pi.outcome.size();
    detail::ElementSpectrum spectrum = detail::element_spectrum(pi_tilde);

    auto objective = [&](const std::vector<double>& angles) -> double {
        LocalUnitary v = detail::unitary_from_angles(angles, n);
        Vector phi = v.apply_to_basis(pi.outcome);
        double eps = detail::min_epsilon_for_state(spectrum, phi);
        if (eps <= 1e-12) return 0.0;
        if (eps >= 1.0) return 1e3;  // phi outside the support; always avoidable
        Matrix p = hermitize((pi_tilde - (1.0 - eps) * (phi * phi.adjoint())) / eps);
        return eps * spectral_window(p).delta;
    };

    detail::MultistartBest best = detail::run_multistart(objective, 3 * n, opts);

    LocalUnitary v = detail::unitary_from_angles(best.x, n);
    InnerSolution inner = min_epsilon_for_unitary(pi_tilde, v, pi.outcome);
    ElementDecomposition dec{pi.outcome, inner.epsilon, v, inner.P, {}, 0.0, inner.exact, trace};
    if (!inner.exact) {
        dec.window = spectral_window(inner.P);
        dec.objective = inner.epsilon * dec.window.delta;
    }
    return dec;
}

// Smallest eps attainable over product unitaries, ignoring delta(P). This is
// the weight of the computational-basis part alone; the reported eps of a
// decomposition can sit above it when a larger eps buys a narrower window.
inline ElementDecomposition min_epsilon_over_unitaries(const PovmElement& pi,
                                                       const OptimizerSettings& opts = {}) {
    pi.validate();
    auto [pi_tilde, trace] = normalize_element(pi);
    const int n = pi.outcome.size();
    detail::ElementSpectrum spectrum = detail::element_spectrum(pi_tilde);

    auto objective = [&](const std::vector<double>& angles) -> double {
        LocalUnitary v = detail::unitary_from_angles(angles, n);
        return detail::min_epsilon_for_state(spectrum, v.apply_to_basis(pi.outcome));
    };
    detail::MultistartBest best = detail::run_multistart(objective, 3 * n, opts);

    LocalUnitary v = detail::unitary_from_angles(best.x, n);
    InnerSolution inner = min_epsilon_for_unitary(pi_tilde, v, pi.outcome);
    ElementDecomposition dec{pi.outcome, inner.epsilon, v, inner.P, {}, 0.0, inner.exact, trace};
    if (!inner.exact) {
        dec.window = spectral_window(inner.P);
        dec.objective = inner.epsilon * dec.window.delta;
    }
    return dec;
}

// Shared-V variant: one product unitary for all outcomes, each outcome taking
// its minimal eps for that V; objective is sum_a eps_a * delta(P_a).
inline FullDecomposition decompose_full(const Povm& povm, const OptimizerSettings& opts = {}) {
    povm.validate();
    const int n = povm.qubits();

    std::vector<detail::ElementSpectrum> spectra;
    std::vector<Matrix> tildes;
    for (const auto& el : povm.elements) {
        auto [pt, tr] = normalize_element(el);
        spectra.push_back(detail::element_spectrum(pt));
        tildes.push_back(std::move(pt));
    }

    auto objective = [&](const std::vector<double>& angles) -> double {
        LocalUnitary v = detail::unitary_from_angles(angles, n);
        double total = 0.0;
        for (std::size_t k = 0; k < tildes.size(); ++k) {
            Vector phi = v.apply_to_basis(povm.elements[k].outcome);
            double eps = detail::min_epsilon_for_state(spectra[k], phi);
            if (eps <= 1e-12) continue;
            if (eps >= 1.0) return 1e3;
            Matrix p = hermitize((tildes[k] - (1.0 - eps) * (phi * phi.adjoint())) / eps);
            total += eps * spectral_window(p).delta;
        }
        return total;
    };

    detail::MultistartBest best = detail::run_multistart(objective, 3 * n, opts);

    FullDecomposition full{detail::unitary_from_angles(best.x, n), {}, 0.0};
    for (std::size_t k = 0; k < tildes.size(); ++k) {
        InnerSolution inner = min_epsilon_for_unitary(tildes[k], full.V, povm.elements[k].outcome);
        OutcomeRecord rec{povm.elements[k].outcome, inner.epsilon, inner.P, {}, inner.exact};
        if (!inner.exact) {
            rec.window = spectral_window(inner.P);
            full.objective += inner.epsilon * rec.window.delta;
        }
        full.records.push_back(std::move(rec));
    }
    return full;
}

// --------------------------- structure tests --------------------------------

struct CrosstalkReport {
    bool crosstalk = false;
    // Schmidt spectrum across each single-qubit cut {q} : rest.
    std::vector<std::vector<double>> spectra;
};

// Crosstalk iff the element fails to factorize across some finest cut, i.e.
// the second Schmidt value exceeds rel_tol times the first.
inline CrosstalkReport detect_crosstalk(const PovmElement& pi, double rel_tol = 1e-3) {
    const int n = pi.outcome.size();
    if (n < 2) throw std::invalid_argument("detect_crosstalk: needs >= 2 qubits");
    CrosstalkReport report;
    for (int q = 0; q < n; ++q) {
        auto sv = operator_schmidt_spectrum(pi.matrix, {q});
        if (sv.size() > 1 && sv[1] > rel_tol * sv[0]) report.crosstalk = true;
        report.spectra.push_back(std::move(sv));
    }
    return report;
}

struct PptResult {
    bool npt = false;
    double min_eigenvalue = 0.0;
};

inline PptResult ppt_check(const Matrix& p, const std::vector<int>& split) {
    Matrix pt = partial_transpose(p, split);
    PptResult r;
    r.min_eigenvalue = min_eigenvalue(pt);
    r.npt = r.min_eigenvalue < -kAlgebraTol;
    return r;
}

}  // namespace povmkit
