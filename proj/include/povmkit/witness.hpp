// Entanglement certification with a non-negative unit-trace witness operator
// carrying a separability window [B_L, B_U]: window search over product
// states, the purification unitary realizing the witness as a circuit
// measurement, noisy-detector window transport, and the eta detection window.
#pragma once

#include <optional>
#include <utility>

#include "povmkit/mitigator.hpp"
#include "povmkit/optimize.hpp"
#include "povmkit/qops.hpp"
#include "povmkit/random.hpp"

namespace povmkit {

// --------------------------- Bell states -----------------------------------

enum class BellKind { phi_plus, phi_minus, psi_plus, psi_minus };

inline Vector bell_state(BellKind kind) {
    const double s = 1.0 / std::sqrt(2.0);
    Vector v = Vector::Zero(4);
    switch (kind) {
        case BellKind::phi_plus:  v(0) = s; v(3) = s; break;
        case BellKind::phi_minus: v(0) = s; v(3) = -s; break;
        case BellKind::psi_plus:  v(1) = s; v(2) = s; break;
        case BellKind::psi_minus: v(1) = s; v(2) = -s; break;
    }
    return v;
}

// (1-r)|psi><psi| + (r/4) I; entangled iff r < 2/3.
inline DensityOperator werner_state(BellKind kind, double r) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("werner_state: r must lie in [0,1]");
    Vector v = bell_state(kind);
    Matrix rho = (1.0 - r) * (v * v.adjoint()) + (r / 4.0) * Matrix::Identity(4, 4);
    return DensityOperator(hermitize(rho));
}

// --------------------------- witness operator --------------------------------

struct WitnessOperator {
    Matrix W;
    double B_L = 0.0;
    double B_U = 0.0;

    void validate() const {
        if (!is_hermitian(W, kStructTol)) throw std::invalid_argument("witness: not Hermitian");
        if (std::abs(W.trace().real() - 1.0) > kStructTol)
            throw std::invalid_argument("witness: trace != 1");
        if (min_eigenvalue(W) < -kStructTol) throw std::invalid_argument("witness: not PSD");
        if (B_L > B_U) throw std::invalid_argument("witness: B_L > B_U");
    }
};

// W~ = 1/4 |phi-><phi-| + 1/4 |psi+><psi+| + 1/2 |psi-><psi-| with its
// product-state window hard-coded so certification never depends on the
// window optimizer.
inline WitnessOperator build_reference_witness() {
    Vector pm = bell_state(BellKind::phi_minus);
    Vector sp = bell_state(BellKind::psi_plus);
    Vector sm = bell_state(BellKind::psi_minus);
    Matrix w = 0.25 * (pm * pm.adjoint()) + 0.25 * (sp * sp.adjoint()) + 0.5 * (sm * sm.adjoint());
    return {hermitize(w), 0.1250, 0.3750};
}

// --------------------------- separability window ----------------------------

struct SeparabilityBounds {
    double lower = 0.0;
    double upper = 0.0;
    double convergence = 0.0;  // worst final simplex f-spread across winning starts
};

// Two-qubit window: extremize tr[W (|u><u| (x) |v><v|)] over Bloch angles of
// the two pure factors. Pure-product extremality suffices by linearity of the
// trace in each factor.
inline SeparabilityBounds separability_bounds(const Matrix& w, std::uint64_t seed = 0, int starts = 64) {
    if (w.rows() != 4 || w.cols() != 4)
        throw std::invalid_argument("separability_bounds: only two-qubit witnesses supported");
    if (!is_hermitian(w, kAlgebraTol)) throw std::invalid_argument("separability_bounds: not Hermitian");

    auto product_value = [&](const std::vector<double>& x) -> double {
        Vector u(2), v(2);
        u << std::cos(x[0] / 2), std::exp(Complex(0, x[1])) * std::sin(x[0] / 2);
        v << std::cos(x[2] / 2), std::exp(Complex(0, x[3])) * std::sin(x[2] / 2);
        Vector uv(4);
        uv << u(0) * v(0), u(0) * v(1), u(1) * v(0), u(1) * v(1);
        return (uv.adjoint() * w * uv)(0).real();
    };

    NelderMeadOptions nm;
    nm.max_evals = 2000;
    nm.f_tol = 1e-12;
    SeparabilityBounds out;
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        std::vector<double> x0 = {rng.uniform(0, M_PI), rng.uniform(0, 2 * M_PI),
                                  rng.uniform(0, M_PI), rng.uniform(0, 2 * M_PI)};
        NelderMeadResult lo = nelder_mead(product_value, x0, nm);
        NelderMeadResult hi = nelder_mead([&](const std::vector<double>& x) { return -product_value(x); }, x0, nm);
        if (lo.fx < out.lower) {
            out.lower = lo.fx;
            out.convergence = std::max(out.convergence, nm.f_tol);
        }
        if (-hi.fx > out.upper) out.upper = -hi.fx;
    }
    return out;
}

// --------------------------- purification -----------------------------------

// 2n-qubit unitary whose first column is the eigendecomposition purification
// sum_i sqrt(lambda_i) |e_i>|i>, completed by Householder QR of [v | I] with
// the column phase fixed so U|0...0> equals the purification exactly.
inline Matrix purification_unitary(const Matrix& w) {
    if (!is_hermitian(w, kAlgebraTol)) throw std::invalid_argument("purification_unitary: not Hermitian");
    if (std::abs(w.trace().real() - 1.0) > kAlgebraTol)
        throw std::invalid_argument("purification_unitary: trace != 1");
    EigResult e = eig_hermitian(w);
    if (e.values.minCoeff() < -kAlgebraTol) throw std::invalid_argument("purification_unitary: not PSD");

    const Eigen::Index d = w.rows();
    const Eigen::Index big = d * d;
    Vector v = Vector::Zero(big);
    for (Eigen::Index k = 0; k < d; ++k) {
        double lambda = std::max(e.values(k), 0.0);
        if (lambda == 0.0) continue;
        for (Eigen::Index i = 0; i < d; ++i) v(i * d + k) += std::sqrt(lambda) * e.vectors(i, k);
    }
    v /= v.norm();

    Matrix a(big, big + 1);
    a.col(0) = v;
    a.rightCols(big) = Matrix::Identity(big, big);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    Complex r00 = (q.adjoint() * a)(0, 0);
    q.col(0) *= r00 / std::abs(r00);
    return q;
}

// Eq.-style probability form: p = tr[|0><0|^(2n) U^dag (rho (x) I_n) U],
// asserted against tr[W rho]. A mismatch signals a broken purification.
inline double probability_form(const Matrix& w, const DensityOperator& rho) {
    if (w.rows() != rho.dim()) throw std::invalid_argument("probability_form: dimension mismatch");
    Matrix u = purification_unitary(w);
    Matrix big = kron(rho.matrix(), Matrix::Identity(w.rows(), w.rows()));
    double p = (u.col(0).adjoint() * big * u.col(0))(0).real();
    double direct = (w * rho.matrix()).trace().real();
    if (std::abs(p - direct) > 1e-10)
        throw std::runtime_error("probability_form: purification disagrees with direct trace");
    return p;
}

// --------------------------- noisy-detector transport -----------------------

// Window transported through the reciprocal map:
// B^(eta) = (tr Pi)^{-1}/(1-eps) * B - eps/(1-eps) * eta.
inline std::pair<double, double> mitigated_bounds(double b_l, double b_u, double trace_pi,
                                                  double epsilon, double eta) {
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("mitigated_bounds: epsilon must lie in [0,1)");
    double scale = (1.0 / trace_pi) / (1.0 - epsilon);
    double shift = epsilon / (1.0 - epsilon) * eta;
    return {scale * b_l - shift, scale * b_u - shift};
}

// Eta choices that turn a miss-by-kappa raw outcome into a mitigated
// detection: ((c B_L + kappa/tr)/eps, (c B_U - kappa/tr)/eps) with
// c = (tr Pi)^{-1} - (1-eps). Empty when the interval collapses.
inline std::optional<std::pair<double, double>> eta_window(double b_l, double b_u, double trace_pi,
                                                           double epsilon, double kappa) {
    if (epsilon <= 0.0)
        throw std::invalid_argument("eta_window: undefined at epsilon = 0 (mitigation already exact)");
    if (kappa < 0.0) throw std::invalid_argument("eta_window: kappa must be >= 0");
    double inv_tr = 1.0 / trace_pi;
    double c = inv_tr - (1.0 - epsilon);
    double lo = (c * b_l + inv_tr * kappa) / epsilon;
    double hi = (c * b_u - inv_tr * kappa) / epsilon;
    if (lo >= hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

// --------------------------- verdict ----------------------------------------

enum class Verdict { entangled_below, entangled_above, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::entangled_below: return "entangled_below";
        case Verdict::entangled_above: return "entangled_above";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct CertificationVerdict {
    double probability = 0.0;
    double B_L = 0.0;
    double B_U = 0.0;
    Verdict verdict = Verdict::inconclusive;
    double margin = 0.0;  // distance to the violated (or nearest) bound
};

inline CertificationVerdict certify(double p, double b_l, double b_u) {
    if (b_l > b_u) throw std::invalid_argument("certify: invalid window");
    CertificationVerdict out{p, b_l, b_u, Verdict::inconclusive, 0.0};
    if (p < b_l) {
        out.verdict = Verdict::entangled_below;
        out.margin = b_l - p;
    } else if (p > b_u) {
        out.verdict = Verdict::entangled_above;
        out.margin = p - b_u;
    } else {
        out.margin = std::min(p - b_l, b_u - p);
    }
    return out;
}

}  // namespace povmkit
