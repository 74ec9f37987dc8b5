// Two-step readout mitigation: quantum pre-processing by local unitaries and
// the reciprocal classical post-processing, with the spectral error bound and
// both readout error-rate conventions.
#pragma once

#include "povmkit/decomposer.hpp"
#include "povmkit/qops.hpp"
#include "povmkit/tomography.hpp"

namespace povmkit {

struct MitigationParameters {
    double trace_pi = 1.0;
    double epsilon = 0.0;
    double eta = 0.0;
    LocalUnitary V;

    void validate() const {
        if (trace_pi <= 0.0) throw std::invalid_argument("mitigation parameters: trace_pi must be positive");
        if (epsilon < 0.0 || epsilon >= 1.0)
            throw std::invalid_argument("mitigation parameters: epsilon must lie in [0,1)");
    }
};

struct MitigationReport {
    double p_e = 0.0;
    double p0_eta = 0.0;
    double bound = 0.0;           // eps * delta / (1 - eps)
    double error_rate_raw = 0.0;  // 1 - <a|Pi|a>
    double error_rate_qpp = 0.0;  // 1 - <a|V^dag Pi V|a>
    bool p_e_clamped = false;
};

inline DensityOperator apply_qpp(const DensityOperator& rho, const LocalUnitary& v) {
    Matrix u = v.full();
    if (u.rows() != rho.dim()) throw std::invalid_argument("apply_qpp: dimension mismatch");
    return DensityOperator(hermitize(u * rho.matrix() * u.adjoint()));
}

// p_e(a) = tr[rho V^dag Pi V]; clamped to [0,1] when within 1e-8 of the range.
inline double noisy_probability(const DensityOperator& rho, const PovmElement& pi,
                                const LocalUnitary& v, bool* clamped = nullptr) {
    Matrix u = v.full();
    if (u.rows() != rho.dim() || pi.matrix.rows() != rho.dim())
        throw std::invalid_argument("noisy_probability: dimension mismatch");
    double p = (rho.matrix() * (u.adjoint() * pi.matrix * u)).trace().real();
    if (p < -1e-8 || p > 1.0 + 1e-8)
        throw std::runtime_error("noisy_probability: value outside [0,1] beyond tolerance (invalid effect)");
    if (clamped) *clamped = (p < 0.0 || p > 1.0);
    return std::clamp(p, 0.0, 1.0);
}

// Reciprocal relation: p0^(eta) = ((p_e / tr Pi) - eps * eta) / (1 - eps).
// No clamping; certification downstream compares the raw estimator.
inline double post_process(double p_e, const MitigationParameters& params) {
    params.validate();
    return ((p_e / params.trace_pi) - params.epsilon * params.eta) / (1.0 - params.epsilon);
}

inline double error_bound(double epsilon, double delta) {
    if (epsilon < 0.0 || epsilon >= 1.0) throw std::invalid_argument("error_bound: epsilon must lie in [0,1)");
    return epsilon * delta / (1.0 - epsilon);
}

enum class RateConvention { raw, normalized };

inline double readout_error_rate(const PovmElement& pi, const OutcomeString& a,
                                 RateConvention convention) {
    Eigen::Index idx = static_cast<Eigen::Index>(a.basis_index());
    double diag = pi.matrix(idx, idx).real();
    if (convention == RateConvention::raw) return 1.0 - diag;
    return 1.0 - diag / pi.matrix.trace().real();
}

// Full pipeline for one element: QPP with the decomposition's V, then the
// reciprocal post-processing with eta = q_c and the spectral bound.
inline MitigationReport mitigate(const DensityOperator& rho, const PovmElement& pi,
                                 const ElementDecomposition& dec) {
    MitigationReport report;
    report.error_rate_raw = readout_error_rate(pi, pi.outcome, RateConvention::raw);

    Matrix u = dec.V.full();
    PovmElement rotated{pi.outcome, hermitize(u.adjoint() * pi.matrix * u)};
    report.error_rate_qpp = readout_error_rate(rotated, pi.outcome, RateConvention::raw);

    report.p_e = noisy_probability(rho, pi, dec.V, &report.p_e_clamped);
    MitigationParameters params{dec.trace_pi, dec.epsilon, dec.window.q_c, dec.V};
    if (dec.exact) {
        report.p0_eta = report.p_e / dec.trace_pi;
        report.bound = 0.0;
    } else {
        report.p0_eta = post_process(report.p_e, params);
        report.bound = error_bound(dec.epsilon, dec.window.delta);
    }
    return report;
}

}  // namespace povmkit
