// Gate-level density-matrix simulation and the hardware circuits used in the
// IBMQ Sydney demonstration: noisy-Bell state preparation on six qubits and
// the four-qubit witness-measurement circuit.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "povmkit/qops.hpp"
#include "povmkit/witness.hpp"

namespace povmkit {

// --------------------------- gates -----------------------------------------

enum class GateKind { ry, h, x, cx, cu, ccx_variant };

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::ry: return "ry";
        case GateKind::h: return "h";
        case GateKind::x: return "x";
        case GateKind::cx: return "cx";
        case GateKind::cu: return "cu";
        case GateKind::ccx_variant: return "ccx_variant";
    }
    return "?";
}

inline GateKind gate_kind_from_string(const std::string& s) {
    if (s == "ry") return GateKind::ry;
    if (s == "h") return GateKind::h;
    if (s == "x") return GateKind::x;
    if (s == "cx") return GateKind::cx;
    if (s == "cu") return GateKind::cu;
    if (s == "ccx_variant") return GateKind::ccx_variant;
    throw std::invalid_argument("unknown gate kind: " + s);
}

struct Gate {
    GateKind kind;
    std::vector<int> qubits;  // controls first, target last
    double angle = 0.0;       // ry / cu only
};

// Counterclockwise rotation about y.
inline Matrix ry_matrix(double theta) {
    Matrix m(2, 2);
    m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
    return m;
}

inline Matrix gate_matrix(const Gate& g) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
        case GateKind::ry:
            if (g.qubits.size() != 1) throw std::invalid_argument("ry: expects 1 qubit");
            return ry_matrix(g.angle);
        case GateKind::h: {
            if (g.qubits.size() != 1) throw std::invalid_argument("h: expects 1 qubit");
            Matrix m(2, 2);
            m << s, s, s, -s;
            return m;
        }
        case GateKind::x:
            if (g.qubits.size() != 1) throw std::invalid_argument("x: expects 1 qubit");
            return pauli_x();
        case GateKind::cx: {
            if (g.qubits.size() != 2) throw std::invalid_argument("cx: expects 2 qubits");
            Matrix m = Matrix::Identity(4, 4);
            m.block(2, 2, 2, 2) = pauli_x();
            return m;
        }
        case GateKind::cu: {
            if (g.qubits.size() != 2) throw std::invalid_argument("cu: expects 2 qubits");
            Matrix m = Matrix::Identity(4, 4);
            m.block(2, 2, 2, 2) = ry_matrix(g.angle);
            return m;
        }
        case GateKind::ccx_variant: {
            // Controls in |00> or |11> per the written projectors; |11> flips
            // the target, every other control pattern acts as identity.
            if (g.qubits.size() != 3) throw std::invalid_argument("ccx_variant: expects 3 qubits");
            Matrix m = Matrix::Identity(8, 8);
            m.block(6, 6, 2, 2) = pauli_x();
            return m;
        }
    }
    throw std::invalid_argument("gate_matrix: unknown kind");
}

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;                 // execution order
    std::map<std::string, int> label_map;    // device label -> simulator index

    void validate() const {
        for (const auto& g : gates)
            for (int q : g.qubits)
                if (q < 0 || q >= n_qubits) throw std::invalid_argument("circuit: gate index out of range");
    }
};

// Embed a k-qubit gate into the n-qubit space; g.qubits lists the gate's own
// wire order MSB-first.
inline Matrix embed_gate(const Matrix& gate, const std::vector<int>& qubits, int n) {
    const int k = static_cast<int>(qubits.size());
    const std::size_t d = std::size_t{1} << n;
    const std::size_t dg = std::size_t{1} << k;
    if (gate.rows() != static_cast<Eigen::Index>(dg))
        throw std::invalid_argument("embed_gate: gate size does not match qubit list");
    detail::check_qubit_set(qubits, n, "embed_gate");
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
        std::size_t gr = 0;
        for (int q : qubits) gr = (gr << 1) | static_cast<std::size_t>(detail::bit_of(r, q, n));
        for (std::size_t gc = 0; gc < dg; ++gc) {
            Complex amp = gate(static_cast<Eigen::Index>(gr), static_cast<Eigen::Index>(gc));
            if (amp == Complex(0, 0)) continue;
            std::size_t c = r;
            for (int i = 0; i < k; ++i) {
                std::size_t mask = std::size_t{1} << (n - 1 - qubits[static_cast<std::size_t>(i)]);
                std::size_t bit = (gc >> (k - 1 - i)) & 1;
                c = (c & ~mask) | (bit ? mask : 0);
            }
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = amp;
        }
    }
    return u;
}

inline Matrix circuit_unitary(const Circuit& c) {
    c.validate();
    const Eigen::Index d = Eigen::Index{1} << c.n_qubits;
    Matrix u = Matrix::Identity(d, d);
    for (const auto& g : c.gates) u = embed_gate(gate_matrix(g), g.qubits, c.n_qubits) * u;
    return u;
}

// Sequential unitary conjugation. The matrix is never massaged between gates,
// so run(c1 ++ c2, rho) and run(c2, run(c1, rho)) execute the identical
// floating-point sequence.
inline DensityOperator run(const Circuit& c, const DensityOperator& initial) {
    c.validate();
    if (initial.dim() != (Eigen::Index{1} << c.n_qubits))
        throw std::invalid_argument("run: dimension mismatch");
    Matrix rho = initial.matrix();
    for (const auto& g : c.gates) {
        Matrix u = embed_gate(gate_matrix(g), g.qubits, c.n_qubits);
        rho = u * rho * u.adjoint();
    }
    return DensityOperator(rho);
}

// --------------------------- parameter maps --------------------------------

inline double theta_of(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("theta_of: p must lie in [0,1]");
    return 2.0 * std::atan(std::sqrt(p));
}

inline double alpha_of(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("alpha_of: p must lie in [0,1]");
    return (1.0 - p) / (1.0 + 3.0 * p);
}

inline double beta_of(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("beta_of: p must lie in [0,1]");
    return (1.0 - p) / (1.0 + p);
}

namespace detail {

// theta(num/den) = 2 atan2(sqrt(num), sqrt(den)); safe as den -> 0.
inline double ratio_angle(double num, double den) {
    return 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
}

}  // namespace detail

// --------------------------- Sydney circuits --------------------------------

enum class BellPrep { phi_plus, psi_minus };

// Device labels used in the six-qubit preparation circuits.
inline std::map<std::string, int> sydney_label_map() {
    return {{"q0", 0}, {"q1", 1}, {"q2", 2}, {"q4", 3}, {"q6", 4}, {"q7", 5}};
}

inline std::pair<int, int> sydney_data_qubits() { return {1, 3}; }  // q1, q4

// Preparation of rho_psi(p) = (1-p)|psi><psi| + (p/4) I on (q1, q4) using two
// ancillas (q6, q7). The hardware gate strings are parameterized by the Bell
// weight, so the arguments below are the alpha/beta maps evaluated at 1 - p;
// the resulting marginal matches rho_psi(p) to machine precision (see the
// companion validator).
inline Circuit prepare_noisy_bell(BellPrep kind, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("prepare_noisy_bell: p must lie in [0,1]");
    const double x = 1.0 - p;  // Bell-state weight
    const auto labels = sydney_label_map();
    const int q1 = labels.at("q1"), q4 = labels.at("q4"), q6 = labels.at("q6"), q7 = labels.at("q7");

    Circuit c;
    c.n_qubits = 6;
    c.label_map = labels;
    if (kind == BellPrep::phi_plus) {
        // theta(beta(x)) and theta(alpha(x)) directly
        c.gates = {
            {GateKind::ry, {q7}, detail::ratio_angle(1.0 - x, 1.0 + x)},
            {GateKind::cx, {q7, q4}},
            {GateKind::cu, {q4, q1}, M_PI / 2.0},
            {GateKind::x, {q4}},
            {GateKind::cu, {q4, q1}, detail::ratio_angle(1.0 - x, 1.0 + 3.0 * x)},
            {GateKind::x, {q4}},
            {GateKind::cx, {q1, q6}},
            {GateKind::h, {q1}},
            {GateKind::cx, {q1, q4}},
        };
    } else {
        // theta(1/beta(x)) and theta(1/alpha(x)); the atan2 form keeps the
        // x -> 1 limit (angle pi) finite.
        c.gates = {
            {GateKind::ry, {q7}, detail::ratio_angle(1.0 + x, 1.0 - x)},
            {GateKind::cx, {q7, q4}},
            {GateKind::cu, {q4, q1}, detail::ratio_angle(1.0 + 3.0 * x, 1.0 - x)},
            {GateKind::x, {q4}},
            {GateKind::cu, {q4, q1}, M_PI / 2.0},
            {GateKind::x, {q4}},
            {GateKind::cx, {q1, q6}},
            {GateKind::h, {q1}},
            {GateKind::cx, {q1, q4}},
        };
    }
    return c;
}

inline DensityOperator noisy_bell_target(BellPrep kind, double p) {
    return werner_state(kind == BellPrep::phi_plus ? BellKind::phi_plus : BellKind::psi_minus, p);
}

// Trace distance between the simulated (q1,q4) marginal and the target
// Werner state.
inline double validate_noisy_bell(const Circuit& c, BellPrep kind, double p) {
    DensityOperator out = run(c, DensityOperator::pure(basis_state(c.n_qubits, OutcomeString::from_index(0, c.n_qubits))));
    auto [a, b] = sydney_data_qubits();
    Matrix marginal = partial_trace(out.matrix(), {a, b});
    return trace_distance(marginal, noisy_bell_target(kind, p).matrix());
}

// Witness-measurement circuit on four wires w1..w4 (simulator indices 0..3);
// the state under test sits on (w1, w4) and outcome 00 is read on that same
// pair, ancillas (w2, w3) start in |0>.
inline Circuit witness_circuit() {
    Circuit c;
    c.n_qubits = 4;
    c.label_map = {{"w1", 0}, {"w2", 1}, {"w3", 2}, {"w4", 3}};
    const int w1 = 0, w2 = 1, w3 = 2, w4 = 3;
    const double theta2 = detail::ratio_angle(2.0, 1.0);  // 2 atan sqrt(2)
    c.gates = {
        {GateKind::cx, {w1, w4}},
        {GateKind::h, {w1}},
        {GateKind::ccx_variant, {w1, w4, w2}},
        {GateKind::cu, {w1, w4}, -theta2},
        {GateKind::x, {w3}},
        {GateKind::x, {w1}},
        {GateKind::cx, {w1, w4}},
        {GateKind::cx, {w1, w2}},
        {GateKind::cx, {w1, w3}},
        {GateKind::ry, {w1}, -M_PI / 3.0},
    };
    return c;
}

inline std::pair<int, int> witness_data_qubits() { return {0, 3}; }

// Embed a two-qubit state on (w1, w4) with the ancilla pair in |00>.
inline DensityOperator inject_witness_input(const DensityOperator& rho) {
    if (rho.dim() != 4) throw std::invalid_argument("inject_witness_input: needs a two-qubit state");
    const int n = 4;
    const std::size_t d = 16;
    auto [qa, qb] = witness_data_qubits();
    Matrix full = Matrix::Zero(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        if (detail::bit_of(r, 1, n) || detail::bit_of(r, 2, n)) continue;
        std::size_t dr = (static_cast<std::size_t>(detail::bit_of(r, qa, n)) << 1) |
                         static_cast<std::size_t>(detail::bit_of(r, qb, n));
        for (std::size_t cc = 0; cc < d; ++cc) {
            if (detail::bit_of(cc, 1, n) || detail::bit_of(cc, 2, n)) continue;
            std::size_t dc = (static_cast<std::size_t>(detail::bit_of(cc, qa, n)) << 1) |
                             static_cast<std::size_t>(detail::bit_of(cc, qb, n));
            full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cc)) = rho.matrix()(
                static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dc));
        }
    }
    return DensityOperator(full);
}

// Marginal of the circuit output on the measured pair; its 00 entry is the
// ideal-detector p(00) and general detector elements contract against it.
inline Matrix witness_output_marginal(const DensityOperator& rho) {
    Circuit c = witness_circuit();
    DensityOperator out = run(c, inject_witness_input(rho));
    auto [qa, qb] = witness_data_qubits();
    return partial_trace(out.matrix(), {qa, qb});
}

// Max deviation of the circuit-measured p(00) from tr[W rho] over seeded
// random two-qubit states.
inline double validate_witness_circuit(int trials, std::uint64_t seed) {
    WitnessOperator w = build_reference_witness();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        DensityOperator rho = random_density(rng, 2);
        double p00 = witness_output_marginal(rho)(0, 0).real();
        double direct = (w.W * rho.matrix()).trace().real();
        worst = std::max(worst, std::abs(p00 - direct));
    }
    return worst;
}

}  // namespace povmkit
