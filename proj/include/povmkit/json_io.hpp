// JSON (de)serialization for matrices, fixtures, POVM files, count tables and
// the report formats emitted by the CLI. Matrix format:
//   {"dim": d, "rows": [[[re, im], ...], ...]}   (row-major)
// nlohmann::json prints doubles with shortest round-trip precision, so values
// survive a write/read cycle bit-exactly.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "povmkit/circuits.hpp"
#include "povmkit/decomposer.hpp"
#include "povmkit/qops.hpp"
#include "povmkit/tomography.hpp"

namespace povmkit {

using json = nlohmann::json;

// --------------------------- matrices --------------------------------------

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return json{{"dim", m.rows()}, {"rows", std::move(rows)}};
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.contains("dim") || !j.contains("rows")) throw std::invalid_argument("matrix JSON: missing dim/rows");
    Eigen::Index d = j.at("dim").get<Eigen::Index>();
    const auto& rows = j.at("rows");
    if (static_cast<Eigen::Index>(rows.size()) != d) throw std::invalid_argument("matrix JSON: row count != dim");
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != d)
            throw std::invalid_argument("matrix JSON: column count != dim");
        for (Eigen::Index c = 0; c < d; ++c) {
            const auto& entry = row.at(static_cast<std::size_t>(c));
            m(r, c) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    return m;
}

// --------------------------- fixtures --------------------------------------

// Transcribed calibration data and reported parameters. Hermitian payloads are
// symmetrized on load (printing at ~4 digits breaks exact Hermiticity) and the
// symmetrization delta is kept for inspection.
struct Fixture {
    std::string id;
    std::string kind;  // povm_element | local_unitary | parameters
    std::string source;
    json payload;
    json meta;
    double symmetrization_delta = 0.0;
};

inline Fixture fixture_from_json(const json& j) {
    Fixture f;
    f.id = j.at("id").get<std::string>();
    f.kind = j.at("kind").get<std::string>();
    f.source = j.value("source", "");
    f.payload = j.at("payload");
    f.meta = j.value("meta", json::object());
    return f;
}

inline std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("MITIGATOR_FIXTURES")) return env;
#ifdef POVMKIT_FIXTURE_DIR
    return POVMKIT_FIXTURE_DIR;
#else
    return "fixtures";
#endif
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::system_error(ENOENT, std::generic_category(), "cannot open " + path.string());
    return json::parse(in);
}

inline Fixture load_fixture(const std::filesystem::path& path) {
    return fixture_from_json(load_json_file(path));
}

inline Fixture load_fixture_by_id(const std::string& id) {
    return load_fixture(fixture_dir() / (id + ".json"));
}

// Hermitian effect from a fixture, symmetrized; tolerance reflects the
// fixtures' printed precision.
inline Matrix fixture_effect(Fixture& f) {
    Matrix m = matrix_from_json(f.payload);
    if (!is_hermitian(m, 1e-6)) throw std::invalid_argument("fixture " + f.id + ": not Hermitian at 1e-6");
    f.symmetrization_delta = max_abs(m - hermitize(m));
    return hermitize(m);
}

inline PovmElement fixture_povm_element(Fixture& f) {
    OutcomeString outcome = OutcomeString::from_string(f.meta.value("outcome", std::string("00")));
    return {outcome, fixture_effect(f)};
}

// 2x2 unitary factor, re-unitarized via the polar factor; the printed entries
// carry ~1e-4 unitarity defect.
inline Matrix2 fixture_unitary_factor(Fixture& f) {
    Matrix m = matrix_from_json(f.payload);
    if (m.rows() != 2) throw std::invalid_argument("fixture " + f.id + ": expected a 2x2 unitary");
    Matrix2 raw = m;
    Matrix2 u = closest_unitary(raw);
    f.symmetrization_delta = (u - raw).cwiseAbs().maxCoeff();
    return u;
}

// --------------------------- POVM files ------------------------------------

inline json povm_to_json(const Povm& p) {
    json elements = json::object();
    for (const auto& el : p.elements) elements[el.outcome.str()] = matrix_to_json(el.matrix);
    return json{{"n_qubits", p.qubits()}, {"elements", std::move(elements)}};
}

inline Povm povm_from_json(const json& j) {
    int n = j.at("n_qubits").get<int>();
    Povm p;
    for (const auto& a : OutcomeString::all(n)) {
        const auto& elems = j.at("elements");
        if (!elems.contains(a.str()))
            throw std::invalid_argument("POVM JSON: missing element " + a.str());
        p.elements.push_back({a, hermitize(matrix_from_json(elems.at(a.str())))});
    }
    return p;
}

// --------------------------- count tables ----------------------------------

inline json count_table_to_json(const CountTable& t) {
    json counts = json::object();
    for (const auto& [probe, row] : t.counts) {
        json r = json::object();
        for (const auto& [outcome, c] : row) r[outcome] = c;
        counts[probe] = std::move(r);
    }
    return json{{"shots", t.shots}, {"seed", t.seed}, {"counts", std::move(counts)}};
}

inline CountTable count_table_from_json(const json& j) {
    CountTable t;
    t.shots = j.at("shots").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [probe, row] : j.at("counts").items())
        for (const auto& [outcome, c] : row.items())
            t.counts[probe][outcome] = c.get<long>();
    t.validate();
    return t;
}

// --------------------------- decomposition reports --------------------------

inline json local_unitary_to_json(const LocalUnitary& v) {
    json factors = json::array();
    for (const auto& f : v.factors()) factors.push_back(matrix_to_json(Matrix(f)));
    return factors;
}

inline LocalUnitary local_unitary_from_json(const json& j, double tol = 1e-6) {
    std::vector<Matrix2> fs;
    for (const auto& f : j) fs.push_back(Matrix2(closest_unitary(Matrix2(matrix_from_json(f)))));
    return LocalUnitary(std::move(fs), tol);
}

inline json decomposition_to_json(const ElementDecomposition& dec, const OptimizerSettings& opts) {
    return json{
        {"outcome", dec.outcome.str()},
        {"epsilon", dec.epsilon},
        {"exact", dec.exact},
        {"delta", dec.window.delta},
        {"b_minus", dec.window.b_minus},
        {"b_plus", dec.window.b_plus},
        {"q_c", dec.window.q_c},
        {"objective", dec.objective},
        {"trace_pi", dec.trace_pi},
        {"V", local_unitary_to_json(dec.V)},
        {"P", matrix_to_json(dec.P)},
        {"optimizer", {{"starts", opts.starts}, {"max_evals", opts.max_evals}, {"seed", opts.seed}}},
    };
}

// --------------------------- circuits --------------------------------------

inline json circuit_to_json(const Circuit& c) {
    json gates = json::array();
    for (const auto& g : c.gates) {
        json jg{{"kind", gate_kind_name(g.kind)}, {"qubits", g.qubits}};
        if (g.kind == GateKind::ry || g.kind == GateKind::cu) jg["angle"] = g.angle;
        gates.push_back(std::move(jg));
    }
    return json{{"n_qubits", c.n_qubits}, {"label_map", c.label_map}, {"gates", std::move(gates)}};
}

inline Circuit circuit_from_json(const json& j) {
    Circuit c;
    c.n_qubits = j.at("n_qubits").get<int>();
    if (j.contains("label_map"))
        for (const auto& [k, v] : j.at("label_map").items()) c.label_map[k] = v.get<int>();
    for (const auto& jg : j.at("gates")) {
        Gate g{gate_kind_from_string(jg.at("kind").get<std::string>()),
               jg.at("qubits").get<std::vector<int>>(), jg.value("angle", 0.0)};
        c.gates.push_back(std::move(g));
    }
    c.validate();
    return c;
}

// --------------------------- file helpers ----------------------------------

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::system_error(EACCES, std::generic_category(), "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace povmkit
