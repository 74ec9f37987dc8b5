// povmkit command-line interface.
//
//   povmkit tomography  --povm <file> --scheme <s> --shots N --seed S --out <file>
//   povmkit decompose   --element <file> --outcome <bits> [--full <povm>] --seed S --out <file>
//   povmkit certify     --state <psi> --p <r> [--p-end E --p-step D] --detector <file|ideal>
//                       [--mitigate] --seed S --shots N --reps R --out <file> [--csv <file>]
//   povmkit reproduce   --what <appendix1|appendix2|appendix4|tables> --out <dir>
//
// Every subcommand accepts --check to re-validate an existing output file
// without recomputation. Exit codes: 0 success, 2 io, 3 parse, 4 usage,
// 5 numerical-validation failure. Errors print machine-readable JSON on
// stderr. MITIGATOR_FIXTURES overrides the fixture directory.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "povmkit/circuits.hpp"
#include "povmkit/decomposer.hpp"
#include "povmkit/json_io.hpp"
#include "povmkit/mitigator.hpp"
#include "povmkit/tomography.hpp"
#include "povmkit/witness.hpp"

namespace fs = std::filesystem;
using namespace povmkit;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- helpers --

PovmElement load_element_file(const fs::path& path, std::string outcome_override) {
    json j = load_json_file(path);
    if (j.contains("payload")) {
        Fixture f = fixture_from_json(j);
        PovmElement el = fixture_povm_element(f);
        if (!outcome_override.empty()) el.outcome = OutcomeString::from_string(outcome_override);
        return el;
    }
    if (outcome_override.empty())
        throw UsageError("--outcome is required for raw matrix files");
    return {OutcomeString::from_string(outcome_override), hermitize(matrix_from_json(j))};
}

LocalUnitary load_sydney_v() {
    Fixture f1 = load_fixture_by_id("sydney_v1");
    Fixture f4 = load_fixture_by_id("sydney_v4");
    return LocalUnitary({fixture_unitary_factor(f1), fixture_unitary_factor(f4)}, 1e-6);
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
    for (const char* k : keys)
        if (!j.contains(k)) throw std::runtime_error(what + ": missing key '" + k + "'");
}

int finish_check(const fs::path& out, std::initializer_list<const char*> keys) {
    json j = load_json_file(out);
    require_keys(j, keys, out.string());
    std::cout << out.string() << ": valid\n";
    return 0;
}

double binomial_fraction(double p, int shots, Rng& rng) {
    long hits = 0;
    for (int s = 0; s < shots; ++s)
        if (rng.uniform() < p) ++hits;
    return static_cast<double>(hits) / shots;
}

struct RepStats {
    double mean = 0.0;
    double stddev = 0.0;
};

RepStats repeated_binomial(double p, int shots, int reps, std::uint64_t seed) {
    std::vector<double> xs;
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        xs.push_back(binomial_fraction(p, shots, rng));
    }
    RepStats st;
    for (double x : xs) st.mean += x / reps;
    if (reps > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - st.mean) * (x - st.mean);
        st.stddev = std::sqrt(ss / (reps - 1));
    }
    return st;
}

// ------------------------------------------------------------- tomography --

int cmd_tomography(const fs::path& povm_file, const std::string& scheme_name, int shots,
                   std::uint64_t seed, const fs::path& out, bool check) {
    if (check)
        return finish_check(out, {"scheme", "shots", "seed", "reconstructed", "distances", "max_distance"});

    Povm truth = povm_from_json(load_json_file(povm_file));
    truth.validate();
    ProbeScheme scheme = probe_scheme_from_string(scheme_name);
    auto probes = probe_states(truth.qubits(), scheme);
    CountTable counts = run_tomography(truth, probes, shots, seed);
    Reconstruction rec = reconstruct_povm(probes, counts);
    rec.povm.validate();

    json distances = json::object();
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.elements.size(); ++k) {
        double d = max_abs(rec.povm.elements[k].matrix - truth.elements[k].matrix);
        distances[truth.elements[k].outcome.str()] = d;
        worst = std::max(worst, d);
    }

    write_json_file(out, json{{"scheme", scheme_name},
                              {"shots", shots},
                              {"seed", seed},
                              {"counts", count_table_to_json(counts)},
                              {"reconstructed", povm_to_json(rec.povm)},
                              {"distances", distances},
                              {"max_distance", worst}});
    std::cout << "reconstructed " << truth.elements.size() << " elements; max distance to truth "
              << worst << "\n";
    return 0;
}

// -------------------------------------------------------------- decompose --

int cmd_decompose(const fs::path& element_file, const std::string& outcome,
                  const fs::path& full_povm, std::uint64_t seed, int starts,
                  const fs::path& out, bool check) {
    if (check) return finish_check(out, {"epsilon", "objective"});

    OptimizerSettings opts;
    opts.seed = seed;
    opts.starts = starts;

    if (!full_povm.empty()) {
        Povm povm = povm_from_json(load_json_file(full_povm));
        povm.validate();
        FullDecomposition full = decompose_full(povm, opts);
        json records = json::array();
        for (const auto& rec : full.records)
            records.push_back(json{{"outcome", rec.outcome.str()},
                                   {"epsilon", rec.epsilon},
                                   {"exact", rec.exact},
                                   {"delta", rec.window.delta},
                                   {"b_minus", rec.window.b_minus},
                                   {"b_plus", rec.window.b_plus},
                                   {"q_c", rec.window.q_c},
                                   {"P", matrix_to_json(rec.P)}});
        write_json_file(out, json{{"epsilon", json()},
                                  {"objective", full.objective},
                                  {"V", local_unitary_to_json(full.V)},
                                  {"records", records},
                                  {"optimizer", {{"starts", opts.starts}, {"max_evals", opts.max_evals}, {"seed", seed}}}});
        std::cout << "shared-V decomposition: objective " << full.objective << " over "
                  << full.records.size() << " outcomes\n";
        return 0;
    }

    PovmElement el = load_element_file(element_file, outcome);
    el.validate();
    ElementDecomposition dec = decompose_element(el, opts);
    ElementDecomposition min_eps = min_epsilon_over_unitaries(el, opts);

    json report = decomposition_to_json(dec, opts);
    double rate_raw = readout_error_rate(el, el.outcome, RateConvention::raw);
    double rate_norm = readout_error_rate(el, el.outcome, RateConvention::normalized);
    report["epsilon_min"] = min_eps.epsilon;
    report["error_rate_raw"] = rate_raw;
    report["error_rate_normalized"] = rate_norm;
    bool crosstalk = false;
    if (el.outcome.size() >= 2) {
        CrosstalkReport ct = detect_crosstalk(el);
        crosstalk = ct.crosstalk;
        json spectra = json::array();
        for (const auto& sv : ct.spectra) spectra.push_back(sv);
        report["crosstalk"] = crosstalk;
        report["schmidt_spectra"] = spectra;
    }
    write_json_file(out, report);

    std::printf("epsilon     %.6f  (minimal over V: %.6f)\n", dec.epsilon, min_eps.epsilon);
    std::printf("delta       %.6f\n", dec.window.delta);
    std::printf("objective   %.6f\n", dec.objective);
    std::printf("crosstalk   %s\n", crosstalk ? "true" : "false");
    std::printf("error rate  raw %.6f   normalized %.6f\n", rate_raw, rate_norm);
    return 0;
}

// ---------------------------------------------------------------- certify --

int cmd_certify(const std::string& state_name, double p_start, double p_end, double p_step,
                const std::string& detector, bool mitigate_flag, const std::string& prep,
                std::uint64_t seed, int shots, int reps, const fs::path& out,
                const fs::path& csv, bool check) {
    if (check) return finish_check(out, {"metadata", "rows"});

    BellPrep kind;
    if (state_name == "phi_plus") kind = BellPrep::phi_plus;
    else if (state_name == "psi_minus") kind = BellPrep::psi_minus;
    else throw UsageError("--state must be phi_plus or psi_minus");

    WitnessOperator witness = build_reference_witness();

    bool ideal = (detector == "ideal");
    PovmElement element{OutcomeString::from_string("00"), Matrix::Identity(4, 4)};
    ElementDecomposition dec{OutcomeString::from_string("00"), 0.0, LocalUnitary::identity(2),
                             Matrix::Zero(4, 4), {}, 0.0, true, 1.0};
    if (!ideal) {
        element = load_element_file(detector, "00");
        element.validate();
        if (mitigate_flag) {
            OptimizerSettings opts;
            opts.seed = seed;
            dec = decompose_element(element, opts);
        }
    }

    if (p_end < p_start) p_end = p_start;
    const std::size_t n_rows =
        static_cast<std::size_t>(std::floor((p_end - p_start) / p_step + 1e-9)) + 1;
    json rows = json::array();
    for (std::size_t row_index = 0; row_index < n_rows; ++row_index) {
        double p = std::min(p_start + static_cast<double>(row_index) * p_step, p_end);
        DensityOperator rho = (prep == "circuit")
            ? [&] {
                  Circuit c = prepare_noisy_bell(kind, p);
                  DensityOperator full = run(c, DensityOperator::pure(
                      basis_state(c.n_qubits, OutcomeString::from_index(0, c.n_qubits))));
                  auto [a, b] = sydney_data_qubits();
                  return DensityOperator(partial_trace(full.matrix(), {a, b}));
              }()
            : noisy_bell_target(kind, p);

        Matrix xi = witness_output_marginal(rho);
        double p0_formula = (witness.W * rho.matrix()).trace().real();
        double p_e = ideal ? xi(0, 0).real() : (xi * element.matrix).trace().real();

        CertificationVerdict raw = certify(p_e, witness.B_L, witness.B_U);
        json row{{"state", state_name}, {"p", p}, {"p0_formula", p0_formula}, {"p_e", p_e},
                 {"verdict_raw", verdict_name(raw.verdict)}, {"margin_raw", raw.margin}};

        double p_used = p_e;
        if (mitigate_flag && !ideal && !dec.exact) {
            Matrix u = dec.V.full();
            double p_e_qpp = (xi * (u.adjoint() * element.matrix * u)).trace().real();
            MitigationParameters params{dec.trace_pi, dec.epsilon, dec.window.q_c, dec.V};
            double p0_eta = post_process(p_e_qpp, params);
            CertificationVerdict mit = certify(p0_eta, witness.B_L, witness.B_U);
            row["p_e_qpp"] = p_e_qpp;
            row["p0_eta"] = p0_eta;
            row["verdict_mitigated"] = verdict_name(mit.verdict);
            row["margin_mitigated"] = mit.margin;
            row["bound"] = error_bound(dec.epsilon, dec.window.delta);
            p_used = p_e_qpp;
        }

        if (shots > 0) {
            RepStats st = repeated_binomial(p_used, shots, reps, derive_seed(seed, 1000 + row_index));
            row["p_hat_mean"] = st.mean;
            row["p_hat_std"] = st.stddev;
        }
        rows.push_back(std::move(row));
    }

    json report{{"metadata",
                 {{"state", state_name}, {"detector", detector}, {"mitigate", mitigate_flag},
                  {"prep", prep}, {"seed", seed}, {"shots", shots}, {"repetitions", reps},
                  {"B_L", witness.B_L}, {"B_U", witness.B_U}}},
                {"rows", rows}};
    write_json_file(out, report);

    if (!csv.empty()) {
        std::ofstream cs(csv);
        if (!cs) throw std::system_error(EACCES, std::generic_category(), "cannot write " + csv.string());
        cs << "r,p0_formula,p_e,p0_eta,B_L,B_U,verdict_raw,verdict_mitigated\n";
        for (const auto& row : rows) {
            cs << row.at("p").get<double>() << "," << row.at("p0_formula").get<double>() << ","
               << row.at("p_e").get<double>() << ","
               << (row.contains("p0_eta") ? std::to_string(row.at("p0_eta").get<double>()) : "")
               << "," << witness.B_L << "," << witness.B_U << ","
               << row.at("verdict_raw").get<std::string>() << ","
               << (row.contains("verdict_mitigated") ? row.at("verdict_mitigated").get<std::string>() : "")
               << "\n";
        }
        write_json_file(csv.string() + ".plotspec.json",
                        json{{"x", "r"},
                             {"series", {"p0_formula", "p_e", "p0_eta"}},
                             {"hlines", {{"B_L", witness.B_L}, {"B_U", witness.B_U}}}});
    }
    std::cout << "wrote " << rows.size() << " row(s) to " << out.string() << "\n";
    return 0;
}

// -------------------------------------------------------------- reproduce --

json compare_row(const std::string& quantity, double reported, double artifact,
                 double tolerance, bool gate) {
    double diff = std::abs(reported - artifact);
    json row{{"quantity", quantity}, {"reported", reported}, {"artifact", artifact}, {"abs_diff", diff}};
    if (gate) {
        row["tolerance"] = tolerance;
        row["pass"] = diff <= tolerance;
    }
    return row;
}

json bound_row(const std::string& quantity, double bound, double artifact) {
    json row{{"quantity", quantity}, {"reported", bound}, {"artifact", artifact},
             {"abs_diff", std::abs(bound - artifact)}, {"tolerance", bound}, {"pass", artifact <= bound}};
    return row;
}

void print_rows(const json& rows) {
    std::printf("%-42s %12s %12s %10s  %s\n", "quantity", "reported", "artifact", "abs diff", "status");
    for (const auto& r : rows) {
        std::string status = "info";
        if (r.contains("pass")) status = r.at("pass").get<bool>() ? "pass" : "FAIL";
        std::printf("%-42s %12.6f %12.6f %10.2e  %s\n", r.at("quantity").get<std::string>().c_str(),
                    r.at("reported").get<double>(), r.at("artifact").get<double>(),
                    r.at("abs_diff").get<double>(), status.c_str());
    }
}

json reproduce_appendix1(std::uint64_t seed) {
    Fixture f = load_fixture_by_id("rigetti_pi00");
    PovmElement el = fixture_povm_element(f);
    OptimizerSettings opts;
    opts.seed = seed;
    ElementDecomposition dec = decompose_element(el, opts);
    CrosstalkReport ct = detect_crosstalk(el);

    const double reported_eps = 0.2940, reported_delta = 0.3683;
    json rows = json::array();
    rows.push_back(bound_row("objective eps*delta (<= reported + 0.01)", reported_eps * reported_delta + 0.01, dec.objective));
    rows.push_back(compare_row("epsilon", reported_eps, dec.epsilon, 0.0, false));
    rows.push_back(compare_row("delta", reported_delta, dec.window.delta, 0.0, false));
    rows.push_back(compare_row("error rate (raw, normalized matrix)", 0.26,
                               readout_error_rate(el, el.outcome, RateConvention::raw), 1e-3, true));
    rows.push_back(compare_row("err bound at reported params", 0.0, error_bound(reported_eps, reported_delta), 0.0, false));
    rows.push_back(compare_row("crosstalk detected (1=yes)", 1.0, ct.crosstalk ? 1.0 : 0.0, 0.5, true));
    return json{{"what", "appendix1"}, {"rows", rows},
                {"decomposition", decomposition_to_json(dec, opts)}};
}

json reproduce_appendix2(std::uint64_t seed) {
    Fixture f = load_fixture_by_id("yorktown_pi000");
    PovmElement el = fixture_povm_element(f);
    OptimizerSettings opts;
    opts.seed = seed;
    ElementDecomposition dec = decompose_element(el, opts);
    CrosstalkReport ct = detect_crosstalk(el);

    const double reported_eps = 0.463, reported_delta = 0.231;
    json rows = json::array();
    rows.push_back(bound_row("objective eps*delta (<= reported + 0.01)", reported_eps * reported_delta + 0.01, dec.objective));
    rows.push_back(compare_row("trace", 1.32, el.matrix.trace().real(), 5e-3, true));
    rows.push_back(compare_row("error rate (raw)", 0.15,
                               readout_error_rate(el, el.outcome, RateConvention::raw), 5e-3, true));
    rows.push_back(compare_row("crosstalk detected (1=yes)", 1.0, ct.crosstalk ? 1.0 : 0.0, 0.5, true));

    // The published P is claimed NPT on the 1:02 and 2:01 splits; with the
    // unpublished V this is checked on our own optimizer's P and recorded.
    json ppt = json::object();
    if (!dec.exact) {
        PptResult s1 = ppt_check(dec.P, {1});
        PptResult s2 = ppt_check(dec.P, {2});
        ppt["split_1_vs_02"] = {{"npt", s1.npt}, {"min_eigenvalue", s1.min_eigenvalue}};
        ppt["split_2_vs_01"] = {{"npt", s2.npt}, {"min_eigenvalue", s2.min_eigenvalue}};
    }
    return json{{"what", "appendix2"}, {"rows", rows}, {"ppt_of_our_P", ppt},
                {"decomposition", decomposition_to_json(dec, opts)}};
}

json reproduce_appendix4(std::uint64_t seed) {
    Fixture fp = load_fixture_by_id("sydney_pi00");
    Fixture fq = load_fixture_by_id("sydney_pi00_qpp");
    PovmElement el = fixture_povm_element(fp);
    PovmElement el_qpp = fixture_povm_element(fq);
    LocalUnitary v = load_sydney_v();
    Fixture params = load_fixture_by_id("sydney_params");
    const double eps = params.payload.at("epsilon").get<double>();
    const double eta = params.payload.at("eta").get<double>();

    auto [pi_tilde, trace] = normalize_element(el);

    json rows = json::array();
    rows.push_back(compare_row("tr Pi00", 0.9452, trace, 1e-12, true));
    rows.push_back(compare_row("<00|Pi00|00>", 0.8787, el.matrix(0, 0).real(), 1e-12, true));
    rows.push_back(compare_row("error rate raw", 0.1213,
                               readout_error_rate(el, el.outcome, RateConvention::raw), 1e-4, true));
    rows.push_back(compare_row("error rate raw (QPP detector)", 0.1201,
                               readout_error_rate(el_qpp, el_qpp.outcome, RateConvention::raw), 1e-4, true));

    // Published decomposition parameters against the published V fixture.
    Vector phi = v.apply_to_basis(el.outcome);
    Matrix residual = hermitize(pi_tilde - (1.0 - eps) * (phi * phi.adjoint()));
    double res_min = min_eigenvalue(residual);
    SpectralWindow wv = spectral_window(residual / eps);
    rows.push_back(json{{"quantity", "residual min eig @ published V"}, {"reported", -1e-3},
                        {"artifact", res_min}, {"abs_diff", std::abs(res_min + 1e-3)},
                        {"tolerance", -1e-3}, {"pass", res_min >= -1e-3}});
    rows.push_back(compare_row("b_plus @ published V", 0.5308, wv.b_plus, 5e-3, true));
    rows.push_back(compare_row("b_minus @ published V", 0.0104, wv.b_minus, 5e-3, true));
    rows.push_back(compare_row("delta @ published V", 0.2597, wv.delta, 5e-3, true));
    rows.push_back(compare_row("q_c @ published V", 0.2706, wv.q_c, 5e-3, true));
    rows.push_back(compare_row("|eta - q_c| @ published V", eta, wv.q_c, 1e-3, true));
    InnerSolution inner_v = min_epsilon_for_unitary(pi_tilde, v, el.outcome);
    rows.push_back(compare_row("min eps @ published V", eps, inner_v.epsilon, 0.0, false));

    // Identity cross-check: the published parameters are reproduced closely
    // with V = I, which locates the mismatch in the 4-digit printed V.
    Matrix residual_id = hermitize(pi_tilde - (1.0 - eps) * basis_projector(2, el.outcome));
    SpectralWindow wi = spectral_window(residual_id / eps);
    rows.push_back(compare_row("residual min eig @ V=I (info)", 0.0, min_eigenvalue(residual_id), 0.0, false));
    rows.push_back(compare_row("b_plus @ V=I (info)", 0.5308, wi.b_plus, 0.0, false));
    rows.push_back(compare_row("b_minus @ V=I (info)", 0.0104, wi.b_minus, 0.0, false));
    rows.push_back(compare_row("delta @ V=I (info)", 0.2597, wi.delta, 0.0, false));
    rows.push_back(compare_row("q_c @ V=I (info)", 0.2706, wi.q_c, 0.0, false));

    OptimizerSettings opts;
    opts.seed = seed;
    ElementDecomposition dec = decompose_element(el, opts);
    rows.push_back(compare_row("our epsilon", eps, dec.epsilon, 0.0, false));
    rows.push_back(compare_row("our objective", eps * params.payload.at("delta").get<double>(),
                               dec.objective, 0.0, false));

    WitnessOperator w = build_reference_witness();
    auto window = eta_window(w.B_L, w.B_U, trace, eps, 0.0);
    json eta_json = json::object();
    if (window) {
        eta_json = {{"lo", window->first}, {"hi", window->second},
                    {"contains_reported_eta", window->first < eta && eta < window->second}};
    }
    return json{{"what", "appendix4"}, {"rows", rows}, {"eta_window_kappa0", eta_json},
                {"decomposition", decomposition_to_json(dec, opts)}};
}

json reproduce_tables(std::uint64_t seed, int shots, int reps) {
    Fixture fp = load_fixture_by_id("sydney_pi00");
    Fixture fq = load_fixture_by_id("sydney_pi00_qpp");
    PovmElement el = fixture_povm_element(fp);
    PovmElement el_qpp = fixture_povm_element(fq);
    Fixture params_f = load_fixture_by_id("sydney_params");
    MitigationParameters params{params_f.payload.at("trace_pi").get<double>(),
                                params_f.payload.at("epsilon").get<double>(),
                                params_f.payload.at("eta").get<double>(), LocalUnitary::identity(2)};

    struct TableRow {
        const char* state;
        BellKind kind;
        double r;
        double p0_table;   // ideal column as printed
        double pe_reported;   // no-QPP measurement
        double qpp_reported;  // after local pre-rotations
        double p0eta_reported;
    };
    // Ideal-column printed values follow the r = 1/4 convention; the computed
    // p0 column below evaluates tr[W rho(r)] at the stated r.
    const TableRow reported[] = {
        {"phi_plus(3/8)", BellKind::phi_plus, 3.0 / 8.0, 0.0625, 0.1206, 0.1238, 0.1145},
        {"phi_plus(1/2)", BellKind::phi_plus, 0.5, 0.1250, 0.1625, 0.1635, 0.1602},
        {"psi_minus(1/2)", BellKind::psi_minus, 0.5, 0.3750, 0.3187, 0.3286, 0.3501},
        {"psi_minus(3/8)", BellKind::psi_minus, 3.0 / 8.0, 0.4375, 0.3649, 0.3953, 0.3967},
    };

    WitnessOperator w = build_reference_witness();
    json rows = json::array();
    double sigma_sum = 0.0;
    int sigma_count = 0;
    for (std::size_t i = 0; i < std::size(reported); ++i) {
        const TableRow& row = reported[i];
        DensityOperator rho = werner_state(row.kind, row.r);
        Matrix xi = witness_output_marginal(rho);
        double p0_formula = (w.W * rho.matrix()).trace().real();
        double pe_raw = (xi * el.matrix).trace().real();
        double pe_qpp = (xi * el_qpp.matrix).trace().real();
        double p0eta_raw = post_process(pe_raw, params);
        double p0eta_qpp = post_process(pe_qpp, params);

        RepStats st = repeated_binomial(pe_qpp, shots, reps, derive_seed(seed, i));
        double sigma_post = st.stddev / (params.trace_pi * (1.0 - params.epsilon));
        sigma_sum += st.stddev;
        ++sigma_count;

        rows.push_back(json{{"state", row.state},
                            {"r", row.r},
                            {"p0_formula", p0_formula},
                            {"p0_reported_table", row.p0_table},
                            {"pe_pred_raw", pe_raw},
                            {"pe_pred_qpp", pe_qpp},
                            {"p0eta_pred_from_raw", p0eta_raw},
                            {"p0eta_pred_from_qpp", p0eta_qpp},
                            {"pe_reported", row.pe_reported},
                            {"qpp_reported", row.qpp_reported},
                            {"p0eta_reported", row.p0eta_reported},
                            {"delta_pe", std::abs(pe_raw - row.pe_reported)},
                            {"delta_p0eta", std::abs(p0eta_qpp - row.p0eta_reported)},
                            {"shots_mean", st.mean},
                            {"shots_std", st.stddev},
                            {"p0eta_shots_std", sigma_post}});
    }
    double sigma_avg = sigma_sum / sigma_count;

    std::printf("%-16s %10s %10s %10s %10s %10s %10s %8s\n", "state", "p0(calc)", "p0(table)",
                "pe(pred)", "pe(rptd)", "p0eta(pred)", "p0eta(ppr)", "sigma");
    for (const auto& r : rows)
        std::printf("%-16s %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %8.4f\n",
                    r.at("state").get<std::string>().c_str(), r.at("p0_formula").get<double>(),
                    r.at("p0_reported_table").get<double>(), r.at("pe_pred_raw").get<double>(),
                    r.at("pe_reported").get<double>(), r.at("p0eta_pred_from_qpp").get<double>(),
                    r.at("p0eta_reported").get<double>(), r.at("shots_std").get<double>());
    std::printf("mean shot-noise sigma over states: %.4f (reported around 0.01)\n", sigma_avg);

    return json{{"what", "tables"},
                {"rows", rows},
                {"metadata",
                 {{"seed", seed}, {"shots", shots}, {"repetitions", reps},
                  {"sigma_mean", sigma_avg},
                  {"note", "hardware p_e values include gate and state-preparation noise beyond "
                           "the detector model; deltas are reported, not asserted"}}}};
}

int cmd_reproduce(const std::string& what, const fs::path& out_dir, std::uint64_t seed, bool check) {
    fs::path out = out_dir / (what + ".json");
    if (check) return finish_check(out, {"what", "rows"});

    if (!fs::exists(fixture_dir()))
        throw std::system_error(ENOENT, std::generic_category(),
                                "fixture directory not found: " + fixture_dir().string());
    fs::create_directories(out_dir);

    json report;
    if (what == "appendix1") report = reproduce_appendix1(seed);
    else if (what == "appendix2") report = reproduce_appendix2(seed);
    else if (what == "appendix4") report = reproduce_appendix4(seed);
    else if (what == "tables") report = reproduce_tables(seed, 8192, 15);
    else throw UsageError("unknown --what: " + what);

    if (report.contains("rows") && what != "tables") print_rows(report.at("rows"));
    write_json_file(out, report);
    std::cout << "report written to " << out.string() << "\n";
    return 0;
}

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"POVM characterization, readout-error mitigation and entanglement certification"};
    app.require_subcommand(1);

    std::string povm_file, scheme = "pauli6", out, element_file, outcome, full_povm;
    std::string state, detector = "ideal", csv, what, prep = "werner";
    int shots = 8192, reps = 1, starts = 32;
    std::uint64_t seed = 0;
    double p = 0.0, p_end = -1.0, p_step = 0.01;
    bool mitigate_flag = false, check = false;

    auto* tomo = app.add_subcommand("tomography", "simulate probes against a POVM and reconstruct it");
    tomo->add_option("--povm", povm_file, "POVM JSON file (ground truth)")->required();
    tomo->add_option("--scheme", scheme)->check(CLI::IsMember({"pauli6", "mub4"}));
    tomo->add_option("--shots", shots);
    tomo->add_option("--seed", seed);
    tomo->add_option("--out", out)->required();
    tomo->add_flag("--check", check, "re-validate an existing output file");

    auto* dc = app.add_subcommand("decompose", "decompose a POVM element (or a full POVM with --full)");
    dc->add_option("--element", element_file);
    dc->add_option("--outcome", outcome);
    dc->add_option("--full", full_povm, "POVM JSON file for the shared-V variant");
    dc->add_option("--seed", seed);
    dc->add_option("--starts", starts);
    dc->add_option("--out", out)->required();
    dc->add_flag("--check", check);

    auto* ct = app.add_subcommand("certify", "entanglement certification for noisy Bell circuits");
    ct->add_option("--state", state)->check(CLI::IsMember({"phi_plus", "psi_minus"}))->required();
    ct->add_option("--p", p, "mixing parameter r (sweep start)")->required();
    ct->add_option("--p-end", p_end, "sweep end (inclusive)");
    ct->add_option("--p-step", p_step);
    ct->add_option("--detector", detector, "POVM element file or 'ideal'");
    ct->add_flag("--mitigate", mitigate_flag);
    ct->add_option("--prep", prep)->check(CLI::IsMember({"werner", "circuit"}));
    ct->add_option("--seed", seed);
    ct->add_option("--shots", shots, "0 disables shot simulation");
    ct->add_option("--reps", reps);
    ct->add_option("--out", out)->required();
    ct->add_option("--csv", csv, "also emit sweep CSV + plot-spec JSON");
    ct->add_flag("--check", check);

    auto* rp = app.add_subcommand("reproduce", "side-by-side reports against the published values");
    rp->add_option("--what", what)->required();
    rp->add_option("--out", out, "output directory")->required();
    rp->add_option("--seed", seed);
    rp->add_flag("--check", check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 4;
    }

    try {
        if (tomo->parsed()) return cmd_tomography(povm_file, scheme, shots, seed, out, check);
        if (dc->parsed()) {
            if (full_povm.empty() && element_file.empty())
                throw UsageError("decompose: provide --element or --full");
            return cmd_decompose(element_file, outcome, full_povm, seed, starts, out, check);
        }
        if (ct->parsed())
            return cmd_certify(state, p, p_end, p_step, detector, mitigate_flag, prep, seed,
                               shots, reps, out, csv, check);
        if (rp->parsed()) return cmd_reproduce(what, out, seed, check);
    } catch (const UsageError& e) {
        print_error("usage", e.what());
        return 4;
    } catch (const std::system_error& e) {
        print_error("io", e.what());
        return 2;
    } catch (const json::exception& e) {
        print_error("parse", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("validation", e.what());
        return 5;
    }
    return 0;
}
