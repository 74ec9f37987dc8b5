#include <catch2/catch_amalgamated.hpp>

#include "povmkit/json_io.hpp"
#include "povmkit/mitigator.hpp"

using namespace povmkit;

namespace {

PovmElement fixture_element(const std::string& id) {
    Fixture f = load_fixture_by_id(id);
    return fixture_povm_element(f);
}

LocalUnitary sydney_v() {
    Fixture f1 = load_fixture_by_id("sydney_v1");
    Fixture f4 = load_fixture_by_id("sydney_v4");
    return LocalUnitary({fixture_unitary_factor(f1), fixture_unitary_factor(f4)}, 1e-6);
}

// Element built exactly as (1-eps) V|a><a|V^dag + eps P, scaled by trace t.
struct Synthetic {
    PovmElement element;
    ElementDecomposition dec;
    Matrix rotated_p;  // V^dag P V
};

Synthetic make_synthetic(std::uint64_t seed, double eps_max = 0.5) {
    Rng rng(seed);
    LocalUnitary v = random_local_unitary(rng, 2);
    Matrix g = random_ginibre(rng, 4);
    Matrix p = hermitize(g * g.adjoint());
    p /= p.trace().real();
    double eps = rng.uniform(0.0, eps_max);
    double trace = rng.uniform(0.8, 1.0);
    OutcomeString a = OutcomeString::from_index(rng.next() % 4, 2);

    Vector phi = v.apply_to_basis(a);
    Matrix tilde = (1.0 - eps) * (phi * phi.adjoint()) + eps * p;
    Synthetic s{{a, trace * tilde},
                {a, eps, v, p, spectral_window(p), 0.0, false, trace},
                Matrix()};
    s.dec.objective = eps * s.dec.window.delta;
    Matrix u = v.full();
    s.rotated_p = hermitize(u.adjoint() * p * u);
    return s;
}

}  // namespace

TEST_CASE("quantum pre-processing") {
    Rng rng(1);
    DensityOperator rho = random_density(rng, 2);

    SECTION("identity leaves the state alone") {
        CHECK(max_abs(apply_qpp(rho, LocalUnitary::identity(2)).matrix() - rho.matrix()) == 0.0);
    }

    SECTION("an X-like unitary flips a computational state") {
        Matrix2 x;
        x << 0, 1, 1, 0;
        DensityOperator zero = DensityOperator::pure(basis_state(1, OutcomeString::from_string("0")));
        DensityOperator flipped = apply_qpp(zero, LocalUnitary({x}));
        CHECK(max_abs(flipped.matrix() - basis_projector(1, OutcomeString::from_string("1"))) < 1e-14);
    }

    SECTION("trace and spectrum are preserved") {
        LocalUnitary v = random_local_unitary(rng, 2);
        DensityOperator out = apply_qpp(rho, v);
        CHECK(out.matrix().trace().real() == Catch::Approx(1.0).margin(1e-12));
        EigResult before = eig_hermitian(rho.matrix());
        EigResult after = eig_hermitian(out.matrix());
        CHECK((before.values - after.values).cwiseAbs().maxCoeff() < 1e-10);
    }

    SECTION("cyclic trace identity against the Sydney unitaries") {
        DensityOperator rho00 = DensityOperator::pure(basis_state(2, OutcomeString::from_string("00")));
        LocalUnitary v = sydney_v();
        Matrix pi = fixture_element("sydney_pi00").matrix;
        double lhs = expectation(apply_qpp(rho00, v), pi);
        Matrix u = v.full();
        double rhs = expectation(rho00, hermitize(u.adjoint() * pi * u));
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("noisy probability") {
    DensityOperator rho00 = DensityOperator::pure(basis_state(2, OutcomeString::from_string("00")));
    LocalUnitary id = LocalUnitary::identity(2);

    PovmElement ideal{OutcomeString::from_string("00"), basis_projector(2, OutcomeString::from_string("00"))};
    CHECK(noisy_probability(rho00, ideal, id) == Catch::Approx(1.0).margin(1e-12));

    CHECK(noisy_probability(rho00, fixture_element("sydney_pi00"), id) ==
          Catch::Approx(0.8787).margin(1e-12));
    CHECK(noisy_probability(rho00, fixture_element("sydney_pi00_qpp"), id) ==
          Catch::Approx(0.8799).margin(1e-12));

    PovmElement invalid{OutcomeString::from_string("00"),
                        1.2 * basis_projector(2, OutcomeString::from_string("00"))};
    CHECK_THROWS_AS(noisy_probability(rho00, invalid, id), std::runtime_error);
}

TEST_CASE("classical post-processing") {
    SECTION("identity at eps = 0, trace 1") {
        MitigationParameters params{1.0, 0.0, 0.3, LocalUnitary::identity(2)};
        CHECK(post_process(0.42, params) == 0.42);
    }

    SECTION("published Sydney parameters") {
        MitigationParameters params{0.9452, 0.0740, 0.2711, LocalUnitary::identity(2)};
        CHECK(post_process(0.3690, params) == Catch::Approx(0.3999267467591166).margin(1e-12));
        CHECK(post_process(0.8787, params) == Catch::Approx(0.9822711875576402).margin(1e-12));
    }

    SECTION("affine in p_e") {
        MitigationParameters params{0.93, 0.21, 0.4, LocalUnitary::identity(2)};
        double x = 0.3, y = 0.7, a = 0.25, b = 0.75;
        double lhs = post_process(a * x + b * y, params);
        double rhs = a * post_process(x, params) + b * post_process(y, params);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));  // a + b = 1
    }

    SECTION("rejects eps >= 1") {
        MitigationParameters params{1.0, 1.0, 0.0, LocalUnitary::identity(2)};
        CHECK_THROWS_AS(post_process(0.5, params), std::invalid_argument);
    }
}

TEST_CASE("error bound") {
    CHECK(error_bound(0.0, 0.7) == 0.0);
    CHECK(error_bound(0.0740, 0.2597) == Catch::Approx(0.020753563714902803).margin(1e-12));
    CHECK(error_bound(0.2940, 0.3683) == Catch::Approx(0.153371388101983).margin(1e-12));
    CHECK_THROWS_AS(error_bound(1.0, 0.1), std::invalid_argument);
}

TEST_CASE("readout error rates") {
    OutcomeString a00 = OutcomeString::from_string("00");
    CHECK(readout_error_rate(fixture_element("sydney_pi00"), a00, RateConvention::raw) ==
          Catch::Approx(0.1213).margin(1e-12));
    CHECK(readout_error_rate(fixture_element("sydney_pi00_qpp"), a00, RateConvention::raw) ==
          Catch::Approx(0.1201).margin(1e-12));
    CHECK(readout_error_rate(fixture_element("rigetti_pi00"), a00, RateConvention::raw) ==
          Catch::Approx(0.2605).margin(1e-12));

    PovmElement ideal{a00, basis_projector(2, a00)};
    CHECK(readout_error_rate(ideal, a00, RateConvention::raw) == Catch::Approx(0.0).margin(1e-14));
    CHECK(readout_error_rate(ideal, a00, RateConvention::normalized) == Catch::Approx(0.0).margin(1e-14));

    // normalized convention divides the diagonal by the trace
    PovmElement syd = fixture_element("sydney_pi00");
    CHECK(readout_error_rate(syd, a00, RateConvention::normalized) ==
          Catch::Approx(1.0 - 0.8787 / 0.9452).margin(1e-12));
}

TEST_CASE("mitigation pipeline") {
    SECTION("noiseless element recovers exactly") {
        OutcomeString a = OutcomeString::from_string("00");
        PovmElement ideal{a, basis_projector(2, a)};
        ElementDecomposition dec{a, 0.0, LocalUnitary::identity(2), Matrix::Zero(4, 4), {}, 0.0, true, 1.0};
        Rng rng(2);
        DensityOperator rho = random_density(rng, 2);
        MitigationReport rep = mitigate(rho, ideal, dec);
        CHECK(rep.p0_eta == Catch::Approx(expectation(rho, ideal.matrix)).margin(1e-14));
        CHECK(rep.bound == 0.0);
    }

    SECTION("exact recovery with eta equal to the true q") {
        for (std::uint64_t s = 0; s < 40; ++s) {
            Synthetic syn = make_synthetic(derive_seed(4000, s));
            Rng rng(derive_seed(4001, s));
            DensityOperator rho = random_density(rng, 2);
            double p0 = expectation(rho, basis_projector(2, syn.element.outcome));
            double q = expectation(rho, syn.rotated_p);
            double p_e = noisy_probability(rho, syn.element, syn.dec.V);
            MitigationParameters params{syn.dec.trace_pi, syn.dec.epsilon, q, syn.dec.V};
            CHECK(std::abs(post_process(p_e, params) - p0) < 1e-10);
        }
    }

    SECTION("eta = q_c respects the spectral bound on every trial") {
        for (std::uint64_t s = 0; s < 40; ++s) {
            Synthetic syn = make_synthetic(derive_seed(4100, s));
            double bound = error_bound(syn.dec.epsilon, syn.dec.window.delta);
            for (std::uint64_t t = 0; t < 20; ++t) {
                Rng rng(derive_seed(4200 + s, t));
                DensityOperator rho = random_density(rng, 2);
                double p0 = expectation(rho, basis_projector(2, syn.element.outcome));
                MitigationReport rep = mitigate(rho, syn.element, syn.dec);
                CHECK(std::abs(rep.p0_eta - p0) <= bound + 1e-12);
                CHECK(rep.bound == Catch::Approx(bound));
            }
        }
    }

    SECTION("the bound saturates along extreme eigenvectors of V^dag P V") {
        Synthetic syn = make_synthetic(4321, 0.4);
        double bound = error_bound(syn.dec.epsilon, syn.dec.window.delta);
        EigResult e = eig_hermitian(syn.rotated_p);
        double worst = 0.0;
        for (Eigen::Index which : {Eigen::Index{0}, e.values.size() - 1}) {
            DensityOperator rho = DensityOperator::pure(e.vectors.col(which));
            double p0 = expectation(rho, basis_projector(2, syn.element.outcome));
            MitigationReport rep = mitigate(rho, syn.element, syn.dec);
            worst = std::max(worst, std::abs(rep.p0_eta - p0));
        }
        CHECK(worst >= 0.9 * bound);
        CHECK(worst <= bound + 1e-12);
    }

    SECTION("report carries both error-rate conventions") {
        PovmElement syd = fixture_element("sydney_pi00");
        ElementDecomposition dec{syd.outcome, 0.0740, sydney_v(), Matrix::Identity(4, 4) / 4.0,
                                 {0.0104, 0.5308, 0.2597, 0.2706}, 0.0740 * 0.2597, false, 0.9452};
        DensityOperator rho00 = DensityOperator::pure(basis_state(2, OutcomeString::from_string("00")));
        MitigationReport rep = mitigate(rho00, syd, dec);
        CHECK(rep.error_rate_raw == Catch::Approx(0.1213).margin(1e-12));
        CHECK(rep.error_rate_qpp == Catch::Approx(0.1213).margin(0.02));  // V is nearly diagonal
        CHECK(rep.bound == Catch::Approx(error_bound(0.0740, 0.2597)));
    }
}
