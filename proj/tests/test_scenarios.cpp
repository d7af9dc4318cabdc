#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddes/errors.hpp"
#include "ddes/rand.hpp"
#include "ddes/scenarios.hpp"
#include "support/fd_eigen.hpp"

#include <cmath>
#include <numbers>

using namespace ddes;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.uniform(-1.0, 1.0);
    return v;
}

} // namespace

TEST_CASE("Dirichlet spectrum on (0, pi) starts at exactly one") {
    Domain1D dom;
    dom.modes = 8;
    const SpectralField f = build_diffusion_operator(dom);
    CHECK(std::abs(f.op.eigenvalues[0] - 1.0) < 1e-12);
    CHECK(f.op.eigenvalues[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(f.op.eigenvalues[7] == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("Neumann spectrum is the cosine spectrum shifted by epsilon") {
    Domain1D dom;
    dom.boundary = BoundaryKind::neumann;
    dom.epsilon = 0.3;
    dom.modes = 4;
    const SpectralField f = build_diffusion_operator(dom);
    CHECK(f.op.eigenvalues[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(f.op.eigenvalues[1] == doctest::Approx(1.3).epsilon(1e-13));
    CHECK(f.op.eigenvalues[2] == doctest::Approx(4.3).epsilon(1e-13));
    CHECK(f.op.shift == 0.3);
}

TEST_CASE("Robin principal eigenvalue matches the finite-difference oracle") {
    Domain1D dom;
    dom.length = 1.0;
    dom.boundary = BoundaryKind::robin;
    dom.robin_alpha = 1.0;
    dom.modes = 6;
    const SpectralField f = build_diffusion_operator(dom);
    const double fd = ddes_test::fd_robin_lambda1(1.0, 1.0, 1.0, 2000);
    CHECK(std::abs(f.op.eigenvalues[0] - fd) / fd < 1e-4);
    CHECK(principal_eigenvalue(dom) == doctest::Approx(f.op.eigenvalues[0]));
}

TEST_CASE("Dirichlet eigenvalues converge second order against the FD oracle") {
    const double exact = 1.0; // (pi/pi)^2
    const double e1 = std::abs(ddes_test::fd_dirichlet_lambda1(kPi, 1.0, 250) - exact);
    const double e2 = std::abs(ddes_test::fd_dirichlet_lambda1(kPi, 1.0, 500) - exact);
    const double e3 = std::abs(ddes_test::fd_dirichlet_lambda1(kPi, 1.0, 1000) - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("eigen-transform round trip is the identity") {
    Rng rng(31);
    for (BoundaryKind b : {BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin}) {
        for (std::size_t n : {std::size_t{8}, std::size_t{64}, std::size_t{256}}) {
            Domain1D dom;
            dom.boundary = b;
            dom.modes = n;
            dom.epsilon = b == BoundaryKind::neumann ? 0.5 : 0.0;
            const SpectralField f = build_diffusion_operator(dom);
            const std::vector<double> x = random_vec(rng, n);
            std::vector<double> modal(n), back(n);
            f.to_modal.matvec(x.data(), modal.data());
            f.to_nodal.matvec(modal.data(), back.data());
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("damped wave blocks: spectrum and energy dissipation") {
    Domain1D dom;
    dom.modes = 1;
    std::vector<linalg::Matrix> blocks;
    const GeneralOperator op = build_damped_wave(dom, 2.0, &blocks);
    REQUIRE(blocks.size() == 1);
    // mu = 1, a0 = 2: critically damped, double eigenvalue -1
    const linalg::Matrix& b = blocks[0];
    const double tr = b(0, 0) + b(1, 1);
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    CHECK(tr == doctest::Approx(-2.0));
    CHECK(det == doctest::Approx(1.0));
    CHECK(tr * tr - 4.0 * det == doctest::Approx(0.0));

    const SemigroupEnvelope env = estimate_envelope(op);
    CHECK(env.omega == doctest::Approx(1.0).epsilon(0.1));
    CHECK(env.big_m > 1.0);
}

TEST_CASE("damped wave: heavy damping slows the rate to about mu/a0") {
    Domain1D dom;
    dom.modes = 1;
    std::vector<linalg::Matrix> blocks;
    build_damped_wave(dom, 10.0, &blocks);
    // eigenvalues (-a0 +- sqrt(a0^2 - 4 mu))/2: slow root about -mu/a0
    const double slow = (-10.0 + std::sqrt(100.0 - 4.0)) / 2.0;
    CHECK(slow == doctest::Approx(-0.1010205144).epsilon(1e-6));
    const SemigroupEnvelope env = estimate_envelope_blockwise(blocks);
    CHECK(env.omega == doctest::Approx(-slow).epsilon(0.05));
}

TEST_CASE("hutchinson metadata: declared constants") {
    Domain1D dom;
    const Scenario sc = hutchinson_scenario(dom, -1.0, 1.0);
    REQUIRE(sc.small_bounds.has_value());
    CHECK(sc.small_bounds->c1 == doctest::Approx(1.0)); // sup|a + eps| = |-1 + 0|
    CHECK(sc.terms.front().lipschitz_gamma.value() == doctest::Approx(1.0));
    CHECK_FALSE(sc.terms.front().gamma_is_global);
    REQUIRE(sc.reaction_bounds.has_value());
    CHECK(sc.reaction_bounds->n1() == 1);
    CHECK(sc.reaction_bounds->n2() == 1);

    const std::vector<double> u(dom.modes, 0.0);
    const std::vector<double> out = eval_term(sc.terms.front(), u, u);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("cubic scenario rejects Neumann boundaries") {
    Domain1D dom;
    dom.boundary = BoundaryKind::neumann;
    dom.epsilon = 1.0;
    CHECK_THROWS_AS(cubic_scenario(dom, 1.0), ConfigError);
}

TEST_CASE("energy-pairing bound holds on random sampled logistic states") {
    // Fine-grid quadrature approximates the continuum inner product; the
    // declared (C1, h3) pair must dominate on every draw.
    for (BoundaryKind b : {BoundaryKind::dirichlet, BoundaryKind::neumann}) {
        Domain1D dom;
        dom.modes = 8;
        dom.boundary = b;
        dom.epsilon = b == BoundaryKind::neumann ? 0.75 : 0.0;
        const Scenario sc = logistic_scenario(dom, Coefficient(-0.5), Coefficient(0.25),
                                              Coefficient(0.25), 1.0);
        const SpectralField& f = sc.system.fields()[0];

        const std::size_t fine = 4096;
        std::vector<std::vector<double>> phi(8, std::vector<double>(fine));
        const double hq = dom.length / static_cast<double>(fine);
        for (std::size_t k = 0; k < 8; ++k) {
            for (std::size_t j = 0; j < fine; ++j) {
                const double x = (static_cast<double>(j) + 0.5) * hq;
                if (b == BoundaryKind::dirichlet) {
                    phi[k][j] = std::sqrt(2.0 / dom.length) *
                                std::sin(static_cast<double>(k + 1) * kPi * x / dom.length);
                } else {
                    phi[k][j] = (k == 0 ? std::sqrt(1.0 / dom.length)
                                        : std::sqrt(2.0 / dom.length) *
                                              std::cos(static_cast<double>(k) * kPi * x /
                                                       dom.length));
                }
            }
        }
        auto synth = [&](const std::vector<double>& c, std::vector<double>& out) {
            std::fill(out.begin(), out.end(), 0.0);
            for (std::size_t k = 0; k < 8; ++k)
                for (std::size_t j = 0; j < fine; ++j) out[j] += c[k] * phi[k][j];
        };

        Rng rng(b == BoundaryKind::dirichlet ? 17 : 18);
        std::vector<double> uf(fine), vf(fine), wf(fine), ff(fine);
        int checked = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> cu = random_vec(rng, 8, 0.3);
            std::vector<double> cv = random_vec(rng, 8, 0.3);
            std::vector<double> cw = random_vec(rng, 8, 1.0);
            synth(cu, uf);
            synth(cv, vf);
            synth(cw, wf);
            // F(u, v) pointwise on the fine grid
            const auto& rule = std::get<LogisticDelay>(sc.terms.front().rule);
            for (std::size_t j = 0; j < fine; ++j)
                ff[j] = (rule.a.at(0) + rule.shift) * uf[j] - rule.b.at(0) * uf[j] * uf[j] +
                        rule.c.at(0) * uf[j] * vf[j];
            double inner = 0.0, wnorm2 = 0.0;
            for (std::size_t j = 0; j < fine; ++j) {
                inner += wf[j] * ff[j];
                wnorm2 += wf[j] * wf[j];
            }
            inner *= hq;
            wnorm2 *= hq;

            const Norms nu = norms(f.op, ModalState{cu});
            const Norms nv = norms(f.op, ModalState{cv});
            const double h3 = sc.small_bounds->h3.eval(std::vector<double>{nu.v, nv.v});
            const double bound =
                std::sqrt(wnorm2) * (sc.small_bounds->c1 * nu.h + h3 * nu.v);
            CHECK(std::abs(inner) <= bound * (1.0 + 1e-10) + 1e-14);
            ++checked;
        }
        CHECK(checked == 1000);
    }
}

TEST_CASE("competition: decoupled case matches two independent scalar runs") {
    CompetitionSpec spec;
    spec.field1.boundary = BoundaryKind::neumann;
    spec.field2.boundary = BoundaryKind::neumann;
    spec.field1.modes = spec.field2.modes = 8;
    spec.a1 = Coefficient(-1.0);
    spec.a2 = Coefficient(-1.0);
    spec.a11 = spec.a22 = Coefficient(0.0);
    spec.ap11 = spec.ap12 = spec.ap21 = spec.ap22 = Coefficient(0.0);
    spec.tau11 = spec.tau12 = spec.tau21 = spec.tau22 = 1.0;
    const Scenario sc = competition_scenario(spec);
    REQUIRE(sc.competition.has_value());
    CHECK(sc.competition->case_index == 4);

    HistoryBuffer hist = sc.make_history(0.2, 0.01);
    StepPlan plan;
    plan.h = 0.01;
    plan.output_every = 10;
    const Trajectory traj = integrate(sc.system, sc.terms, hist, 3.0, plan);
    REQUIRE(traj.terminal == Terminal::completed);
    REQUIRE(traj.field_h_norms.size() == 2);

    // independent scalar run of one Neumann field with the same shift
    Domain1D dom1 = spec.field1;
    dom1.epsilon = sc.competition->epsilon1;
    const Scenario single = logistic_scenario(dom1, Coefficient(-1.0), Coefficient(0.0),
                                              Coefficient(0.0), 1.0);
    HistoryBuffer hist1 = single.make_history(0.2, 0.01);
    const Trajectory traj1 = integrate(single.system, single.terms, hist1, 3.0, plan);

    REQUIRE(traj.times.size() == traj1.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(traj.field_h_norms[0][i] == doctest::Approx(traj1.h_norms[i]).epsilon(1e-12));
        CHECK(traj.field_h_norms[1][i] == doctest::Approx(traj1.h_norms[i]).epsilon(1e-12));
    }
}

TEST_CASE("competition term split sums to the direct right-hand side") {
    CompetitionSpec spec;
    spec.field1.boundary = BoundaryKind::dirichlet;
    spec.field2.boundary = BoundaryKind::neumann;
    spec.field1.modes = spec.field2.modes = 4;
    spec.a1 = Coefficient(0.3);
    spec.a2 = Coefficient(-1.0);
    spec.a11 = Coefficient(-0.2);
    spec.a22 = Coefficient(-0.1);
    spec.ap11 = Coefficient(0.05);
    spec.ap12 = Coefficient(-0.07);
    spec.ap21 = Coefficient(0.02);
    spec.ap22 = Coefficient(0.04);
    spec.tau11 = 1.0;
    spec.tau12 = 0.5;
    spec.tau21 = 0.75;
    spec.tau22 = 1.25;
    const Scenario sc = competition_scenario(spec);
    REQUIRE(sc.competition.has_value());
    CHECK(sc.competition->case_index == 2);
    const double eps1 = sc.competition->epsilon1;
    const double eps2 = sc.competition->epsilon2;
    CHECK(eps1 == 0.0);
    CHECK(eps2 > 0.0);

    Rng rng(55);
    const std::vector<double> u1 = random_vec(rng, 4), u2 = random_vec(rng, 4);
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> delayed;
    for (double tau : {spec.tau11, spec.tau12, spec.tau21, spec.tau22})
        delayed.emplace(tau, std::make_pair(random_vec(rng, 4), random_vec(rng, 4)));

    std::vector<double> acc1(4, 0.0), acc2(4, 0.0);
    for (const DelayTerm& term : sc.terms) {
        const auto& [v1, v2] = delayed.at(term.delay);
        const std::span<const double> us[] = {u1, u2};
        const std::span<const double> vs[] = {v1, v2};
        const std::span<double> os[] = {std::span<double>(acc1), std::span<double>(acc2)};
        eval_term(term, us, vs, os);
    }

    for (std::size_t i = 0; i < 4; ++i) {
        const double direct1 =
            u1[i] * (0.3 + eps1 + (-0.2) * u1[i] + 0.05 * delayed.at(spec.tau11).first[i] +
                     (-0.07) * delayed.at(spec.tau12).second[i]);
        const double direct2 =
            u2[i] * (-1.0 + eps2 + (-0.1) * u2[i] + 0.02 * delayed.at(spec.tau21).first[i] +
                     0.04 * delayed.at(spec.tau22).second[i]);
        CHECK(acc1[i] == doctest::Approx(direct1).epsilon(1e-12));
        CHECK(acc2[i] == doctest::Approx(direct2).epsilon(1e-12));
    }
}

TEST_CASE("competition case inference and inconsistent pairing") {
    CompetitionSpec spec;
    spec.field1.boundary = BoundaryKind::dirichlet;
    spec.field2.boundary = BoundaryKind::dirichlet;
    spec.a1 = Coefficient(0.1);
    spec.a2 = Coefficient(0.1);
    CHECK(competition_scenario(spec).competition->case_index == 1);
    spec.case_index = 4;
    CHECK_THROWS_AS(competition_scenario(spec), ConfigError);
}

TEST_CASE("auto epsilon rule") {
    CHECK(auto_epsilon(-0.5) == doctest::Approx(0.75));
    CHECK_THROWS_AS(auto_epsilon(0.1), ConfigError);
}
