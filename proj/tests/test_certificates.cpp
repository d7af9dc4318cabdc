#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddes/certificates.hpp"
#include "ddes/errors.hpp"
#include "ddes/rand.hpp"

#include <cmath>

using namespace ddes;

namespace {

DelayTerm gate(double gamma, double tau) {
    DelayTerm t;
    t.delay = tau;
    t.rule = AffineGate{0.0, gamma};
    t.lipschitz_gamma = gamma;
    t.gamma_is_global = true;
    return t;
}

GlobalCertificate cert_for(double big_m, double omega, double gamma, double tau,
                           double hist_value = 1.0) {
    const std::vector<DelayTerm> terms{gate(gamma, tau)};
    const LipschitzData lips = lipschitz_sum(terms);
    HistoryBuffer hist = history_constant(1, tau, tau / 64.0, std::vector<double>{hist_value});
    return global_certificate(big_m, omega, lips, terms, hist);
}

} // namespace

TEST_CASE("tau0 = ln 3 for (M, omega, gamma) = (1, 1, 1/4)") {
    const GlobalCertificate cert = cert_for(1.0, 1.0, 0.25, 0.5);
    CHECK(cert.tau0 == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(std::abs(cert.tau0 - 1.0986122886681098) < 1e-14);
    CHECK(cert.feasible);
    CHECK(cert.rate == doctest::Approx(1.0 - 0.25 * (1.0 + std::exp(0.5))).epsilon(1e-14));
}

TEST_CASE("boundary gamma = omega/(2M) gives tau0 = 0, infeasible") {
    const GlobalCertificate cert = cert_for(1.0, 1.0, 0.5, 0.1);
    CHECK(cert.tau0 == doctest::Approx(0.0));
    CHECK_FALSE(cert.feasible);
}

TEST_CASE("gamma above the bound is an undefined-marker") {
    const GlobalCertificate cert = cert_for(1.0, 1.0, 0.75, 0.1);
    CHECK_FALSE(cert.feasible);
    CHECK(std::isnan(cert.tau0));
}

TEST_CASE("gamma = 0 decays at the semigroup rate with no threshold") {
    HistoryBuffer hist = history_constant(1, 0.0, 0.1, std::vector<double>{2.0});
    const GlobalCertificate cert =
        global_certificate(1.5, 0.8, LipschitzData{}, std::vector<DelayTerm>{}, hist);
    CHECK(cert.feasible);
    CHECK(cert.tau0_infinite);
    CHECK(std::isinf(cert.tau0));
    CHECK(cert.rate == doctest::Approx(0.8));
    CHECK(cert.alpha == 0.0);
    CHECK(cert.prefactor == doctest::Approx(1.5 * 2.0));
}

TEST_CASE("alpha quadrature matches the closed form for constant history") {
    // alpha = gamma * c * (e^{omega tau} - 1)/omega for history == c
    const double gamma = 0.25, omega = 1.3, tau = 0.7, c = 0.4;
    const GlobalCertificate cert = cert_for(1.0, omega, gamma, tau, c);
    const double expect = gamma * c * std::expm1(omega * tau) / omega;
    CHECK(cert.alpha == doctest::Approx(expect).epsilon(1e-10));
    CHECK(cert.alpha_error < 1e-10);
    CHECK(cert.u0_norm == doctest::Approx(c));
    CHECK(cert.prefactor == doctest::Approx(c + cert.alpha));
}

TEST_CASE("tau0 monotone: decreasing in gamma and M, increasing in omega") {
    double prev = std::numeric_limits<double>::infinity();
    for (double g : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        const double t0 = cert_for(1.0, 1.0, g, 0.01).tau0;
        CHECK(t0 < prev);
        prev = t0;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double m : {1.0, 1.2, 1.5, 1.9}) {
        const double t0 = cert_for(m, 1.0, 0.2, 0.01).tau0;
        CHECK(t0 < prev);
        prev = t0;
    }
    // Increasing in omega while omega/(M gamma) <= 1 + e, where
    // ln(omega/(M gamma) - 1) <= 1 < omega/(omega - M gamma); past that range
    // the threshold turns over and decays like ln(omega)/omega.
    prev = 0.0;
    for (double w : {0.45, 0.55, 0.65, 0.74}) {
        const double t0 = cert_for(1.0, w, 0.2, 0.01).tau0;
        CHECK(t0 > prev);
        prev = t0;
    }
    CHECK(cert_for(1.0, 1.1, 0.2, 0.01).tau0 < cert_for(1.0, 0.8, 0.2, 0.01).tau0);
}

TEST_CASE("rate vanishes exactly at tau = tau0") {
    for (double g : {0.05, 0.17, 0.33}) {
        const GlobalCertificate pre = cert_for(1.0, 1.0, g, 0.01);
        const GlobalCertificate at = cert_for(1.0, 1.0, g, pre.tau0);
        CHECK(std::abs(at.rate) < 1e-10);
    }
}

TEST_CASE("linear delay threshold examples") {
    CHECK(linear_delay_tau0(1.0, 1.0, 0.0, 1.0, std::exp(-1.0)).tau0 ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(linear_delay_tau0(1.0, 1.0, 0.25, 1.0, 0.75).tau0 == doctest::Approx(0.0));
    CHECK(linear_delay_tau0(1.0, 2.0, 0.5, 1.0, 0.5).tau0 ==
          doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-13));
    const LinearDelayCertificate infeasible = linear_delay_tau0(2.0, 1.0, 0.6, 1.0, 0.1);
    CHECK_FALSE(infeasible.feasible);
}

TEST_CASE("coarse delay condition examples") {
    // tiny tau: expm1 keeps the threshold omega/M without cancellation
    CHECK(coarse_delay_condition(1.0, 1.0, 0.25, 1.0, 0.25, 1e-8));
    // direct arithmetic at tau = 0.5
    const double lhs = 0.25 * std::exp(0.5) + 0.25;
    const double rhs = std::expm1(0.5) / 0.5;
    CHECK(lhs < rhs);
    CHECK(coarse_delay_condition(1.0, 1.0, 0.25, 1.0, 0.25, 0.5));
    CHECK_THROWS_AS(coarse_delay_condition(1.0, 1.0, 0.25, 1.0, 0.25, 0.0), ContractError);
}

TEST_CASE("coarse delay condition is implied by the stricter threshold (random sampling)") {
    Rng rng(2024);
    int tested = 0;
    for (int i = 0; i < 1000; ++i) {
        const double m = 1.0 + rng.uniform(0.0, 4.0);
        const double omega = rng.uniform(0.1, 5.0);
        const double gamma = rng.uniform(0.0, 0.999) * omega / m;
        const double kb = (omega / m - gamma) * rng.uniform(0.01, 0.999);
        const LinearDelayCertificate cert = linear_delay_tau0(m, omega, gamma, 1.0, kb);
        REQUIRE(cert.feasible);
        if (cert.tau0 <= 0.0) continue;
        const double tau = cert.tau0 * rng.uniform(0.01, 0.999);
        CHECK(coarse_delay_condition(m, omega, gamma, 1.0, kb, tau));
        ++tested;
    }
    CHECK(tested > 900);
}

TEST_CASE("small data: trivial bounds give the hand-evaluated chain") {
    const SmallDataBounds bounds{0.0, MultiPoly::zero(2)};
    const SmallDataCertificate cert = small_data_certificate(1.0, bounds);
    REQUIRE(cert.feasible);
    CHECK(cert.k0_unbounded);
    CHECK(cert.k0 == doctest::Approx(1e6));
    CHECK(cert.omega == doctest::Approx(1.0));
    CHECK(cert.omega_prime == doctest::Approx(1.0));
    CHECK(cert.c_omega_lambda == doctest::Approx(1.0));
    CHECK(cert.gamma0 == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("small data: C1 at lambda1 is infeasible") {
    const SmallDataBounds bounds{4.0, MultiPoly::zero(2)};
    const SmallDataCertificate cert = small_data_certificate(4.0, bounds);
    CHECK_FALSE(cert.feasible);
}

TEST_CASE("small data: K0 bisection against a hand solution and a finer re-run") {
    // lambda1 = 4, C1 = 1, h3 = y + z: C4(K) = 2K and the constraint reads
    // 2K/2 <= (1 - 1/4)/2, so K0 = 3/8.
    const SmallDataBounds bounds{1.0, MultiPoly(2, {{1.0, {1, 0}}, {1.0, {0, 1}}})};
    const SmallDataCertificate cert = small_data_certificate(4.0, bounds);
    REQUIRE(cert.feasible);
    CHECK(cert.k0 == doctest::Approx(3.0 / 8.0).epsilon(1e-5));

    // independent re-run at 10x finer tolerance
    double lo = 0.0, hi = 1.0;
    auto ok = [&](double k) { return corner_bound(bounds, k) / 2.0 <= 0.5 * (1.0 - 0.25); };
    while (hi - lo > 1e-8 * hi) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    CHECK(cert.k0 == doctest::Approx(lo).epsilon(1e-5));
}

TEST_CASE("small data chain never improves when C1 grows") {
    const MultiPoly h3(2, {{0.7, {1, 0}}, {0.4, {0, 1}}});
    double prev_k0 = std::numeric_limits<double>::infinity();
    double prev_radius = std::numeric_limits<double>::infinity();
    double prev_omega_prime = std::numeric_limits<double>::infinity();
    for (double c1 : {0.0, 0.3, 0.8, 1.3, 1.9}) {
        const SmallDataCertificate cert = small_data_certificate(2.0, SmallDataBounds{c1, h3});
        REQUIRE(cert.feasible);
        CHECK(cert.k0 <= prev_k0 + 1e-12);
        CHECK(cert.gamma0 * cert.k0 <= prev_radius + 1e-12);
        CHECK(cert.omega_prime <= prev_omega_prime + 1e-12);
        prev_k0 = cert.k0;
        prev_radius = cert.gamma0 * cert.k0;
        prev_omega_prime = cert.omega_prime;
    }
}

TEST_CASE("small data: omega_prime satisfies both constraints") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double lambda1 = rng.uniform(0.05, 5.0);
        const double c1 = rng.uniform(0.0, 0.95) * lambda1;
        const MultiPoly h3(2, {{rng.uniform(0.0, 2.0), {1, 0}}, {rng.uniform(0.0, 2.0), {0, 1}}});
        const SmallDataCertificate cert = small_data_certificate(lambda1, SmallDataBounds{c1, h3});
        REQUIRE(cert.feasible);
        CHECK(cert.omega > 0.0);
        CHECK(cert.omega_prime > 0.0);
        CHECK(cert.omega_prime <= cert.omega * (1.0 + 1e-12));
        CHECK(cert.omega_prime < 2.0 * lambda1 * cert.omega);
        CHECK(cert.gamma0 < 1.0);
    }
}

TEST_CASE("diffusion admissibility: dimension conditions per reaction family") {
    DelayTerm logistic;
    logistic.delay = 1.0;
    logistic.rule = LogisticDelay{Coefficient(-1.0), Coefficient(0.0), Coefficient(1.0), 0.0};
    const ReactionBounds logistic_bounds{1.0, {1.0}, {1.0}};

    AdmissibilityReport rep =
        admissibility_diffusion(logistic, logistic_bounds, 3, BoundaryKind::dirichlet, 2.0, 0.0);
    CHECK(rep.find("dim_upper")->satisfied);
    CHECK(rep.find("dim_strict")->satisfied);
    CHECK(rep.find("reaction_vanishes_at_zero")->satisfied);
    double max_dim = 0.0;
    for (const auto& [k, v] : rep.constants)
        if (k == "max_dimension") max_dim = v;
    CHECK(max_dim == 3.0);

    DelayTerm mh;
    mh.delay = 1.0;
    mh.rule = ModifiedHutchinson{-1.0, 0.5, 0.25, 0.125, 0.0};
    const ReactionBounds mh_bounds{1.0, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    rep = admissibility_diffusion(mh, mh_bounds, 2, BoundaryKind::dirichlet, 2.0, 0.0);
    CHECK(rep.find("dim_upper")->satisfied);
    CHECK(rep.find("dim_strict")->satisfied);
    rep = admissibility_diffusion(mh, mh_bounds, 3, BoundaryKind::dirichlet, 2.0, 0.0);
    CHECK_FALSE(rep.find("dim_upper")->satisfied);
    for (const auto& [k, v] : rep.constants)
        if (k == "max_dimension") CHECK(v == 2.0);

    DelayTerm cubic;
    cubic.delay = 1.0;
    cubic.rule = CubicDelay{};
    const ReactionBounds cubic_bounds{0.0, {0.0, 1.0}, {0.0, 1.0}};
    rep = admissibility_diffusion(cubic, cubic_bounds, 2, BoundaryKind::dirichlet, 1.7, 0.0);
    CHECK(rep.find("decay_margin")->satisfied);
    CHECK(rep.find("decay_margin")->margin == doctest::Approx(1.7));
    for (const auto& [k, v] : rep.constants)
        if (k == "max_dimension") CHECK(v == 2.0);
}

TEST_CASE("competition admissibility cases") {
    // case 4 (both Neumann): strict negativity
    AdmissibilityReport rep = admissibility_competition(4, CoeffStats{-0.1, -0.1, 0.1},
                                                        CoeffStats{-0.2, -0.2, 0.2}, 0.0, 0.0, 1);
    CHECK(rep.all_satisfied());

    // case 2 worked example: a1 = 0.3, a2 = -1, mu1 = 1
    rep = admissibility_competition(2, CoeffStats{0.3, 0.3, 0.3}, CoeffStats{-1.0, -1.0, 1.0}, 1.0,
                                    0.0, 1);
    CHECK(rep.all_satisfied());
    CHECK(rep.find("field2_spread")->margin == doctest::Approx(2.0 - (-1.0)));

    // case 1 at the boundary fails with zero margin
    rep = admissibility_competition(1, CoeffStats{1.0, -1.0, 1.0}, CoeffStats{0.0, 0.0, 0.0}, 1.0,
                                    2.0, 1);
    CHECK_FALSE(rep.find("field1_amplitude")->satisfied);
    CHECK(rep.find("field1_amplitude")->margin == doctest::Approx(0.0));
}

TEST_CASE("epsilon2 worked example") {
    const EpsilonSelection sel =
        select_epsilon2(CoeffStats{0.0, 0.0, 0.0}, CoeffStats{-1.0, -1.0, 1.0}, 1.0);
    CHECK(sel.delta == doctest::Approx(0.5));
    CHECK(sel.epsilon == doctest::Approx(1.5));
}

TEST_CASE("epsilon2 stays positive as sup a2 approaches zero") {
    for (double s : {-0.5, -0.1, -0.01, -1e-4}) {
        const EpsilonSelection sel =
            select_epsilon2(CoeffStats{0.0, 0.0, 0.0}, CoeffStats{s, s, -s}, 1.0);
        CHECK(sel.epsilon > 0.0);
        CHECK(sel.delta > 0.0);
    }
    CHECK_THROWS_WITH_AS(
        select_epsilon2(CoeffStats{0.0, 0.0, 0.0}, CoeffStats{0.0, 0.0, 0.0}, 1.0),
        "case-2 conditions violated", ContractError);
}

TEST_CASE("epsilon2 bracket holds on 1000 random admissible triples") {
    Rng rng(313);
    for (int i = 0; i < 1000; ++i) {
        const double mu1 = rng.uniform(0.1, 5.0);
        const double a1 = rng.uniform(-1.0, 1.0) * 0.999 * mu1;
        const double a2 = -rng.uniform(1e-3, 10.0);
        const CoeffStats s1{a1, a1, std::abs(a1)};
        const CoeffStats s2{a2, a2, std::abs(a2)};
        const EpsilonSelection sel = select_epsilon2(s1, s2, mu1);
        // both bracket inequalities, literally
        const double lower = std::max({a1 + sel.delta, -a1 + sel.delta,
                                       (sel.delta - a2) / 2.0, -a2 - mu1 + sel.delta});
        const double upper = mu1 - sel.delta - a2;
        CHECK(lower <= sel.epsilon);
        CHECK(sel.epsilon <= upper * (1.0 + 1e-15));
    }
}

TEST_CASE("epsilon2 with spatially varying a2 respects the pointwise bracket") {
    Rng rng(99);
    int accepted = 0;
    for (int i = 0; i < 500; ++i) {
        const double mu1 = rng.uniform(0.5, 3.0);
        const double a1 = rng.uniform(-0.9, 0.9) * mu1;
        const double a2_sup = -rng.uniform(1e-3, 2.0);
        const double a2_inf = a2_sup - rng.uniform(0.0, 3.0);
        const CoeffStats s1{a1, a1, std::abs(a1)};
        const CoeffStats s2{a2_sup, a2_inf, std::max(std::abs(a2_sup), std::abs(a2_inf))};
        if (!(2.0 * a2_sup - a2_inf < 2.0 * mu1)) continue;
        EpsilonSelection sel;
        try {
            sel = select_epsilon2(s1, s2, mu1);
        } catch (const ContractError&) {
            // spread too wide for a constant shift; rejection is the contract
            continue;
        }
        ++accepted;
        const double lower = std::max({s1.sup + sel.delta, -s1.inf + sel.delta,
                                       (sel.delta - s2.inf) / 2.0, -s2.inf - mu1 + sel.delta});
        const double upper = mu1 - sel.delta - s2.sup;
        CHECK(lower <= sel.epsilon * (1.0 + 1e-12));
        CHECK(sel.epsilon <= upper * (1.0 + 1e-15));
    }
    CHECK(accepted > 100);
}
