// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include "ddes/analysis.hpp"
#include "ddes/certificates.hpp"
#include "ddes/rand.hpp"
#include "ddes/report.hpp"
#include "ddes/run_config.hpp"
#include "ddes/scenarios.hpp"
#include "support/fd_eigen.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace ddes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
    std::string name;
    double time_limit_s; // 0 = none stated
    std::function<std::string()> body; // returns detail text; throws on failure
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string fmt(double v) { return format_num(v); }

// ---- shared scenario builders -------------------------------------------

RunSetup hutchinson_setup() {
    ConfigFile cfg = ConfigFile::parse_file(std::string(DDES_CONFIG_DIR) + "/hutchinson.ini");
    return build_setup(cfg);
}

RunSetup neumann_logistic_setup(double tau) {
    ConfigFile cfg = ConfigFile::parse_file(std::string(DDES_CONFIG_DIR) +
                                            "/neumann_logistic_smalldata.ini");
    cfg.set("terms.1", "tau", format_num(tau));
    return build_setup(cfg);
}

std::string run_cli(const std::string& args, int& exit_code) {
    const std::string cmd = std::string(DDES_CLI_BIN) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    require(pipe != nullptr, "cannot launch the binary");
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return output;
}

std::string kv_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
    }
    throw Failure("report key not found: " + key);
}

// ---- criteria -------------------------------------------------------------

std::string criterion_certificate_arithmetic() {
    // the CLI report carries ln 3 at 12 significant digits
    int code = 0;
    const std::string out =
        run_cli("certify " + std::string(DDES_CONFIG_DIR) + "/hutchinson.ini", code);
    require(code == 0, "certify exited with " + std::to_string(code));
    const std::string tau0_str = kv_value(out, "tau0");
    require(tau0_str == "1.09861228867", "reported tau0 = " + tau0_str);
    const double tau0 = std::strtod(tau0_str.c_str(), nullptr);
    require(std::abs(tau0 - std::log(3.0)) <= 5e-12, "tau0 differs from ln 3 beyond 12 digits");

    // unrounded library value
    const RunSetup setup = hutchinson_setup();
    const CertificateSet set = compute_certificates(setup);
    require(set.global.has_value(), "global certificate missing");
    require(std::abs(set.global->tau0 - std::log(3.0)) < 1e-14, "library tau0 not ln 3");

    // boundary gamma = omega/(2M): tau0 collapses to zero
    DelayTerm gate;
    gate.delay = 0.1;
    gate.rule = AffineGate{0.0, 0.5};
    gate.lipschitz_gamma = 0.5;
    gate.gamma_is_global = true;
    const std::vector<DelayTerm> terms{gate};
    HistoryBuffer hist = history_constant(1, 0.1, 0.01, std::vector<double>{1.0});
    const GlobalCertificate boundary =
        global_certificate(1.0, 1.0, lipschitz_sum(terms), terms, hist);
    require(boundary.tau0 == 0.0, "boundary tau0 is not zero");
    require(!boundary.feasible, "boundary case must be infeasible");

    // gamma = 0: infinity marker
    HistoryBuffer hist0 = history_constant(1, 0.0, 0.01, std::vector<double>{1.0});
    const GlobalCertificate free_cert =
        global_certificate(1.0, 1.0, LipschitzData{}, std::vector<DelayTerm>{}, hist0);
    require(free_cert.tau0_infinite && std::isinf(free_cert.tau0), "gamma = 0 infinity marker");

    return "tau0=" + tau0_str + " boundary_tau0=0 free_tau0=inf";
}

Trajectory g_hutch_traj; // criterion 2 output, reused by criterion 3

std::string criterion_oracle_equivalence() {
    RunSetup setup = hutchinson_setup();
    StepPlan plan = setup.plan;
    plan.store_states = true;
    plan.output_every = 1;
    g_hutch_traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                             setup.t_final, plan);
    require(g_hutch_traj.terminal == Terminal::completed, "integration did not complete");

    OraclePlan oplan;
    oplan.h = 1e-5;
    oplan.record_every = 100; // rows at the exp_rk2 grid
    oplan.store_states = true;
    const Trajectory oracle = oracle_integrate(setup.scenario.system, setup.scenario.terms,
                                               setup.history, setup.t_final, oplan);
    require(oracle.terminal == Terminal::completed, "oracle did not complete");
    require(g_hutch_traj.times.size() == oracle.times.size(), "output grids differ");

    double sup_state_diff = 0.0, sup_norm = 0.0, sup_norm_diff = 0.0;
    for (std::size_t i = 0; i < oracle.times.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < 16; ++k) {
            const double d = g_hutch_traj.states[i][k] - oracle.states[i][k];
            d2 += d * d;
        }
        sup_state_diff = std::max(sup_state_diff, std::sqrt(d2));
        sup_norm = std::max(sup_norm, oracle.h_norms[i]);
        sup_norm_diff =
            std::max(sup_norm_diff, std::abs(g_hutch_traj.h_norms[i] - oracle.h_norms[i]));
    }
    const double rel = sup_state_diff / sup_norm;
    require(rel <= 1e-4, "sup-relative state difference " + fmt(rel));
    return "sup_rel_state_diff=" + fmt(rel) + " sup_rel_norm_diff=" + fmt(sup_norm_diff / sup_norm);
}

std::string criterion_global_envelope() {
    RunSetup setup = hutchinson_setup();
    const CertificateSet set = compute_certificates(setup);
    require(set.global && set.global->feasible, "global certificate infeasible");
    const GlobalCertificate& cert = *set.global;
    require(std::abs(cert.rate - (1.0 - 0.25 * (1.0 + std::exp(0.5)))) < 1e-12,
            "rate formula mismatch");

    if (g_hutch_traj.times.empty()) {
        StepPlan plan = setup.plan;
        plan.output_every = 1;
        g_hutch_traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                                 setup.t_final, plan);
    }
    double max_ratio = 0.0;
    for (std::size_t i = 0; i < g_hutch_traj.times.size(); ++i) {
        const double env =
            1.05 * cert.prefactor * std::exp(-cert.rate * g_hutch_traj.times[i]);
        max_ratio = std::max(max_ratio, g_hutch_traj.h_norms[i] / env);
    }
    require(max_ratio <= 1.0, "envelope exceeded, ratio " + fmt(max_ratio));

    const RateFit fit = fit_decay_rate(g_hutch_traj, NormKind::h, 0.5);
    require(fit.rate >= 0.95 * cert.rate,
            "tail rate " + fmt(fit.rate) + " below 0.95 * " + fmt(cert.rate));
    return "max_ratio=" + fmt(max_ratio) + " fit_rate=" + fmt(fit.rate) +
           " cert_rate=" + fmt(cert.rate);
}

std::string small_data_run(double tau) {
    RunSetup setup = neumann_logistic_setup(tau);
    const CertificateSet set = compute_certificates(setup);
    require(set.small_data && set.small_data->feasible, "small-data certificate infeasible");
    const SmallDataCertificate& cert = *set.small_data;
    require(cert.c1 < cert.lambda1, "C1 >= lambda1");

    StepPlan plan = setup.plan;
    plan.output_every = 1;
    const Trajectory traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                                      setup.t_final, plan);
    require(traj.terminal == Terminal::completed, "run terminated early (blow-up flagged?)");
    require(traj.times.back() >= 50.0 - 1e-9, "did not reach T = 50");

    double max_ratio = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double env =
            1.05 * (cert.k0 / 2.0) * std::exp(-cert.omega_prime * traj.times[i] / 2.0);
        max_ratio = std::max(max_ratio, traj.v_norms[i] / env);
    }
    require(max_ratio <= 1.0, "V envelope exceeded at tau=" + fmt(tau) + ", ratio " +
                                  fmt(max_ratio));
    return "tau=" + fmt(tau) + " max_ratio=" + fmt(max_ratio) + " k0=" + fmt(cert.k0) +
           " omega_prime=" + fmt(cert.omega_prime);
}

std::string criterion_small_data_envelope() { return small_data_run(1.0); }

std::string criterion_large_delay_robustness() {
    std::string detail;
    for (double tau : {1.0, 10.0, 50.0}) {
        detail += small_data_run(tau) + "; ";
    }
    return detail;
}

std::string criterion_threshold_implication() {
    Rng rng(424242);
    int violations = 0, tested = 0;
    while (tested < 1000) {
        const double m = 1.0 + rng.uniform(0.0, 4.0);
        const double omega = rng.uniform(0.1, 5.0);
        const double gamma = rng.uniform(0.0, 0.999) * omega / m;
        const double kb = (omega / m - gamma) * rng.uniform(0.01, 0.999);
        const LinearDelayCertificate cert = linear_delay_tau0(m, omega, gamma, 1.0, kb);
        if (!cert.feasible || !(cert.tau0 > 0.0)) continue;
        const double tau = cert.tau0 * rng.uniform(0.01, 0.999);
        if (!coarse_delay_condition(m, omega, gamma, 1.0, kb, tau)) ++violations;
        ++tested;
    }
    require(violations == 0, std::to_string(violations) + " counterexamples");
    return "samples=1000 violations=0";
}

std::string criterion_epsilon2_construction() {
    Rng rng(777);
    int violations = 0, tested = 0;
    while (tested < 1000) {
        const double mu1 = rng.uniform(0.1, 5.0);
        const double a1 = rng.uniform(-1.0, 1.0) * 0.999 * mu1;
        const double a2 = -rng.uniform(1e-3, 10.0);
        const CoeffStats s1{a1, a1, std::abs(a1)};
        const CoeffStats s2{a2, a2, std::abs(a2)};
        const EpsilonSelection sel = select_epsilon2(s1, s2, mu1);
        const double lower = std::max({a1 + sel.delta, -a1 + sel.delta, (sel.delta - a2) / 2.0,
                                       -a2 - mu1 + sel.delta});
        const double upper = mu1 - sel.delta - a2;
        if (!(lower <= sel.epsilon && sel.epsilon <= upper * (1.0 + 1e-15))) ++violations;
        if (!(sel.epsilon > 0.0)) ++violations;
        ++tested;
    }
    require(violations == 0, std::to_string(violations) + " bracket violations");
    return "samples=1000 violations=0";
}

int report_max_dimension(const AdmissibilityReport& rep) {
    for (const auto& [k, v] : rep.constants)
        if (k == "max_dimension") return static_cast<int>(v);
    throw Failure("max_dimension missing from the report");
}

std::string criterion_dimension_conditions() {
    Domain1D dom;
    dom.modes = 8;

    const Scenario logistic = hutchinson_scenario(dom, -0.25, 0.5);
    const AdmissibilityReport rl = admissibility_diffusion(
        logistic.terms.front(), *logistic.reaction_bounds, 3, logistic.boundary,
        logistic.lambda1, logistic.epsilon);
    require(report_max_dimension(rl) == 3, "logistic max dimension");
    require(rl.find("dim_upper")->satisfied && rl.find("dim_strict")->satisfied,
            "logistic d = 3 must pass");

    const Scenario mh = modified_hutchinson_scenario(dom, -0.25, 0.1, 0.1, 0.1, 0.5);
    const AdmissibilityReport rm2 = admissibility_diffusion(
        mh.terms.front(), *mh.reaction_bounds, 2, mh.boundary, mh.lambda1, mh.epsilon);
    const AdmissibilityReport rm3 = admissibility_diffusion(
        mh.terms.front(), *mh.reaction_bounds, 3, mh.boundary, mh.lambda1, mh.epsilon);
    require(report_max_dimension(rm2) == 2, "modified Hutchinson max dimension");
    require(rm2.find("dim_upper")->satisfied && rm2.find("dim_strict")->satisfied,
            "modified Hutchinson d = 2 must pass");
    require(!rm3.find("dim_upper")->satisfied, "modified Hutchinson d = 3 must fail");

    const Scenario cubic = cubic_scenario(dom, 0.5);
    const AdmissibilityReport rc = admissibility_diffusion(
        cubic.terms.front(), *cubic.reaction_bounds, 2, cubic.boundary, cubic.lambda1,
        cubic.epsilon);
    require(report_max_dimension(rc) == 2, "cubic max dimension");
    require(rc.find("decay_margin")->satisfied, "cubic decay margin");

    return "logistic<=3 modified_hutchinson<=2 cubic<=2";
}

std::string criterion_spectral_fidelity() {
    Domain1D dir;
    dir.modes = 16;
    const SpectralField fd = build_diffusion_operator(dir);
    require(std::abs(fd.op.eigenvalues[0] - 1.0) <= 1e-12, "Dirichlet lambda1");

    Domain1D rob;
    rob.length = 1.0;
    rob.boundary = BoundaryKind::robin;
    rob.robin_alpha = 1.0;
    rob.modes = 8;
    const SpectralField fr = build_diffusion_operator(rob);
    const double fd_ref = ddes_test::fd_robin_lambda1(1.0, 1.0, 1.0, 2000);
    const double rel = std::abs(fr.op.eigenvalues[0] - fd_ref) / fd_ref;
    require(rel <= 1e-4, "Robin lambda1 vs FD oracle: rel " + fmt(rel));

    Rng rng(5150);
    double worst = 0.0;
    for (BoundaryKind b : {BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin}) {
        Domain1D dom;
        dom.boundary = b;
        dom.modes = 256;
        dom.epsilon = b == BoundaryKind::neumann ? 0.4 : 0.0;
        const SpectralField f = build_diffusion_operator(dom);
        std::vector<double> x(256), modal(256), back(256);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        f.to_modal.matvec(x.data(), modal.data());
        f.to_nodal.matvec(modal.data(), back.data());
        for (std::size_t i = 0; i < 256; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
    }
    require(worst <= 1e-10, "round trip error " + fmt(worst));
    return "dirichlet_lambda1_err<=1e-12 robin_rel=" + fmt(rel) + " roundtrip=" + fmt(worst);
}

std::string criterion_stepper_order() {
    // characteristic-root scenario: exact smooth solution, errors vs the oracle
    const double q = 0.5;
    double sigma = -0.3;
    for (int i = 0; i < 60; ++i)
        sigma -= (sigma + 1.0 - q * std::exp(-sigma)) / (1.0 + q * std::exp(-sigma));

    SpectralField f;
    f.op.eigenvalues = {1.0};
    f.to_nodal = linalg::Matrix::identity(1);
    f.to_modal = linalg::Matrix::identity(1);
    const System sys = System::spectral({f});
    DelayTerm term;
    term.delay = 1.0;
    term.rule = AffineGate{0.0, q};
    term.lipschitz_gamma = q;
    term.gamma_is_global = true;
    const std::vector<DelayTerm> terms{term};
    const double t_final = 4.0;

    auto make_history = [&](double dt) {
        return history_from_function(
            1, 1.0, dt, [&](double t, std::span<double> o) { o[0] = std::exp(sigma * t); },
            [&](double t, std::span<double> o) { o[0] = sigma * std::exp(sigma * t); });
    };

    OraclePlan oplan;
    oplan.h = 1e-5;
    oplan.record_every = 50000; // rows every 0.5
    oplan.store_states = true;
    HistoryBuffer ohist = make_history(1e-5);
    const Trajectory oracle = oracle_integrate(sys, terms, ohist, t_final, oplan);

    const std::vector<double> hs{4e-3, 2e-3, 1e-3};
    std::string detail;
    for (Scheme scheme : {Scheme::exp_euler, Scheme::exp_rk2}) {
        std::vector<double> errs;
        for (double h : hs) {
            StepPlan plan;
            plan.h = h;
            plan.scheme = scheme;
            plan.output_every = static_cast<std::size_t>(std::llround(0.5 / h));
            plan.store_states = true;
            HistoryBuffer hist = make_history(h);
            const Trajectory traj = integrate(sys, terms, hist, t_final, plan);
            require(traj.times.size() == oracle.times.size(), "order-study grids differ");
            double worst = 0.0;
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                worst = std::max(worst, std::abs(traj.states[i][0] - oracle.states[i][0]));
            errs.push_back(worst);
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const double x = std::log(hs[i]), y = std::log(errs[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(hs.size());
        const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (scheme == Scheme::exp_euler) {
            require(order >= 0.7 && order <= 1.3, "exp_euler order " + fmt(order));
            detail += "euler_order=" + fmt(order) + " ";
        } else {
            require(order >= 1.7 && order <= 2.3, "exp_rk2 order " + fmt(order));
            detail += "rk2_order=" + fmt(order);
        }
    }
    return detail;
}

std::string criterion_blowup_detection() {
    ConfigFile cfg = ConfigFile::parse_file(std::string(DDES_CONFIG_DIR) + "/blowup.ini");
    RunSetup setup = build_setup(cfg);
    const Trajectory traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                                      setup.t_final, setup.plan);
    require(traj.terminal == Terminal::blew_up, "blow-up not flagged");
    require(traj.blowup_estimate.has_value(), "no blow-up estimate");
    const double rel = std::abs(*traj.blowup_estimate - 0.5) / 0.5;
    require(rel <= 0.05, "blow-up time off by " + fmt(100.0 * rel) + "%");
    return "t_estimate=" + fmt(*traj.blowup_estimate) + " rel_err=" + fmt(rel);
}

std::string criterion_semigroup_envelope() {
    Domain1D dom;
    dom.modes = 16;
    std::vector<linalg::Matrix> blocks;
    const GeneralOperator op = build_damped_wave(dom, 1.0, &blocks);
    const SemigroupEnvelope env = estimate_envelope_blockwise(blocks);

    const EnvelopeFitOptions opts;
    const std::vector<double> grid = envelope_grid(op, opts);
    require(grid.size() == 200, "fit grid size");
    const std::vector<double> norms = sample_norms(op, grid);
    double worst_excess = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double bound = env.big_m * std::exp(-env.omega * grid[i]);
        worst_excess = std::max(worst_excess, norms[i] / bound);
    }
    require(worst_excess <= 1.0 + 1e-9, "envelope does not dominate: " + fmt(worst_excess));

    // f1 = f2 = 0 trajectory: energy norm never increases
    ConfigFile cfg = ConfigFile::parse_file(std::string(DDES_CONFIG_DIR) + "/damped_wave.ini");
    RunSetup setup = build_setup(cfg);
    const Trajectory traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                                      setup.t_final, setup.plan);
    require(traj.terminal == Terminal::completed, "wave run did not complete");
    for (std::size_t i = 1; i < traj.h_norms.size(); ++i)
        require(traj.h_norms[i] <= traj.h_norms[i - 1] * (1.0 + 1e-12),
                "energy increased at t = " + fmt(traj.times[i]));
    return "M=" + fmt(env.big_m) + " omega=" + fmt(env.omega) +
           " max_norm_over_bound=" + fmt(worst_excess);
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"certificate-arithmetic", 1.0, criterion_certificate_arithmetic},
        {"oracle-equivalence", 30.0, criterion_oracle_equivalence},
        {"global-envelope", 30.0, criterion_global_envelope},
        {"small-data-envelope", 60.0, criterion_small_data_envelope},
        {"large-delay-robustness", 0.0, criterion_large_delay_robustness},
        {"threshold-implication", 1.0, criterion_threshold_implication},
        {"epsilon2-construction", 1.0, criterion_epsilon2_construction},
        {"dimension-conditions", 0.0, criterion_dimension_conditions},
        {"spectral-fidelity", 0.0, criterion_spectral_fidelity},
        {"stepper-order", 0.0, criterion_stepper_order},
        {"blowup-detection", 0.0, criterion_blowup_detection},
        {"semigroup-envelope", 0.0, criterion_semigroup_envelope},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && c.time_limit_s > 0.0 && secs > c.time_limit_s) {
            ok = false;
            detail = "exceeded the " + fmt(c.time_limit_s) + " s budget";
        }
        std::printf("[%2zu/12] %s  %-24s (%.2f s)  %s\n", i + 1, ok ? "PASS" : "FAIL",
                    c.name.c_str(), secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0) {
        std::printf("acceptance: all 12 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
