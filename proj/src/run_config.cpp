#include "ddes/run_config.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ddes {

namespace {

void check_keys(const ConfigFile& cfg, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const std::string& k : cfg.keys(section)) {
        if (!allowed.count(k))
            throw ConfigError("unknown key '" + k + "' in [" + section + "]");
    }
}

BoundaryKind parse_boundary(const std::string& s, const std::string& where) {
    if (s == "dirichlet") return BoundaryKind::dirichlet;
    if (s == "neumann") return BoundaryKind::neumann;
    if (s == "robin") return BoundaryKind::robin;
    throw ConfigError("invalid boundary '" + s + "' in [" + where + "]");
}

linalg::Matrix parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
        std::vector<double> vals;
        std::stringstream cs(row);
        std::string cell;
        while (cs >> cell) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw ConfigError("matrix entry is not a number: " + cell);
            vals.push_back(v);
        }
        if (!vals.empty()) rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ConfigError("matrix must have at least one row");
    const std::size_t n = rows.size();
    for (const auto& r : rows)
        if (r.size() != n) throw ConfigError("matrix must be square (rows separated by ';')");
    linalg::Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = rows[r][c];
    return m;
}

std::vector<std::string> term_sections(const ConfigFile& cfg) {
    std::vector<std::string> out;
    for (int n = 1;; ++n) {
        const std::string sec = "terms." + std::to_string(n);
        if (!cfg.has_section(sec)) break;
        out.push_back(sec);
    }
    for (const std::string& sec : cfg.section_names()) {
        if (sec.rfind("terms.", 0) == 0 &&
            std::find(out.begin(), out.end(), sec) == out.end())
            throw ConfigError("term sections must be numbered consecutively from [terms.1]; got [" +
                              sec + "]");
    }
    return out;
}

// Declared-gamma terms for the general-operator path.
DelayTerm parse_simple_term(const ConfigFile& cfg, const std::string& sec) {
    const std::string kind = cfg.require_string(sec, "kind");
    DelayTerm term;
    term.delay = cfg.require_double(sec, "tau");
    if (kind == "affine_gate") {
        check_keys(cfg, sec, {"kind", "tau", "p", "q"});
        const AffineGate r{cfg.get_double(sec, "p", 0.0), cfg.get_double(sec, "q", 0.0)};
        term.rule = r;
        term.lipschitz_gamma = std::max(std::abs(r.p), std::abs(r.q));
        term.gamma_is_global = true;
    } else if (kind == "lipschitz_sine") {
        check_keys(cfg, sec, {"kind", "tau", "cx", "cy"});
        const LipschitzSine r{cfg.get_double(sec, "cx", 0.0), cfg.get_double(sec, "cy", 0.0)};
        term.rule = r;
        term.lipschitz_gamma = std::max(std::abs(r.cx), std::abs(r.cy));
        term.gamma_is_global = true;
    } else if (kind == "logistic") {
        check_keys(cfg, sec, {"kind", "tau", "a", "b", "c"});
        const Coefficient a(cfg.get_double(sec, "a", 0.0));
        const Coefficient b(cfg.get_double(sec, "b", 0.0));
        const Coefficient c(cfg.get_double(sec, "c", 0.0));
        term.rule = LogisticDelay{a, b, c, 0.0};
        term.lipschitz_gamma = a.sup_abs();
        term.gamma_is_global = (b.sup_abs() == 0.0 && c.sup_abs() == 0.0);
    } else if (kind == "hutchinson") {
        check_keys(cfg, sec, {"kind", "tau", "alpha"});
        const double alpha = cfg.require_double(sec, "alpha");
        term.rule = LogisticDelay{Coefficient(alpha), Coefficient(0.0), Coefficient(-alpha), 0.0};
        term.lipschitz_gamma = std::abs(alpha);
        term.gamma_is_global = (alpha == 0.0);
    } else if (kind == "modified_hutchinson") {
        check_keys(cfg, sec, {"kind", "tau", "alpha", "beta", "gamma", "delta"});
        const ModifiedHutchinson r{cfg.require_double(sec, "alpha"),
                                   cfg.get_double(sec, "beta", 0.0),
                                   cfg.get_double(sec, "gamma", 0.0),
                                   cfg.get_double(sec, "delta", 0.0), 0.0};
        term.rule = r;
        term.lipschitz_gamma = std::abs(r.alpha);
        term.gamma_is_global = (r.beta == 0.0 && r.gamma == 0.0 && r.delta == 0.0);
    } else if (kind == "cubic") {
        check_keys(cfg, sec, {"kind", "tau"});
        term.rule = CubicDelay{};
    } else {
        throw ConfigError("unknown term kind '" + kind + "' in [" + sec + "]");
    }
    return term;
}

Scenario build_scenario(const ConfigFile& cfg, const CliOverrides& overrides) {
    const std::string kind = cfg.require_string("operator", "kind");

    if (kind == "diffusion") {
        check_keys(cfg, "operator",
                   {"kind", "boundary", "length", "diffusion", "epsilon", "robin_alpha", "modes"});
        Domain1D dom;
        dom.length = cfg.get_double("operator", "length", dom.length);
        dom.diffusion = cfg.get_double("operator", "diffusion", 1.0);
        dom.boundary = parse_boundary(cfg.get_string("operator", "boundary", "dirichlet"),
                                      "operator");
        dom.robin_alpha = cfg.get_double("operator", "robin_alpha", 1.0);
        dom.modes = static_cast<std::size_t>(cfg.get_int("operator", "modes", 16));
        if (overrides.modes) dom.modes = static_cast<std::size_t>(*overrides.modes);

        const std::vector<std::string> terms = term_sections(cfg);
        if (terms.empty()) {
            // pure heat flow: no reaction, the semigroup alone
            Domain1D plain = dom;
            if (plain.boundary == BoundaryKind::neumann)
                plain.epsilon = cfg.get_double("operator", "epsilon", 0.0);
            Scenario sc;
            sc.name = "diffusion_linear";
            SpectralField field = build_diffusion_operator(plain);
            sc.lambda1 = field.op.lambda1();
            sc.big_m = 1.0;
            sc.omega = sc.lambda1;
            sc.epsilon = plain.boundary == BoundaryKind::neumann ? plain.epsilon : 0.0;
            sc.boundary = plain.boundary;
            sc.system = System::spectral({std::move(field)});
            return sc;
        }
        if (terms.size() != 1)
            throw ConfigError("diffusion scenarios take at most one [terms.1] section");
        const std::string sec = terms.front();
        const std::string tkind = cfg.require_string(sec, "kind");
        const double tau = cfg.require_double(sec, "tau");

        // Neumann shift, possibly certificate-driven.
        if (dom.boundary == BoundaryKind::neumann) {
            const std::string eps = cfg.get_string("operator", "epsilon", "auto");
            if (eps == "auto") {
                double relevant;
                if (tkind == "logistic") {
                    relevant = cfg.require_double(sec, "a");
                } else if (tkind == "hutchinson" || tkind == "modified_hutchinson") {
                    relevant = cfg.require_double(sec, "alpha");
                } else {
                    throw ConfigError("epsilon = auto supported for the population presets only");
                }
                dom.epsilon = auto_epsilon(relevant);
            } else {
                dom.epsilon = cfg.require_double("operator", "epsilon");
            }
        }

        if (tkind == "hutchinson") {
            check_keys(cfg, sec, {"kind", "tau", "alpha"});
            return hutchinson_scenario(dom, cfg.require_double(sec, "alpha"), tau);
        }
        if (tkind == "logistic") {
            check_keys(cfg, sec, {"kind", "tau", "a", "b", "c"});
            return logistic_scenario(dom, Coefficient(cfg.require_double(sec, "a")),
                                     Coefficient(cfg.get_double(sec, "b", 0.0)),
                                     Coefficient(cfg.get_double(sec, "c", 0.0)), tau);
        }
        if (tkind == "modified_hutchinson") {
            check_keys(cfg, sec, {"kind", "tau", "alpha", "beta", "gamma", "delta"});
            return modified_hutchinson_scenario(
                dom, cfg.require_double(sec, "alpha"), cfg.get_double(sec, "beta", 0.0),
                cfg.get_double(sec, "gamma", 0.0), cfg.get_double(sec, "delta", 0.0), tau);
        }
        if (tkind == "cubic") {
            check_keys(cfg, sec, {"kind", "tau"});
            return cubic_scenario(dom, tau);
        }
        throw ConfigError("unknown term kind '" + tkind + "' for a diffusion operator");
    }

    if (kind == "damped_wave") {
        check_keys(cfg, "operator", {"kind", "length", "diffusion", "modes", "damping"});
        Domain1D dom;
        dom.length = cfg.get_double("operator", "length", dom.length);
        dom.diffusion = cfg.get_double("operator", "diffusion", 1.0);
        dom.boundary = BoundaryKind::dirichlet;
        dom.modes = static_cast<std::size_t>(cfg.get_int("operator", "modes", 16));
        if (overrides.modes) dom.modes = static_cast<std::size_t>(*overrides.modes);
        Scenario sc = damped_wave_scenario(dom, cfg.require_double("operator", "damping"));
        for (const std::string& sec : term_sections(cfg)) {
            DelayTerm t = parse_simple_term(cfg, sec);
            if (t.kind() != TermKind::affine_gate && t.kind() != TermKind::globally_lipschitz_scalar)
                throw ConfigError("damped wave scenarios take globally Lipschitz terms only");
            sc.terms.push_back(std::move(t));
        }
        if (!sc.terms.empty()) {
            sc.tau_max = 0.0;
            sc.tau_min = std::numeric_limits<double>::infinity();
            for (const DelayTerm& t : sc.terms) {
                sc.tau_max = std::max(sc.tau_max, t.delay);
                sc.tau_min = std::min(sc.tau_min, t.delay);
            }
        }
        return sc;
    }

    if (kind == "general") {
        check_keys(cfg, "operator", {"kind", "matrix"});
        Scenario sc;
        sc.name = "general";
        sc.system = System::general(GeneralOperator{parse_matrix(
            cfg.require_string("operator", "matrix"))});
        sc.tau_min = std::numeric_limits<double>::infinity();
        for (const std::string& sec : term_sections(cfg)) {
            DelayTerm t = parse_simple_term(cfg, sec);
            sc.tau_max = std::max(sc.tau_max, t.delay);
            sc.tau_min = std::min(sc.tau_min, t.delay);
            sc.terms.push_back(std::move(t));
        }
        if (sc.terms.empty()) sc.tau_min = 0.0;
        return sc;
    }

    if (kind == "competition") {
        check_keys(cfg, "operator",
                   {"kind", "case", "length", "modes", "d1", "d2", "boundary1", "boundary2",
                    "robin_alpha1", "robin_alpha2", "epsilon"});
        check_keys(cfg, "competition",
                   {"a1", "a2", "a11", "a22", "ap11", "ap12", "ap21", "ap22", "tau11", "tau12",
                    "tau21", "tau22"});
        if (!term_sections(cfg).empty())
            throw ConfigError("competition scenarios define terms through [competition]");
        if (!cfg.has_section("competition"))
            throw ConfigError("missing required section [competition]");

        CompetitionSpec spec;
        spec.field1.length = spec.field2.length = cfg.get_double("operator", "length", 3.141592653589793);
        spec.field1.modes = spec.field2.modes =
            static_cast<std::size_t>(cfg.get_int("operator", "modes", 16));
        if (overrides.modes)
            spec.field1.modes = spec.field2.modes = static_cast<std::size_t>(*overrides.modes);
        spec.field1.diffusion = cfg.get_double("operator", "d1", 1.0);
        spec.field2.diffusion = cfg.get_double("operator", "d2", 1.0);
        spec.field1.boundary =
            parse_boundary(cfg.get_string("operator", "boundary1", "dirichlet"), "operator");
        spec.field2.boundary =
            parse_boundary(cfg.get_string("operator", "boundary2", "dirichlet"), "operator");
        spec.field1.robin_alpha = cfg.get_double("operator", "robin_alpha1", 1.0);
        spec.field2.robin_alpha = cfg.get_double("operator", "robin_alpha2", 1.0);
        spec.case_index = static_cast<int>(cfg.get_int("operator", "case", 0));
        if (cfg.has("operator", "epsilon"))
            spec.epsilon = cfg.require_double("operator", "epsilon");

        spec.a1 = Coefficient(cfg.require_double("competition", "a1"));
        spec.a2 = Coefficient(cfg.require_double("competition", "a2"));
        spec.a11 = Coefficient(cfg.get_double("competition", "a11", 0.0));
        spec.a22 = Coefficient(cfg.get_double("competition", "a22", 0.0));
        spec.ap11 = Coefficient(cfg.get_double("competition", "ap11", 0.0));
        spec.ap12 = Coefficient(cfg.get_double("competition", "ap12", 0.0));
        spec.ap21 = Coefficient(cfg.get_double("competition", "ap21", 0.0));
        spec.ap22 = Coefficient(cfg.get_double("competition", "ap22", 0.0));
        spec.tau11 = cfg.get_double("competition", "tau11", 1.0);
        spec.tau12 = cfg.get_double("competition", "tau12", 1.0);
        spec.tau21 = cfg.get_double("competition", "tau21", 1.0);
        spec.tau22 = cfg.get_double("competition", "tau22", 1.0);
        return competition_scenario(spec);
    }

    throw ConfigError("unknown operator kind '" + kind + "'");
}

} // namespace

RunSetup build_setup(const ConfigFile& cfg, const CliOverrides& overrides) {
    static const std::set<std::string> known_roots{"operator", "competition", "history", "stepper",
                                                   "certify"};
    for (const std::string& sec : cfg.section_names()) {
        if (!known_roots.count(sec) && sec.rfind("terms.", 0) != 0)
            throw ConfigError("unknown section [" + sec + "]");
    }
    check_keys(cfg, "history", {"preset", "amplitude", "fraction", "file", "interpolation"});
    check_keys(cfg, "stepper", {"scheme", "h", "T", "output_every", "store_states", "b_max"});
    check_keys(cfg, "certify",
               {"targets", "dimension", "linear_k", "linear_norm_b", "linear_gamma", "require"});

    Scenario scenario = build_scenario(cfg, overrides);

    // Stepping plan.
    StepPlan plan;
    const std::string scheme = cfg.get_string("stepper", "scheme", "exp_rk2");
    if (scheme == "exp_euler") {
        plan.scheme = Scheme::exp_euler;
    } else if (scheme == "exp_rk2") {
        plan.scheme = Scheme::exp_rk2;
    } else {
        throw ConfigError("unknown scheme '" + scheme + "' in [stepper]");
    }
    double t_final = cfg.get_double("stepper", "T", 0.0);
    if (overrides.t_final) t_final = *overrides.t_final;

    const std::string h_str = cfg.get_string("stepper", "h", "auto");
    double h = 0.0;
    if (overrides.h) {
        h = *overrides.h;
    } else if (h_str == "auto") {
        if (!scenario.terms.empty() && std::isfinite(scenario.tau_min)) {
            h = scenario.tau_min / 100.0;
        } else if (t_final > 0.0) {
            h = t_final / 1000.0;
        }
    } else {
        h = cfg.require_double("stepper", "h");
    }
    plan.h = h;
    plan.output_every = static_cast<std::size_t>(cfg.get_int("stepper", "output_every", 1));
    plan.store_states = cfg.get_bool("stepper", "store_states", false);
    plan.b_max = cfg.get_double("stepper", "b_max", 1e12);

    // Certify options.
    CertifyOptions copt;
    const std::string targets = cfg.get_string("certify", "targets", "");
    if (!targets.empty()) {
        std::stringstream ts(targets);
        std::string t;
        while (std::getline(ts, t, ',')) {
            if (t != "global" && t != "linear_delay" && t != "small_data" && t != "admissibility")
                throw ConfigError("unknown certify target '" + t + "'");
            copt.targets.push_back(t);
        }
    }
    copt.dimension = static_cast<int>(cfg.get_int("certify", "dimension", 1));
    if (cfg.has("certify", "linear_k")) copt.linear_k = cfg.require_double("certify", "linear_k");
    if (cfg.has("certify", "linear_norm_b"))
        copt.linear_norm_b = cfg.require_double("certify", "linear_norm_b");
    copt.linear_gamma = cfg.get_double("certify", "linear_gamma", 0.0);
    const std::string require = cfg.get_string("certify", "require", "none");
    if (require != "none" && require != "feasible")
        throw ConfigError("certify require must be none or feasible");
    copt.require_feasible = (require == "feasible") || overrides.require_feasible;

    // History.
    const std::string preset = cfg.get_string("history", "preset", "constant");
    const std::string interp_str = cfg.get_string("history", "interpolation", "cubic_hermite");
    Interp interp;
    if (interp_str == "linear") {
        interp = Interp::linear;
    } else if (interp_str == "cubic_hermite") {
        interp = Interp::cubic_hermite;
    } else {
        throw ConfigError("unknown interpolation '" + interp_str + "'");
    }

    const double hist_dt = plan.h > 0.0
                               ? plan.h
                               : (scenario.tau_max > 0.0 ? scenario.tau_max / 256.0 : 1.0);
    bool small_data_history = false;
    double fraction = cfg.get_double("history", "fraction", 0.9);
    HistoryBuffer history(1, 0.0);
    if (preset == "constant") {
        const double amp = cfg.get_double("history", "amplitude", 0.1);
        history = scenario.make_history(amp, hist_dt, interp);
    } else if (preset == "zero") {
        history = scenario.make_history(0.0, hist_dt, interp);
    } else if (preset == "small_data") {
        if (!scenario.small_bounds)
            throw ConfigError("history preset small_data needs a scenario with reaction bounds");
        const SmallDataCertificate cert =
            small_data_certificate(scenario.lambda1, *scenario.small_bounds);
        if (!cert.feasible)
            throw ConfigError("history preset small_data: certificate infeasible (" +
                              cert.infeasible_reason + ")");
        const double target = fraction * cert.data_radius;
        const double amp = target / scenario.history_vnorm_per_amplitude();
        history = scenario.make_history(amp, hist_dt, interp);
        small_data_history = true;
    } else if (preset == "csv") {
        history = history_from_csv(cfg.require_string("history", "file"), scenario.system.dim(),
                                   scenario.tau_max, hist_dt, interp);
    } else {
        throw ConfigError("unknown history preset '" + preset + "'");
    }

    RunSetup setup{std::move(scenario), std::move(history), plan, t_final, std::move(copt),
                   small_data_history, fraction,
                   overrides.seed ? *overrides.seed : 12345ULL};
    return setup;
}

bool CertificateSet::any_infeasible() const {
    if (global && !global->feasible) return true;
    if (linear && !linear->feasible) return true;
    if (small_data && !small_data->feasible) return true;
    if (admissibility && !admissibility->all_satisfied()) return true;
    return false;
}

namespace {

bool wants(const CertifyOptions& opt, const std::string& target) {
    return opt.targets.empty() ||
           std::find(opt.targets.begin(), opt.targets.end(), target) != opt.targets.end();
}

} // namespace

CertificateSet compute_certificates(const RunSetup& setup) {
    const Scenario& sc = setup.scenario;
    CertificateSet set;

    if (sc.system.is_spectral()) {
        set.big_m = 1.0;
        set.omega = sc.lambda1;
    } else {
        try {
            set.fitted_envelope = sc.wave_blocks.empty()
                                      ? estimate_envelope(sc.system.general_op())
                                      : estimate_envelope_blockwise(sc.wave_blocks);
            set.big_m = set.fitted_envelope->big_m;
            set.omega = set.fitted_envelope->omega;
        } catch (const NotStableError& e) {
            // No envelope means no decay certificates; simulation can still run.
            set.envelope_error = e.what();
            set.notes.push_back(std::string("envelope: ") + e.what());
            return set;
        }
    }

    if (wants(setup.certify, "global")) {
        try {
            const LipschitzData lips = lipschitz_sum(sc.terms);
            set.global = global_certificate(set.big_m, set.omega, lips, sc.terms, setup.history);
        } catch (const ContractError& e) {
            set.notes.push_back(std::string("global: not applicable (") + e.what() + ")");
        }
    }

    if (wants(setup.certify, "linear_delay") && setup.certify.linear_k &&
        setup.certify.linear_norm_b) {
        set.linear = linear_delay_tau0(set.big_m, set.omega, setup.certify.linear_gamma,
                                       *setup.certify.linear_k, *setup.certify.linear_norm_b);
        if (set.linear->feasible && !sc.terms.empty()) {
            const double tau = sc.tau_max;
            if (tau > 0.0)
                set.linear_coarse = coarse_delay_condition(set.big_m, set.omega, setup.certify.linear_gamma,
                                               *setup.certify.linear_k,
                                               *setup.certify.linear_norm_b, tau);
        }
    }

    if (wants(setup.certify, "small_data")) {
        if (sc.small_bounds && sc.system.is_spectral()) {
            set.small_data = small_data_certificate(sc.lambda1, *sc.small_bounds);
        } else {
            set.notes.push_back("small_data: not applicable (no reaction bounds declared)");
        }
    }

    if (wants(setup.certify, "admissibility")) {
        if (sc.competition) {
            const auto& m = *sc.competition;
            set.admissibility = admissibility_competition(m.case_index, m.a1, m.a2, m.mu1, m.mu2,
                                                          setup.certify.dimension);
        } else if (sc.reaction_bounds && !sc.terms.empty()) {
            set.admissibility =
                admissibility_diffusion(sc.terms.front(), *sc.reaction_bounds,
                                        setup.certify.dimension, sc.boundary, sc.lambda1,
                                        sc.epsilon);
        } else {
            set.notes.push_back("admissibility: not applicable (no reaction bounds declared)");
        }
    }

    return set;
}

EnvelopeSpec global_envelope_spec(const GlobalCertificate& cert) {
    return {cert.prefactor, cert.rate, NormKind::h};
}

EnvelopeSpec small_data_envelope_spec(const SmallDataCertificate& cert) {
    return {cert.k0 / 2.0, cert.omega_prime / 2.0, NormKind::v};
}

} // namespace ddes
