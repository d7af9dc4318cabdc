// ddes: batch front-end for delay evolution runs and stability certificates.
//
// Subcommands:
//   certify  <config>   emit the applicable certificate reports
//   simulate <config>   integrate and write trajectory / envelope / summary
//   sweep    <config>   one simulate per parameter value, merged CSV
//   validate <config>   integrate vs the RK4 oracle, difference report
//
// Exit codes: 0 success, 2 config error, 3 infeasible with --require-feasible,
// 4 numerical failure.

#include "ddes/errors.hpp"
#include "ddes/run_config.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace ddes;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "kv";
    bool require_feasible = false;
    unsigned long long seed = 12345;
    long long modes = 0;
    double h = 0.0;
    double t_final = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("config", args.config_path, "scenario config file")->required();
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--format", args.format, "report format (kv|table)")
        ->check(CLI::IsMember({"kv", "table"}));
    cmd->add_flag("--require-feasible", args.require_feasible,
                  "exit 3 when any requested certificate is infeasible");
    cmd->add_option("--seed", args.seed, "seed for sampling probes");
    cmd->add_option("--modes", args.modes, "override the operator mode count");
    cmd->add_option("--h", args.h, "override the step size");
    cmd->add_option("--T", args.t_final, "override the final time");
}

CliOverrides overrides_from(const CommonArgs& args) {
    CliOverrides ov;
    if (args.h > 0.0) ov.h = args.h;
    if (args.t_final > 0.0) ov.t_final = args.t_final;
    if (args.modes > 0) ov.modes = args.modes;
    ov.seed = args.seed;
    ov.require_feasible = args.require_feasible;
    return ov;
}

ReportFormat report_format(const CommonArgs& args) {
    return args.format == "table" ? ReportFormat::table : ReportFormat::kv;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string render(const Report& rep, ReportFormat fmt) {
    std::ostringstream os;
    rep.write(os, fmt);
    return os.str();
}

Report certificates_report(const CertificateSet& set, const RunSetup& setup) {
    Report all;
    all.put("scenario", setup.scenario.name);
    if (set.envelope_error) {
        all.put("envelope_error", *set.envelope_error);
        return all;
    }
    all.put("M", set.big_m);
    all.put("omega", set.omega);
    all.put("m_cap", 1e6);
    if (set.fitted_envelope) all.put("envelope_fitted", true);
    all.blank();
    auto append = [&all](const Report& sub) {
        for (const auto& row : sub.rows()) all.put(row.first, row.second);
        all.blank();
    };
    if (set.global) append(global_certificate_report(*set.global));
    if (set.linear) append(linear_delay_report(*set.linear, set.linear_coarse));
    if (set.small_data) append(small_data_certificate_report(*set.small_data));
    if (set.admissibility) append(admissibility_report(*set.admissibility));
    for (const std::string& note : set.notes) all.put("note", note);
    return all;
}

int cmd_certify(const CommonArgs& args) {
    const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
    RunSetup setup = build_setup(cfg, overrides_from(args));
    const CertificateSet set = compute_certificates(setup);
    if (set.envelope_error) {
        std::cerr << "error: " << *set.envelope_error << "\n";
        return 4;
    }
    const Report rep = certificates_report(set, setup);

    const std::string text = render(rep, report_format(args));
    std::cout << text;
    fs::create_directories(args.out_dir);
    write_text(fs::path(args.out_dir) / "certificates.txt", text);

    if (args.require_feasible || setup.certify.require_feasible) {
        if (set.any_infeasible()) return 3;
    }
    return 0;
}

struct SimOutputs {
    Trajectory traj;
    CertificateSet certs;
    Report summary;
    std::optional<EnvelopeReport> envelope;
};

SimOutputs run_simulation(RunSetup& setup) {
    if (!(setup.t_final > 0.0)) throw ConfigError("missing required key 'T' in [stepper]");
    if (!(setup.plan.h > 0.0)) throw ConfigError("missing required key 'h' in [stepper]");

    SimOutputs out;
    out.certs = compute_certificates(setup);
    out.traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                         setup.t_final, setup.plan);

    Report sum;
    sum.put("scenario", setup.scenario.name);
    sum.put("scheme", scheme_name(setup.plan.scheme));
    sum.put("h", setup.plan.h);
    sum.put("T", setup.t_final);
    sum.put("terminal", terminal_name(out.traj.terminal));
    if (out.traj.blowup_estimate) sum.put("blowup_time_estimate", *out.traj.blowup_estimate);
    sum.put("final_time", out.traj.times.back());
    sum.put("final_h_norm", out.traj.h_norms.back());
    sum.put("final_v_norm", out.traj.v_norms.back());

    if (out.traj.terminal == Terminal::completed) {
        try {
            const RateFit fit = fit_decay_rate(out.traj, NormKind::h, 0.5);
            sum.put("fit_rate_h", fit.rate);
            sum.put("fit_r2_h", fit.r2);
        } catch (const FitError& e) {
            sum.put("fit_rate_h", std::string("unavailable: ") + e.what());
        }
    }

    // Envelope check against the matching certificate: the small-data bound
    // when the datum was sized for it, otherwise the global bound.
    if (setup.small_data_history && out.certs.small_data && out.certs.small_data->feasible) {
        out.envelope = check_envelope(out.traj, small_data_envelope_spec(*out.certs.small_data));
        sum.put("envelope_certificate", "small_data");
    } else if (out.certs.global && out.certs.global->feasible) {
        out.envelope = check_envelope(out.traj, global_envelope_spec(*out.certs.global));
        sum.put("envelope_certificate", "global");
    } else {
        const std::string reason = out.certs.global && !out.certs.global->feasible
                                       ? "certificate infeasible"
                                       : "no applicable certificate";
        out.envelope = skipped_envelope(reason);
        sum.put("envelope_certificate", "none");
        sum.put("envelope_status", out.envelope->status);
    }
    if (out.envelope && out.envelope->applicable) {
        sum.put("envelope_max_ratio", out.envelope->max_ratio);
        if (out.envelope->first_violation)
            sum.put("envelope_first_violation", *out.envelope->first_violation);
    }
    out.summary = std::move(sum);
    return out;
}

const char* kPlotScript = R"(# render with: gnuplot plot.gp
set terminal pngcairo size 900,600
set output 'norms.png'
set logscale y
set xlabel 't'
set ylabel 'norm'
plot 'trajectory.csv' using 1:2 with lines title 'H norm', \
     'trajectory.csv' using 1:3 with lines title 'V norm', \
     'envelope.csv' using 1:3 with lines dashtype 2 title 'certified envelope'
)";

int cmd_simulate(const CommonArgs& args) {
    const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
    RunSetup setup = build_setup(cfg, overrides_from(args));
    SimOutputs out = run_simulation(setup);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    {
        std::ofstream os(dir / "trajectory.csv");
        write_trajectory_csv(os, out.traj);
    }
    if (out.envelope && out.envelope->applicable) {
        std::ofstream os(dir / "envelope.csv");
        write_envelope_csv(os, *out.envelope);
    }
    write_text(dir / "plot.gp", kPlotScript);

    Report full = out.summary;
    full.blank();
    const Report certs = certificates_report(out.certs, setup);
    for (const auto& row : certs.rows()) full.put(row.first, row.second);
    const std::string text = render(full, report_format(args));
    write_text(dir / "summary.txt", text);
    std::cout << text;

    if ((args.require_feasible || setup.certify.require_feasible) && out.certs.any_infeasible())
        return 3;
    if (out.traj.terminal == Terminal::history_underrun) return 4;
    return 0;
}

struct SweepArgs {
    CommonArgs common;
    std::string param;
    std::string range;
};

int cmd_sweep(const SweepArgs& args) {
    const ConfigFile base = ConfigFile::parse_file(args.common.config_path);

    const std::size_t c1 = args.range.find(':');
    const std::size_t c2 = args.range.rfind(':');
    if (c1 == std::string::npos || c2 == c1)
        throw ConfigError("--range must look like a:b:n");
    const double lo = std::stod(args.range.substr(0, c1));
    const double hi = std::stod(args.range.substr(c1 + 1, c2 - c1 - 1));
    const long long n = std::stoll(args.range.substr(c2 + 1));
    if (n < 1) throw ConfigError("--range needs at least one point");

    struct Point {
        double value = 0.0;
        std::string terminal;
        double fit_rate = std::numeric_limits<double>::quiet_NaN();
        double fit_r2 = std::numeric_limits<double>::quiet_NaN();
        bool feasible = false;
        double tau0 = std::numeric_limits<double>::quiet_NaN();
        std::string error;
    };
    std::vector<Point> points(static_cast<std::size_t>(n));

    auto run_point = [&](std::size_t i) {
        Point& p = points[i];
        p.value = (n == 1) ? lo
                           : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        try {
            ConfigFile cfg = base;
            cfg.set_path(args.param, format_num(p.value));
            RunSetup setup = build_setup(cfg, overrides_from(args.common));
            SimOutputs out = run_simulation(setup);
            p.terminal = terminal_name(out.traj.terminal);
            if (out.certs.global) {
                p.feasible = out.certs.global->feasible;
                p.tau0 = out.certs.global->tau0;
            }
            if (out.traj.terminal == Terminal::completed) {
                try {
                    const RateFit fit = fit_decay_rate(out.traj, NormKind::h, 0.5);
                    p.fit_rate = fit.rate;
                    p.fit_r2 = fit.r2;
                } catch (const FitError&) {
                }
            }
        } catch (const std::exception& e) {
            p.error = e.what();
            p.terminal = "error";
        }
    };

    // Fan the points over worker threads; the merge below is single-writer.
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                       points.size()));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
                run_point(i);
        });
    }
    for (std::thread& t : pool) t.join();

    fs::create_directories(args.common.out_dir);
    std::ofstream os(fs::path(args.common.out_dir) / "sweep.csv");
    os << "param,value,terminal,fit_rate,fit_r2,feasible,tau0\n";
    for (const Point& p : points) {
        os << args.param << "," << format_num(p.value) << "," << p.terminal << ","
           << format_num(p.fit_rate) << "," << format_num(p.fit_r2) << "," << (p.feasible ? 1 : 0)
           << "," << format_num(p.tau0) << "\n";
    }
    std::cout << "sweep: " << points.size() << " points written to "
              << (fs::path(args.common.out_dir) / "sweep.csv").string() << "\n";
    for (const Point& p : points) {
        if (!p.error.empty()) {
            std::cerr << "sweep point " << format_num(p.value) << " failed: " << p.error << "\n";
            return 4;
        }
    }
    return 0;
}

int cmd_validate(const CommonArgs& args, double oracle_h) {
    const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
    RunSetup setup = build_setup(cfg, overrides_from(args));
    if (!(setup.t_final > 0.0)) throw ConfigError("missing required key 'T' in [stepper]");
    if (!(setup.plan.h > 0.0)) throw ConfigError("missing required key 'h' in [stepper]");

    StepPlan plan = setup.plan;
    plan.store_states = true;
    Trajectory traj = integrate(setup.scenario.system, setup.scenario.terms, setup.history,
                                setup.t_final, plan);

    if (oracle_h <= 0.0) oracle_h = plan.h / 10.0;
    const auto ratio = static_cast<std::size_t>(std::llround(plan.h / oracle_h));
    if (ratio < 1 || std::abs(plan.h - oracle_h * static_cast<double>(ratio)) > 1e-12 * plan.h)
        throw ConfigError("--oracle-h must divide the step size");
    OraclePlan oplan;
    oplan.h = oracle_h;
    oplan.record_every = ratio * plan.output_every;
    oplan.store_states = true;
    oplan.b_max = plan.b_max;
    Trajectory oracle = oracle_integrate(setup.scenario.system, setup.scenario.terms,
                                          setup.history, setup.t_final, oplan);

    const std::size_t rows = std::min(traj.times.size(), oracle.times.size());
    double sup_norm = 0.0, sup_diff = 0.0, sup_state_diff = 0.0;
    std::vector<double> diffs(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        sup_norm = std::max(sup_norm, std::abs(oracle.h_norms[i]));
        sup_diff = std::max(sup_diff, std::abs(traj.h_norms[i] - oracle.h_norms[i]));
        double d2 = 0.0;
        for (std::size_t k = 0; k < traj.states[i].size(); ++k) {
            const double d = traj.states[i][k] - oracle.states[i][k];
            d2 += d * d;
        }
        diffs[i] = std::sqrt(d2);
        sup_state_diff = std::max(sup_state_diff, diffs[i]);
    }

    fs::create_directories(args.out_dir);
    {
        std::ofstream os(fs::path(args.out_dir) / "validate.csv");
        std::vector<double> ts(traj.times.begin(), traj.times.begin() + static_cast<long>(rows));
        std::vector<double> hn(traj.h_norms.begin(), traj.h_norms.begin() + static_cast<long>(rows));
        std::vector<double> on(oracle.h_norms.begin(),
                               oracle.h_norms.begin() + static_cast<long>(rows));
        write_csv(os, {"t", "h_norm", "h_norm_oracle", "state_diff"}, {ts, hn, on, diffs});
    }

    Report rep;
    rep.put("scenario", setup.scenario.name);
    rep.put("terminal", terminal_name(traj.terminal));
    rep.put("oracle_terminal", terminal_name(oracle.terminal));
    rep.put("h", plan.h);
    rep.put("oracle_h", oracle_h);
    rep.put("sup_norm_diff", sup_diff);
    rep.put("sup_state_diff", sup_state_diff);
    rep.put("sup_rel_diff", sup_norm > 0.0 ? sup_state_diff / sup_norm : 0.0);
    const std::string text = render(rep, report_format(args));
    write_text(fs::path(args.out_dir) / "validate_summary.txt", text);
    std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"delay evolution equations: simulation and stability certificates"};
    // long-form help only: --h is the step-size override
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    CommonArgs certify_args, simulate_args, validate_args;
    SweepArgs sweep_args;
    double oracle_h = 0.0;

    add_common(app.add_subcommand("certify", "emit certificate reports"), certify_args);
    add_common(app.add_subcommand("simulate", "integrate and write reports"), simulate_args);
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
    add_common(sweep, sweep_args.common);
    sweep->add_option("--param", sweep_args.param, "config path, e.g. terms.1.tau")->required();
    sweep->add_option("--range", sweep_args.range, "a:b:n inclusive linspace")->required();
    CLI::App* validate = app.add_subcommand("validate", "compare against the RK4 oracle");
    add_common(validate, validate_args);
    validate->add_option("--oracle-h", oracle_h, "oracle step size (default h/10)");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("certify")) return cmd_certify(certify_args);
        if (app.got_subcommand("simulate")) return cmd_simulate(simulate_args);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args);
        if (app.got_subcommand("validate")) return cmd_validate(validate_args, oracle_h);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
