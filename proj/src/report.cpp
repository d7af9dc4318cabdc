#include "ddes/report.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ddes {

std::string format_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void Report::put(const std::string& key, double value) { rows_.emplace_back(key, format_num(value)); }

void Report::put(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }

void Report::put(const std::string& key, const char* value) { rows_.emplace_back(key, value); }

void Report::put(const std::string& key, bool value) { rows_.emplace_back(key, value ? "1" : "0"); }

void Report::put_int(const std::string& key, long long value) {
    rows_.emplace_back(key, std::to_string(value));
}

void Report::blank() { rows_.emplace_back("", ""); }

void Report::write(std::ostream& os, ReportFormat format) const {
    if (format == ReportFormat::kv) {
        for (const auto& [k, v] : rows_) {
            if (k.empty()) {
                os << "\n";
            } else {
                os << k << " = " << v << "\n";
            }
        }
        return;
    }
    std::size_t width = 0;
    for (const auto& [k, v] : rows_) width = std::max(width, k.size());
    for (const auto& [k, v] : rows_) {
        if (k.empty()) {
            os << "\n";
            continue;
        }
        os << k;
        for (std::size_t i = k.size(); i < width + 2; ++i) os << ' ';
        os << v << "\n";
    }
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (columns.size() != header.size()) throw ContractError("csv header/column count mismatch");
    for (std::size_t c = 0; c < header.size(); ++c)
        os << header[c] << (c + 1 < header.size() ? "," : "\n");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows) throw ContractError("csv column length mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << format_num(columns[c][r]) << (c + 1 < columns.size() ? "," : "\n");
    }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    std::vector<std::string> header{"t", "h_norm", "v_norm"};
    std::vector<std::vector<double>> cols{traj.times, traj.h_norms, traj.v_norms};
    for (std::size_t f = 0; f < traj.field_h_norms.size(); ++f) {
        header.push_back("field" + std::to_string(f + 1) + "_h");
        cols.push_back(traj.field_h_norms[f]);
    }
    write_csv(os, header, cols);
}

void write_envelope_csv(std::ostream& os, const EnvelopeReport& rep) {
    write_csv(os, {"t", "norm", "envelope", "ratio"},
              {rep.times, rep.norms, rep.envelope, rep.ratios});
}

Report global_certificate_report(const GlobalCertificate& cert) {
    Report r;
    r.put("certificate", "global");
    r.put("feasible", cert.feasible);
    if (!cert.feasible) r.put("infeasible_reason", cert.infeasible_reason);
    r.put("M", cert.big_m);
    r.put("omega", cert.omega);
    r.put("gamma", cert.gamma);
    r.put("gamma_is_global", cert.gamma_is_global);
    r.put("tau", cert.tau);
    r.put("tau0", cert.tau0);
    r.put("rate", cert.rate);
    r.put("alpha", cert.alpha);
    r.put("alpha_quadrature_error", cert.alpha_error);
    r.put("u0_norm", cert.u0_norm);
    r.put("prefactor", cert.prefactor);
    return r;
}

Report small_data_certificate_report(const SmallDataCertificate& cert) {
    Report r;
    r.put("certificate", "small_data");
    r.put("feasible", cert.feasible);
    if (!cert.feasible) r.put("infeasible_reason", cert.infeasible_reason);
    r.put("lambda1", cert.lambda1);
    r.put("c1", cert.c1);
    r.put("k0", cert.k0_unbounded ? std::numeric_limits<double>::infinity() : cert.k0);
    r.put("k0_cap", cert.k_cap);
    r.put("k0_unbounded", cert.k0_unbounded);
    r.put("omega", cert.omega);
    r.put("omega_prime", cert.omega_prime);
    r.put("c4_at_k0", cert.c4_at_k0);
    r.put("c_omega_lambda", cert.c_omega_lambda);
    r.put("gamma0", cert.gamma0);
    r.put("data_radius", cert.data_radius);
    r.put("envelope_prefactor", cert.k0 / 2.0);
    r.put("envelope_rate", cert.omega_prime / 2.0);
    // The decay constant follows the displayed inequality (C4 scaled by
    // 1/sqrt(lambda1)); flagged so report consumers know which variant runs.
    r.put("omega_definition", "inequality_faithful");
    return r;
}

Report linear_delay_report(const LinearDelayCertificate& cert, bool coarse) {
    Report r;
    r.put("certificate", "linear_delay");
    r.put("feasible", cert.feasible);
    if (!cert.feasible) r.put("infeasible_reason", cert.infeasible_reason);
    r.put("tau0_prime", cert.tau0);
    r.put("coarse_delay_condition", coarse);
    return r;
}

Report admissibility_report(const AdmissibilityReport& rep) {
    Report r;
    r.put("certificate", "admissibility");
    r.put("scenario", rep.scenario);
    r.put("all_satisfied", rep.all_satisfied());
    for (const Condition& c : rep.conditions) {
        r.put("cond." + c.id, c.satisfied ? "pass" : "fail");
        r.put("margin." + c.id, c.margin);
    }
    for (const auto& [k, v] : rep.constants) r.put(k, v);
    return r;
}

} // namespace ddes
