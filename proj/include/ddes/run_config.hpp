#pragma once

#include "ddes/analysis.hpp"
#include "ddes/certificates.hpp"
#include "ddes/config.hpp"
#include "ddes/report.hpp"
#include "ddes/scenarios.hpp"
#include "ddes/stepper.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddes {

struct CertifyOptions {
    std::vector<std::string> targets; // empty = all applicable
    int dimension = 1;
    std::optional<double> linear_k;
    std::optional<double> linear_norm_b;
    double linear_gamma = 0.0;
    bool require_feasible = false;
};

struct CliOverrides {
    std::optional<double> h;
    std::optional<double> t_final;
    std::optional<long long> modes;
    std::optional<unsigned long long> seed;
    bool require_feasible = false;
};

// Fully resolved run: scenario, initial datum, stepping plan, certify options.
struct RunSetup {
    Scenario scenario;
    HistoryBuffer history;
    StepPlan plan;
    double t_final = 0.0; // 0 = not configured
    CertifyOptions certify;
    bool small_data_history = false;
    double small_data_fraction = 0.9;
    unsigned long long seed = 12345;
};

// Parses and validates the full config schema (unknown sections or keys are
// ConfigErrors) and builds the scenario. CLI flags override config values.
RunSetup build_setup(const ConfigFile& cfg, const CliOverrides& overrides = {});

struct CertificateSet {
    double big_m = 1.0;
    double omega = 0.0;
    std::optional<SemigroupEnvelope> fitted_envelope;
    std::optional<std::string> envelope_error; // semigroup not stable on horizon
    std::optional<GlobalCertificate> global;
    std::optional<LinearDelayCertificate> linear;
    bool linear_coarse = false;
    std::optional<SmallDataCertificate> small_data;
    std::optional<AdmissibilityReport> admissibility;
    std::vector<std::string> notes; // targets skipped and why

    bool any_infeasible() const;
};

CertificateSet compute_certificates(const RunSetup& setup);

// Envelope spec from a feasible certificate, for check_envelope.
EnvelopeSpec global_envelope_spec(const GlobalCertificate& cert);
EnvelopeSpec small_data_envelope_spec(const SmallDataCertificate& cert);

} // namespace ddes
