#pragma once

#include "ddes/stepper.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddes {

enum class NormKind { h, v };

struct RateFit {
    double rate = 0.0;      // positive = decay
    double intercept = 0.0; // log norm at t = 0 from the fit
    double r2 = 0.0;
    std::size_t points = 0;
};

// Least-squares fit of log(norm) against t on the trailing tail_fraction of a
// completed trajectory. window > 0 fits per-window suprema instead of raw
// samples (for oscillatory norms); the window length should be about one
// period of the dominant mode. Throws FitError on unusable data.
RateFit fit_decay_rate(const Trajectory& traj, NormKind norm, double tail_fraction,
                       double window = 0.0);

struct EnvelopeSpec {
    double prefactor = 0.0;
    double rate = 0.0;
    NormKind norm = NormKind::h;
};

struct EnvelopeReport {
    std::string status = "checked"; // or "skipped: <reason>"
    bool applicable = true;
    double max_ratio = 0.0;
    std::optional<double> first_violation;
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> envelope;
    std::vector<double> ratios;
};

// Pointwise norm(t) / (prefactor e^{-rate t}); max ratio and first time the
// ratio exceeds one, if any.
EnvelopeReport check_envelope(const Trajectory& traj, const EnvelopeSpec& spec);

EnvelopeReport skipped_envelope(const std::string& reason);

} // namespace ddes
