#include "ddes/analysis.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ddes {

namespace {

const std::vector<double>& norm_column(const Trajectory& traj, NormKind norm) {
    return norm == NormKind::h ? traj.h_norms : traj.v_norms;
}

} // namespace

RateFit fit_decay_rate(const Trajectory& traj, NormKind norm, double tail_fraction,
                       double window) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw ContractError("tail_fraction must lie in (0, 1)");
    if (traj.terminal != Terminal::completed)
        throw FitError("decay fit requires a completed trajectory");
    const std::vector<double>& ns = norm_column(traj, norm);
    if (traj.times.size() < 2) throw FitError("trajectory too short for a fit");

    const double t_end = traj.times.back();
    const double t_start = t_end * (1.0 - tail_fraction);
    std::vector<double> ts, ys;
    if (window > 0.0) {
        // One supremum per window so the oscillation does not bias the slope.
        double w_start = t_start;
        double w_max = 0.0, w_t = 0.0;
        bool have = false;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            if (traj.times[i] < t_start) continue;
            if (traj.times[i] >= w_start + window && have) {
                ts.push_back(w_t);
                ys.push_back(w_max);
                w_start += window * std::floor((traj.times[i] - w_start) / window);
                have = false;
            }
            if (!have || ns[i] > w_max) {
                w_max = ns[i];
                w_t = traj.times[i];
                have = true;
            }
        }
        if (have) {
            ts.push_back(w_t);
            ys.push_back(w_max);
        }
    } else {
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            if (traj.times[i] < t_start) continue;
            ts.push_back(traj.times[i]);
            ys.push_back(ns[i]);
        }
    }

    if (ts.size() < 20) throw FitError("decay fit needs at least 20 tail samples");
    for (double y : ys)
        if (!(y > 0.0) || !std::isfinite(y))
            throw FitError("decay fit window contains non-positive or non-finite norms");

    const std::size_t n = ts.size();
    double st = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        st += ts[i];
        sy += std::log(ys[i]);
    }
    const double mt = st / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = ts[i] - mt;
        const double dy = std::log(ys[i]) - my;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (stt == 0.0) throw FitError("degenerate time axis in decay fit");

    RateFit fit;
    const double slope = sty / stt;
    fit.rate = -slope;
    fit.intercept = my - slope * mt;
    fit.points = n;
    const double ss_res = syy - sty * sty / stt;
    fit.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return fit;
}

EnvelopeReport check_envelope(const Trajectory& traj, const EnvelopeSpec& spec) {
    EnvelopeReport rep;
    const std::vector<double>& ns = norm_column(traj, spec.norm);
    rep.times = traj.times;
    rep.norms = ns;
    rep.envelope.resize(ns.size());
    rep.ratios.resize(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double env = spec.prefactor * std::exp(-spec.rate * traj.times[i]);
        rep.envelope[i] = env;
        double ratio;
        if (env > 1e-300) {
            ratio = ns[i] / env;
        } else {
            ratio = ns[i] <= 1e-300 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        rep.ratios[i] = ratio;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        if (ratio > 1.0 && !rep.first_violation) rep.first_violation = traj.times[i];
    }
    return rep;
}

EnvelopeReport skipped_envelope(const std::string& reason) {
    EnvelopeReport rep;
    rep.applicable = false;
    rep.status = "skipped: " + reason;
    return rep;
}

} // namespace ddes
