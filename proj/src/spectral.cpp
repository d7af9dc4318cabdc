#include "ddes/spectral.hpp"

#include "ddes/errors.hpp"
#include "ddes/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace ddes {

void SpectralOperator::validate() const {
    if (eigenvalues.empty()) throw ContractError("spectral operator needs at least one mode");
    double prev = 0.0;
    for (double lam : eigenvalues) {
        if (!(lam > 0.0) || !std::isfinite(lam))
            throw ContractError("eigenvalues of -A must be strictly positive and finite");
        if (lam < prev) throw ContractError("eigenvalues must be non-decreasing");
        prev = lam;
    }
    if (shift < 0.0 || !std::isfinite(shift)) throw ContractError("shift must be >= 0");
}

void GeneralOperator::validate() const {
    if (m.rows() != m.cols()) throw ContractError("general operator must be square");
    if (m.rows() == 0) throw ContractError("general operator must be non-empty");
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i)
        if (!std::isfinite(m.data()[i])) throw ContractError("general operator entries must be finite");
}

ModalState apply_propagator(const SpectralOperator& op, const ModalState& u, double t) {
    if (u.dim() != op.dim()) throw ContractError("state/operator dimension mismatch");
    if (!(t >= 0.0)) throw ContractError("propagator time must be >= 0");
    ModalState out;
    out.c.resize(u.dim());
    for (std::size_t k = 0; k < u.dim(); ++k) out.c[k] = u.c[k] * std::exp(-op.eigenvalues[k] * t);
    return out;
}

Norms norms(const SpectralOperator& op, const ModalState& u) {
    if (u.dim() != op.dim()) throw ContractError("state/operator dimension mismatch");
    Norms n;
    n.h = std::sqrt(kernels::sum_sq(u.c.data(), u.dim()));
    n.v = std::sqrt(kernels::weighted_sum_sq(op.eigenvalues.data(), u.c.data(), u.dim()));
    return n;
}

double beta_norm(const SpectralOperator& op, const ModalState& u, double beta) {
    if (u.dim() != op.dim()) throw ContractError("state/operator dimension mismatch");
    if (!(beta >= 0.0 && beta <= 0.5)) throw ContractError("beta must lie in [0, 1/2]");
    double sum = 0.0;
    for (std::size_t k = 0; k < u.dim(); ++k)
        sum += std::pow(op.eigenvalues[k], 2.0 * beta) * u.c[k] * u.c[k];
    return std::sqrt(sum);
}

namespace {

template <typename Sampler>
std::vector<double> grid_from_sampler(Sampler&& norm_at, const EnvelopeFitOptions& opts) {
    // Probe the horizon by doubling until the norm has collapsed; the tail
    // slope of the probes estimates the spectral abscissa.
    const double n0 = norm_at(opts.t_min);
    double t_prev = opts.t_min;
    double n_prev = n0;
    double t_last = 0.0, n_last = 0.0;
    bool decayed = false;
    for (double t = 1.0; t <= 1048576.0; t *= 2.0) {
        const double n = norm_at(t);
        t_last = t;
        n_last = n;
        if (n < 1e-10 * std::max(n0, 1.0)) {
            decayed = true;
            break;
        }
        if (t >= 64.0 && n >= n_prev && n >= n0)
            throw NotStableError("not exponentially stable on horizon");
        t_prev = t;
        n_prev = n;
    }
    if (!decayed && n_last >= n0) throw NotStableError("not exponentially stable on horizon");
    double alpha = (std::log(n_last) - std::log(n_prev)) / (t_last - t_prev);
    if (!(alpha < 0.0)) throw NotStableError("not exponentially stable on horizon");

    const double t_env = std::clamp(50.0 / std::abs(alpha), 1e-2, 1e7);
    std::vector<double> ts(opts.grid_points);
    const double lo = std::log(opts.t_min), hi = std::log(t_env);
    for (std::size_t k = 0; k < opts.grid_points; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(opts.grid_points - 1);
        ts[k] = std::exp(lo + f * (hi - lo));
    }
    return ts;
}

} // namespace

std::vector<double> envelope_grid(const GeneralOperator& op, const EnvelopeFitOptions& opts) {
    op.validate();
    return grid_from_sampler(
        [&op](double t) { return spectral_norm(linalg::expm(op.m * t)); }, opts);
}

std::vector<double> sample_norms(const GeneralOperator& op, std::span<const double> ts) {
    std::vector<double> ns(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k)
        ns[k] = spectral_norm(linalg::expm(op.m * ts[k]));
    return ns;
}

SemigroupEnvelope fit_envelope_from_samples(std::span<const double> ts, std::span<const double> ns,
                                            double m_cap) {
    if (ts.size() != ns.size() || ts.size() < 4)
        throw ContractError("envelope fit needs matching sample arrays");
    if (!(ns.back() < ns.front()))
        throw NotStableError("not exponentially stable on horizon");

    // Rate estimate from the last decade of the grid.
    std::size_t i0 = 0;
    while (i0 + 2 < ts.size() && ts[i0] < ts.back() / 10.0) ++i0;
    double alpha = (std::log(ns.back()) - std::log(ns[i0])) / (ts.back() - ts[i0]);
    if (!(alpha < 0.0)) throw NotStableError("not exponentially stable on horizon");

    const double omega_start = -alpha;
    for (double omega = omega_start; omega > omega_start * 1e-9; omega *= 0.99) {
        double m = 0.0;
        bool overflow = false;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double r = ns[k] * std::exp(omega * ts[k]);
            if (!std::isfinite(r) || r > m_cap) {
                overflow = true;
                break;
            }
            m = std::max(m, r);
        }
        if (!overflow) {
            SemigroupEnvelope env{std::max(m, 1.0), omega};
            for (std::size_t k = 0; k < ts.size(); ++k) {
                if (env.big_m * std::exp(-env.omega * ts[k]) < ns[k] * (1.0 - 1e-12))
                    throw ContractError("envelope fit violated its own domination invariant");
            }
            return env;
        }
    }
    throw NotStableError("no envelope rate admits M below the cap");
}

SemigroupEnvelope estimate_envelope(const GeneralOperator& op, const EnvelopeFitOptions& opts) {
    const std::vector<double> ts = envelope_grid(op, opts);
    const std::vector<double> ns = sample_norms(op, ts);
    return fit_envelope_from_samples(ts, ns, opts.m_cap);
}

SemigroupEnvelope estimate_envelope_blockwise(std::span<const linalg::Matrix> blocks,
                                              const EnvelopeFitOptions& opts) {
    if (blocks.empty()) throw ContractError("blockwise envelope needs at least one block");
    for (const linalg::Matrix& b : blocks) GeneralOperator{b}.validate();
    auto max_norm = [&blocks](double t) {
        double n = 0.0;
        for (const linalg::Matrix& b : blocks)
            n = std::max(n, spectral_norm(linalg::expm(b * t)));
        return n;
    };
    const std::vector<double> ts = grid_from_sampler(max_norm, opts);
    std::vector<double> ns(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) ns[k] = max_norm(ts[k]);
    return fit_envelope_from_samples(ts, ns, opts.m_cap);
}

} // namespace ddes
