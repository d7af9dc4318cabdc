#pragma once

#include "ddes/linalg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ddes {

// Diagonal representation of a negative self-adjoint generator A: the stored
// values are the eigenvalues of -A, ascending and strictly positive. `shift`
// records the epsilon added in Neumann-type constructions (already folded
// into the eigenvalues); lambda1() is the Poincare constant.
struct SpectralOperator {
    std::vector<double> eigenvalues;
    double shift = 0.0;

    std::size_t dim() const { return eigenvalues.size(); }
    double lambda1() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
    void validate() const;
};

struct ModalState {
    std::vector<double> c;

    std::size_t dim() const { return c.size(); }
};

// Dense generator for cases where A is not self-adjoint (damped wave blocks).
struct GeneralOperator {
    linalg::Matrix m;

    std::size_t dim() const { return m.rows(); }
    void validate() const;
};

// Certified bound ||exp(tA)|| <= M exp(-omega t) on the fitting grid.
struct SemigroupEnvelope {
    double big_m = 1.0;
    double omega = 0.0;
};

struct Norms {
    double h = 0.0;
    double v = 0.0;
};

// S(t) applied to a modal state: coefficient k becomes c_k exp(-lambda_k t).
ModalState apply_propagator(const SpectralOperator& op, const ModalState& u, double t);

Norms norms(const SpectralOperator& op, const ModalState& u);

// ||(-A)^beta u||, beta in [0, 1/2]; beta = 0 is the H norm, 1/2 the V norm.
double beta_norm(const SpectralOperator& op, const ModalState& u, double beta);

struct EnvelopeFitOptions {
    std::size_t grid_points = 200;
    double m_cap = 1e6;
    double t_min = 1e-3;
};

// Fit (M, omega) to sampled norms: sweep rates downward from the estimated
// spectral abscissa in 1% steps, accept the largest rate whose induced
// M = max_k n_k exp(omega t_k) stays under the cap. Domination on the grid
// holds by construction. Throws NotStableError when the samples do not decay.
SemigroupEnvelope fit_envelope_from_samples(std::span<const double> ts, std::span<const double> ns,
                                            double m_cap);

// Sample ||exp(tA)|| by dense exponentials on a log grid and fit.
SemigroupEnvelope estimate_envelope(const GeneralOperator& op,
                                    const EnvelopeFitOptions& opts = {});

// Same fit applied to the pointwise max over diagonal blocks.
SemigroupEnvelope estimate_envelope_blockwise(std::span<const linalg::Matrix> blocks,
                                              const EnvelopeFitOptions& opts = {});

// The log-spaced grid and sampled norms used by the fit (exposed so reports
// and tests can assert domination point by point).
std::vector<double> envelope_grid(const GeneralOperator& op, const EnvelopeFitOptions& opts);
std::vector<double> sample_norms(const GeneralOperator& op, std::span<const double> ts);

} // namespace ddes
