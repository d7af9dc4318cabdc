#pragma once

#include "ddes/history.hpp"
#include "ddes/nonlinearity.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddes {

// Small-delay certificate for globally Lipschitz terms. Feasible iff
// gamma < omega / (2M) and tau < tau0 = (1/omega) ln(omega/(M gamma) - 1);
// then ||U(t)||_H <= M exp(-rate t) (||U0|| + alpha) with
// rate = omega - M gamma (1 + exp(omega tau)).
struct GlobalCertificate {
    bool feasible = false;
    std::string infeasible_reason;
    double big_m = 1.0;
    double omega = 0.0;
    double gamma = 0.0;
    bool gamma_is_global = true;
    double tau = 0.0;
    double tau0 = 0.0;
    bool tau0_infinite = false;
    double rate = 0.0;      // decay rate of the certified envelope
    double alpha = 0.0;     // weighted history integral
    double alpha_error = 0.0; // Richardson estimate of the quadrature error
    double u0_norm = 0.0;
    double prefactor = 0.0; // M (||U0|| + alpha)
};

GlobalCertificate global_certificate(double big_m, double omega, const LipschitzData& lipschitz,
                                     std::span<const DelayTerm> terms,
                                     const HistoryBuffer& history);

// Threshold for the linear-delay model U' = AU + G(U) + k B U(t - tau):
// tau0' = (1/omega) ln((omega/M - gamma) / (k ||B||)), so that
// tau < tau0'  <=>  k ||B|| e^{omega tau} + gamma < omega / M.
struct LinearDelayCertificate {
    bool feasible = false;
    std::string infeasible_reason;
    double tau0 = 0.0;
};

LinearDelayCertificate linear_delay_tau0(double big_m, double omega, double gamma_g, double k,
                                         double norm_b);

// The earlier small-delay test k ||B|| e^{omega tau} + gamma < (e^{omega tau} - 1)/(M tau).
// Implied by tau < tau0' since (e^x - 1)/x >= 1.
bool coarse_delay_condition(double big_m, double omega, double gamma, double k, double norm_b, double tau);

// Small-data certificate for a negative self-adjoint generator: for initial
// data with ||U0||_V < gamma0 K, K <= K0, the solution exists globally and
// ||U(t)||_V <= (K/2) exp(-omega' t / 2).
struct SmallDataCertificate {
    bool feasible = false;
    std::string infeasible_reason;
    double lambda1 = 0.0;
    double c1 = 0.0;
    double k0 = 0.0;
    bool k0_unbounded = false;
    double omega = 0.0;       // 1 - C1/lambda1 - C4(K0)/sqrt(lambda1)
    double omega_prime = 0.0; // min(omega, lambda1 omega), strictly below 2 lambda1 omega
    double c4_at_k0 = 0.0;
    double c_omega_lambda = 0.0;
    double gamma0 = 0.0;
    double data_radius = 0.0; // gamma0 * K0
    double k_cap = 1e6;
};

SmallDataCertificate small_data_certificate(double lambda1, const SmallDataBounds& bounds,
                                            double k_cap = 1e6);

struct Condition {
    std::string id;     // stable condition identifier
    std::string detail; // human-readable statement
    bool satisfied = false;
    double margin = 0.0; // positive slack when satisfied, deficit when not
};

struct AdmissibilityReport {
    std::string scenario;
    std::vector<Condition> conditions;
    std::vector<std::pair<std::string, double>> constants;
    bool all_satisfied() const;
    const Condition* find(const std::string& id) const;
};

enum class BoundaryKind { dirichlet, neumann, robin };

// Dimension and decay admissibility for the scalar delay-diffusion family.
// `reaction_at_zero` probes F(0, y) over sampled y (the f(0,y)=0 condition).
AdmissibilityReport admissibility_diffusion(const DelayTerm& term, const ReactionBounds& bounds,
                                            int dimension, BoundaryKind boundary, double lambda1,
                                            double epsilon);

// Case analysis for the two-species competition system. Cases are numbered by
// boundary pair: 1 = Dirichlet/Robin on both fields, 2 = Dirichlet/Robin on
// field 1 and Neumann on field 2, 3 = the mirror of 2, 4 = Neumann on both.
AdmissibilityReport admissibility_competition(int case_index, const CoeffStats& a1,
                                              const CoeffStats& a2, double mu1, double mu2,
                                              int dimension);

// Shift selection for case 2: eps2 = mu1 - sup a2 - delta, with delta half
// the worst slack of the pointwise constraints. Throws ContractError when the
// case-2 conditions fail. The returned pair satisfies both bracket
// inequalities, which are re-asserted numerically.
struct EpsilonSelection {
    double epsilon = 0.0;
    double delta = 0.0;
};

EpsilonSelection select_epsilon2(const CoeffStats& a1, const CoeffStats& a2, double mu1);
// Mirror construction for case 3 (roles of the fields swapped).
EpsilonSelection select_epsilon1(const CoeffStats& a1, const CoeffStats& a2, double mu2);

} // namespace ddes
