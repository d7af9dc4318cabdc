#include "ddes/certificates.hpp"

#include "ddes/errors.hpp"
#include "ddes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddes {

namespace {

double state_norm(const HistoryBuffer& history, double t, std::vector<double>& scratch) {
    history.sample(t, scratch);
    return std::sqrt(kernels::sum_sq(scratch.data(), scratch.size()));
}

// Composite Simpson of e^{omega s} ||U(s - tau)|| over [0, tau].
double history_integral(const HistoryBuffer& history, double omega, double tau,
                        std::size_t subintervals, std::vector<double>& scratch) {
    const std::size_t m = subintervals + (subintervals % 2); // even
    const double dt = tau / static_cast<double>(m);
    double sum = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const double s = dt * static_cast<double>(j);
        const double g = std::exp(omega * s) * state_norm(history, s - tau, scratch);
        const double w = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        sum += w * g;
    }
    return sum * dt / 3.0;
}

} // namespace

GlobalCertificate global_certificate(double big_m, double omega, const LipschitzData& lipschitz,
                                     std::span<const DelayTerm> terms,
                                     const HistoryBuffer& history) {
    if (!(big_m >= 1.0)) throw ContractError("M must be >= 1");
    if (!(omega > 0.0)) throw ContractError("omega must be positive");
    if (lipschitz.gamma_i.size() != terms.size())
        throw ContractError("one Lipschitz constant per term required");

    GlobalCertificate cert;
    cert.big_m = big_m;
    cert.omega = omega;
    cert.gamma = lipschitz.gamma;
    cert.gamma_is_global = lipschitz.all_global;

    double tau = 0.0;
    for (const DelayTerm& t : terms) tau = std::max(tau, t.delay);
    cert.tau = tau;

    std::vector<double> scratch(history.dim());
    cert.u0_norm = state_norm(history, 0.0, scratch);

    // alpha = sum_i gamma_i int_0^{tau_i} e^{omega s} ||U(s - tau_i)|| ds,
    // by composite Simpson with a Richardson error estimate.
    double alpha = 0.0, alpha_coarse = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double g = lipschitz.gamma_i[i];
        if (g == 0.0) continue;
        alpha_coarse += g * history_integral(history, omega, terms[i].delay, 256, scratch);
        alpha += g * history_integral(history, omega, terms[i].delay, 512, scratch);
    }
    cert.alpha = alpha;
    cert.alpha_error = std::abs(alpha - alpha_coarse) / 15.0;
    cert.prefactor = big_m * (cert.u0_norm + cert.alpha);

    if (lipschitz.gamma == 0.0) {
        cert.feasible = true;
        cert.tau0 = std::numeric_limits<double>::infinity();
        cert.tau0_infinite = true;
        cert.rate = omega;
        return cert;
    }

    const double ratio = omega / (big_m * lipschitz.gamma);
    cert.rate = omega - big_m * lipschitz.gamma * (1.0 + std::exp(omega * tau));
    if (lipschitz.gamma > omega / (2.0 * big_m)) {
        cert.feasible = false;
        cert.infeasible_reason = "gamma >= omega / (2M)";
        cert.tau0 = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }

    // At the exact boundary gamma = omega/(2M) the threshold collapses to 0.
    cert.tau0 = std::log(ratio - 1.0) / omega;
    cert.feasible = tau < cert.tau0;
    if (!cert.feasible)
        cert.infeasible_reason = cert.tau0 > 0.0 ? "tau >= tau0" : "gamma at the omega/(2M) boundary";
    return cert;
}

LinearDelayCertificate linear_delay_tau0(double big_m, double omega, double gamma_g, double k,
                                         double norm_b) {
    if (!(big_m >= 1.0)) throw ContractError("M must be >= 1");
    if (!(omega > 0.0)) throw ContractError("omega must be positive");
    if (!(gamma_g >= 0.0)) throw ContractError("gamma must be >= 0");
    if (!(k * norm_b > 0.0)) throw ContractError("k ||B|| must be positive");

    LinearDelayCertificate cert;
    if (!(omega / big_m > gamma_g)) {
        cert.feasible = false;
        cert.infeasible_reason = "omega / M <= gamma";
        cert.tau0 = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    cert.feasible = true;
    cert.tau0 = std::log((omega / big_m - gamma_g) / (k * norm_b)) / omega;
    return cert;
}

bool coarse_delay_condition(double big_m, double omega, double gamma, double k, double norm_b, double tau) {
    if (!(tau > 0.0)) throw ContractError("tau must be positive");
    const double lhs = k * norm_b * std::exp(omega * tau) + gamma;
    const double rhs = std::expm1(omega * tau) / (big_m * tau);
    return lhs < rhs;
}

SmallDataCertificate small_data_certificate(double lambda1, const SmallDataBounds& bounds,
                                            double k_cap) {
    if (!(lambda1 > 0.0)) throw ContractError("lambda1 must be positive");
    if (!(bounds.c1 >= 0.0)) throw ContractError("C1 must be >= 0");
    if (!(k_cap > 0.0)) throw ContractError("K cap must be positive");

    SmallDataCertificate cert;
    cert.lambda1 = lambda1;
    cert.c1 = bounds.c1;
    cert.k_cap = k_cap;

    if (!(bounds.c1 / lambda1 < 1.0)) {
        cert.feasible = false;
        cert.infeasible_reason = "C1 >= lambda1";
        return cert;
    }
    cert.feasible = true;

    const double sqrt_l1 = std::sqrt(lambda1);
    const double target = 0.5 * (1.0 - bounds.c1 / lambda1);
    auto excess = [&](double k) { return corner_bound(bounds, k) / sqrt_l1 - target; };

    // Largest K with C4(K)/sqrt(lambda1) <= target; C4 is non-decreasing.
    double k0;
    if (excess(k_cap) <= 0.0) {
        k0 = k_cap;
        cert.k0_unbounded = true;
    } else {
        double lo = 0.0, hi = k_cap;
        while (hi - lo > 1e-6 * std::max(hi, 1e-300)) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) <= 0.0 ? lo : hi) = mid;
        }
        k0 = lo;
    }
    cert.k0 = k0;
    cert.c4_at_k0 = corner_bound(bounds, k0);

    cert.omega = 1.0 - bounds.c1 / lambda1 - cert.c4_at_k0 / sqrt_l1;
    cert.omega_prime = std::min(cert.omega, lambda1 * cert.omega);
    // omega' must sit strictly below 2 lambda1 omega; the min() choice always
    // does, but keep the guard for degenerate rounding.
    if (!(cert.omega_prime < 2.0 * lambda1 * cert.omega)) cert.omega_prime *= 0.999;

    cert.c_omega_lambda =
        (1.0 + cert.omega / (2.0 * lambda1 * cert.omega - cert.omega_prime)) /
        (2.0 * cert.omega_prime * lambda1);

    const double coupling = cert.omega_prime +
                            std::pow(bounds.c1 / sqrt_l1 + cert.c4_at_k0, 2.0);
    const double gamma0_sq_inv = 4.0 * (1.0 + coupling * cert.c_omega_lambda);
    cert.gamma0 = 1.0 / std::sqrt(gamma0_sq_inv);
    cert.data_radius = cert.gamma0 * cert.k0;
    return cert;
}

bool AdmissibilityReport::all_satisfied() const {
    for (const Condition& c : conditions)
        if (!c.satisfied) return false;
    return true;
}

const Condition* AdmissibilityReport::find(const std::string& id) const {
    for (const Condition& c : conditions)
        if (c.id == id) return &c;
    return nullptr;
}

namespace {

Condition strict_less(std::string id, std::string detail, double lhs, double rhs) {
    return {std::move(id), std::move(detail), lhs < rhs, rhs - lhs};
}

int max_admissible_dimension(std::size_t n1, std::size_t n2) {
    const double up1 = 2.0 * (1.0 + 1.0 / static_cast<double>(n1));
    const double up2 = 2.0 * (1.0 + 1.0 / static_cast<double>(n2));
    int best = 0;
    for (int d = 1; d <= 16; ++d) {
        if (static_cast<double>(d) <= up1 && static_cast<double>(d) < up2) best = d;
    }
    return best;
}

} // namespace

AdmissibilityReport admissibility_diffusion(const DelayTerm& term, const ReactionBounds& bounds,
                                            int dimension, BoundaryKind boundary, double lambda1,
                                            double epsilon) {
    if (dimension < 1) throw ContractError("dimension must be >= 1");
    AdmissibilityReport rep;
    rep.scenario = kind_name(term.kind());

    const double d = static_cast<double>(dimension);
    const double up1 = 2.0 * (1.0 + 1.0 / static_cast<double>(bounds.n1()));
    const double up2 = 2.0 * (1.0 + 1.0 / static_cast<double>(bounds.n2()));
    rep.conditions.push_back(
        {"dim_upper", "d <= 2(1 + 1/n1)", d <= up1, up1 - d});
    rep.conditions.push_back(strict_less("dim_strict", "d < 2(1 + 1/n2)", d, up2));

    // F(0, y) must vanish for all y: probe the shifted reaction at x = 0.
    double worst = 0.0;
    for (int j = -8; j <= 8; ++j) {
        const double y = 0.25 * static_cast<double>(j);
        const std::vector<double> val = eval_term(term, std::vector<double>{0.0},
                                                  std::vector<double>{y});
        worst = std::max(worst, std::abs(val[0]));
    }
    rep.conditions.push_back(
        {"reaction_vanishes_at_zero", "F(0, y) = 0 for all y", worst == 0.0, -worst});

    if (boundary == BoundaryKind::neumann) {
        rep.conditions.push_back(
            strict_less("decay_margin", "alpha0 < epsilon", bounds.alpha0, epsilon));
    } else {
        rep.conditions.push_back(
            strict_less("decay_margin", "alpha0 < lambda1", bounds.alpha0, lambda1));
    }

    rep.constants = {{"lambda1", lambda1},
                     {"epsilon", epsilon},
                     {"alpha0", bounds.alpha0},
                     {"n1", static_cast<double>(bounds.n1())},
                     {"n2", static_cast<double>(bounds.n2())},
                     {"dimension", d},
                     {"max_dimension",
                      static_cast<double>(max_admissible_dimension(bounds.n1(), bounds.n2()))}};
    return rep;
}

AdmissibilityReport admissibility_competition(int case_index, const CoeffStats& a1,
                                              const CoeffStats& a2, double mu1, double mu2,
                                              int dimension) {
    if (case_index < 1 || case_index > 4) throw ContractError("competition case must be 1..4");
    AdmissibilityReport rep;
    rep.scenario = "competition_case_" + std::to_string(case_index);

    rep.conditions.push_back(
        {"dim_upper", "d <= 3", dimension <= 3, 3.0 - static_cast<double>(dimension)});

    switch (case_index) {
    case 1: { // Dirichlet/Robin on both fields: sup |a_i| < lambda1 = min(mu1, mu2)
        const double lambda1 = std::min(mu1, mu2);
        rep.conditions.push_back(
            strict_less("field1_amplitude", "sup |a1| < lambda1", a1.sup_abs, lambda1));
        rep.conditions.push_back(
            strict_less("field2_amplitude", "sup |a2| < lambda1", a2.sup_abs, lambda1));
        rep.constants.push_back({"lambda1", lambda1});
        break;
    }
    case 2: { // Dirichlet/Robin on field 1, Neumann on field 2
        rep.conditions.push_back(
            strict_less("field1_amplitude", "sup |a1| < mu1", a1.sup_abs, mu1));
        rep.conditions.push_back(strict_less("field2_negative", "sup a2 < 0", a2.sup, 0.0));
        rep.conditions.push_back(strict_less("field2_spread", "2 sup a2 - inf a2 < 2 mu1",
                                             2.0 * a2.sup - a2.inf, 2.0 * mu1));
        if (rep.all_satisfied()) {
            const EpsilonSelection sel = select_epsilon2(a1, a2, mu1);
            rep.constants.push_back({"epsilon2", sel.epsilon});
            rep.constants.push_back({"delta", sel.delta});
            rep.constants.push_back({"lambda1", std::min(mu1, sel.epsilon)});
        }
        break;
    }
    case 3: { // Neumann on field 1, Dirichlet/Robin on field 2
        rep.conditions.push_back(
            strict_less("field2_amplitude", "sup |a2| < mu2", a2.sup_abs, mu2));
        rep.conditions.push_back(strict_less("field1_negative", "sup a1 < 0", a1.sup, 0.0));
        rep.conditions.push_back(strict_less("field1_spread", "2 sup a1 - inf a1 < 2 mu2",
                                             2.0 * a1.sup - a1.inf, 2.0 * mu2));
        if (rep.all_satisfied()) {
            const EpsilonSelection sel = select_epsilon1(a1, a2, mu2);
            rep.constants.push_back({"epsilon1", sel.epsilon});
            rep.constants.push_back({"delta", sel.delta});
            rep.constants.push_back({"lambda1", std::min(mu2, sel.epsilon)});
        }
        break;
    }
    case 4: { // Neumann on both fields: strict negativity
        rep.conditions.push_back(strict_less("field1_negative", "sup a1 < 0", a1.sup, 0.0));
        rep.conditions.push_back(strict_less("field2_negative", "sup a2 < 0", a2.sup, 0.0));
        break;
    }
    }

    rep.constants.push_back({"mu1", mu1});
    rep.constants.push_back({"mu2", mu2});
    rep.constants.push_back({"dimension", static_cast<double>(dimension)});
    return rep;
}

EpsilonSelection select_epsilon2(const CoeffStats& a1, const CoeffStats& a2, double mu1) {
    if (!(a1.sup_abs < mu1) || !(a2.sup < 0.0) || !(2.0 * a2.sup - a2.inf < 2.0 * mu1))
        throw ContractError("case-2 conditions violated");

    // Slacks of the strict constraints the shift must respect. The last entry
    // is the pointwise pairing of the bracket's lower and upper envelopes,
    // which binds only for spatially varying a2.
    const double slacks[] = {mu1 + a1.inf, mu1 - a1.sup, -a2.sup,
                             (2.0 * mu1 - 2.0 * a2.sup + a2.inf) / 3.0,
                             2.0 * mu1 - (a2.sup - a2.inf)};
    double delta = slacks[0];
    for (double s : slacks) delta = std::min(delta, s);
    delta *= 0.5;
    if (!(delta > 0.0)) throw ContractError("case-2 conditions violated");

    EpsilonSelection sel;
    sel.delta = delta;
    sel.epsilon = mu1 - a2.sup - delta;

    // Re-assert the bracket numerically.
    const double lower = std::max({a1.sup + delta, -a1.inf + delta, (delta - a2.inf) / 2.0,
                                   -a2.inf - mu1 + delta});
    const double upper = mu1 - delta - a2.sup;
    const double tol = 1e-12 * std::max({1.0, std::abs(lower), std::abs(upper)});
    if (!(sel.epsilon > 0.0) || lower > sel.epsilon + tol || sel.epsilon > upper + tol)
        throw ContractError("case-2 shift bracket violated");
    return sel;
}

EpsilonSelection select_epsilon1(const CoeffStats& a1, const CoeffStats& a2, double mu2) {
    if (!(a2.sup_abs < mu2) || !(a1.sup < 0.0) || !(2.0 * a1.sup - a1.inf < 2.0 * mu2))
        throw ContractError("case-3 conditions violated");
    // Symmetric to case 2 with the fields swapped.
    EpsilonSelection sel = select_epsilon2(a2, a1, mu2);
    return sel;
}

} // namespace ddes
