#include "ddes/scenarios.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddes {

void Domain1D::validate() const {
    if (!(length > 0.0)) throw ContractError("domain length must be positive");
    if (!(diffusion > 0.0)) throw ContractError("diffusion coefficient must be positive");
    if (modes < 1) throw ContractError("at least one mode required");
    if (boundary == BoundaryKind::neumann && epsilon < 0.0)
        throw ContractError("Neumann shift must be >= 0");
    if (boundary == BoundaryKind::robin && !(robin_alpha > 0.0))
        throw ContractError("Robin coefficient must be positive");
    if (boundary != BoundaryKind::neumann && epsilon != 0.0)
        throw ContractError("shift applies to Neumann boundaries only");
}

namespace {

constexpr double kPi = std::numbers::pi;

double robin_secular(double mu, double ap, double length) {
    return (ap * ap - mu * mu) * std::sin(mu * length) + 2.0 * ap * mu * std::cos(mu * length);
}

// k-th positive root of the secular equation, bracketed in ((k-1)pi/L, k pi/L).
double robin_root(std::size_t k, double ap, double length) {
    double lo = static_cast<double>(k - 1) * kPi / length;
    double hi = static_cast<double>(k) * kPi / length;
    if (k == 1) lo = 1e-12 / length;
    double flo = robin_secular(lo, ap, length);
    double fhi = robin_secular(hi, ap, length);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw BuildError("Robin eigenvalue bracketing failed for mode " + std::to_string(k));
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double fm = robin_secular(mid, ap, length);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

double robin_mode_norm_sq(double mu, double ap, double length) {
    const double r = ap / mu;
    const double s2 = std::sin(2.0 * mu * length) / (4.0 * mu);
    const double cs = std::sin(mu * length) * std::sin(mu * length) / (2.0 * mu);
    return (length / 2.0 + s2) + 2.0 * r * cs + r * r * (length / 2.0 - s2);
}

linalg::Matrix invert_transform(const linalg::Matrix& e) {
    linalg::Lu f = lu_factor(e);
    if (f.singular) throw BuildError("eigenfunction transform is singular");
    return lu_solve(f, linalg::Matrix::identity(e.rows()));
}

} // namespace

SpectralField build_diffusion_operator(const Domain1D& dom) {
    dom.validate();
    const std::size_t n = dom.modes;
    const double length = dom.length;

    SpectralField field;
    field.op.eigenvalues.resize(n);
    field.nodes.resize(n);
    linalg::Matrix e(n, n);

    switch (dom.boundary) {
    case BoundaryKind::dirichlet: {
        field.op.shift = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            field.nodes[j] = length * static_cast<double>(j + 1) / static_cast<double>(n + 1);
        const double scale = std::sqrt(2.0 / length);
        for (std::size_t k = 0; k < n; ++k) {
            const double mu = static_cast<double>(k + 1) * kPi / length;
            field.op.eigenvalues[k] = dom.diffusion * mu * mu;
            for (std::size_t j = 0; j < n; ++j) e(j, k) = scale * std::sin(mu * field.nodes[j]);
        }
        break;
    }
    case BoundaryKind::neumann: {
        if (!(dom.epsilon > 0.0))
            throw BuildError("Neumann operator needs a positive shift for a stable spectrum");
        field.op.shift = dom.epsilon;
        for (std::size_t j = 0; j < n; ++j)
            field.nodes[j] = length * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double mu = static_cast<double>(k) * kPi / length;
            field.op.eigenvalues[k] = dom.diffusion * mu * mu + dom.epsilon;
            const double scale = (k == 0) ? std::sqrt(1.0 / length) : std::sqrt(2.0 / length);
            for (std::size_t j = 0; j < n; ++j) e(j, k) = scale * std::cos(mu * field.nodes[j]);
        }
        break;
    }
    case BoundaryKind::robin: {
        field.op.shift = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            field.nodes[j] = length * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double mu = robin_root(k + 1, dom.robin_alpha, length);
            field.op.eigenvalues[k] = dom.diffusion * mu * mu;
            const double nrm = std::sqrt(robin_mode_norm_sq(mu, dom.robin_alpha, length));
            for (std::size_t j = 0; j < n; ++j) {
                const double x = field.nodes[j];
                e(j, k) = (std::cos(mu * x) + dom.robin_alpha / mu * std::sin(mu * x)) / nrm;
            }
        }
        break;
    }
    }

    field.op.validate();
    field.to_modal = invert_transform(e);
    field.to_nodal = std::move(e);
    return field;
}

double principal_eigenvalue(const Domain1D& dom) {
    if (dom.boundary == BoundaryKind::neumann)
        throw ContractError("principal eigenvalue is defined for Dirichlet/Robin boundaries");
    if (dom.boundary == BoundaryKind::dirichlet) {
        const double mu = kPi / dom.length;
        return dom.diffusion * mu * mu;
    }
    const double mu = robin_root(1, dom.robin_alpha, dom.length);
    return dom.diffusion * mu * mu;
}

GeneralOperator build_damped_wave(const Domain1D& dom, double a0,
                                  std::vector<linalg::Matrix>* blocks_out) {
    dom.validate();
    if (dom.boundary != BoundaryKind::dirichlet)
        throw ContractError("damped wave scenario uses Dirichlet boundaries");
    if (!(a0 > 0.0)) throw ContractError("damping must be positive");

    const std::size_t n = dom.modes;
    GeneralOperator op{linalg::Matrix(2 * n, 2 * n, 0.0)};
    if (blocks_out) blocks_out->clear();
    for (std::size_t k = 0; k < n; ++k) {
        const double mu_k =
            dom.diffusion * std::pow(static_cast<double>(k + 1) * kPi / dom.length, 2.0);
        const double s = std::sqrt(mu_k);
        linalg::Matrix b(2, 2);
        b(0, 0) = 0.0;
        b(0, 1) = s;
        b(1, 0) = -s;
        b(1, 1) = -a0;
        op.m(2 * k, 2 * k + 1) = s;
        op.m(2 * k + 1, 2 * k) = -s;
        op.m(2 * k + 1, 2 * k + 1) = -a0;
        if (blocks_out) blocks_out->push_back(std::move(b));
    }
    return op;
}

HistoryBuffer Scenario::make_history(double amplitude, double dt, Interp mode) const {
    std::vector<double> profile(system.dim(), 0.0);
    for (std::size_t f = 0; f < system.field_count(); ++f)
        profile[system.field_offset(f)] = amplitude;
    const double span = tau_max > 0.0 ? tau_max : dt;
    return history_constant(system.dim(), span, dt, profile, mode);
}

double Scenario::history_vnorm_per_amplitude() const {
    if (!system.is_spectral()) return std::sqrt(static_cast<double>(system.field_count()));
    double sum = 0.0;
    for (const SpectralField& f : system.fields()) sum += f.op.lambda1();
    return std::sqrt(sum);
}

double auto_epsilon(double relevant_sup) {
    if (!(relevant_sup < 0.0))
        throw ConfigError("epsilon = auto needs a strictly negative reaction sup");
    return 1.5 * (-relevant_sup);
}

namespace {

double embedding_constant(double length, double lambda1, double diffusion) {
    // 1-D Agmon bound ||u||_inf^2 <= ||u||^2 / L + 2 ||u|| ||u'||, combined with
    // ||u|| <= ||u||_V / sqrt(lambda1) and ||u'|| <= ||u||_V / sqrt(d).
    return std::sqrt(1.0 / (length * lambda1) + 2.0 / std::sqrt(lambda1 * diffusion));
}

double sup_abs_shifted(const Coefficient& c, double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s = std::max(s, std::abs(c.at(i) + shift));
    return s;
}

Coefficient shift_coefficient(const Coefficient& c, double shift) {
    if (shift == 0.0) return c;
    std::vector<double> vals(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) vals[i] = c.at(i) + shift;
    return vals.size() == 1 ? Coefficient(vals[0]) : Coefficient(std::move(vals));
}

Scenario scalar_diffusion_base(const Domain1D& dom, std::string name) {
    Scenario sc;
    sc.name = std::move(name);
    SpectralField field = build_diffusion_operator(dom);
    sc.lambda1 = field.op.lambda1();
    sc.big_m = 1.0;
    sc.omega = sc.lambda1;
    sc.epsilon = dom.boundary == BoundaryKind::neumann ? dom.epsilon : 0.0;
    sc.boundary = dom.boundary;
    sc.embedding_const = embedding_constant(dom.length, sc.lambda1, dom.diffusion);
    sc.system = System::spectral({std::move(field)});
    return sc;
}

void set_delays(Scenario& sc) {
    sc.tau_max = 0.0;
    sc.tau_min = std::numeric_limits<double>::infinity();
    for (const DelayTerm& t : sc.terms) {
        sc.tau_max = std::max(sc.tau_max, t.delay);
        sc.tau_min = std::min(sc.tau_min, t.delay);
    }
    if (sc.terms.empty()) sc.tau_min = 0.0;
}

} // namespace

Scenario logistic_scenario(const Domain1D& dom, const Coefficient& a, const Coefficient& b,
                           const Coefficient& c, double tau) {
    Scenario sc = scalar_diffusion_base(dom, "logistic");
    const double eps = sc.epsilon;

    DelayTerm term;
    term.delay = tau;
    term.rule = LogisticDelay{a, b, c, eps};
    term.lipschitz_gamma = a.sup_abs();
    term.gamma_is_global = (b.sup_abs() == 0.0 && c.sup_abs() == 0.0);
    sc.terms.push_back(std::move(term));
    set_delays(sc);

    const double alpha0 = sup_abs_shifted(a, eps);
    sc.reaction_bounds = ReactionBounds{alpha0,
                                        {b.sup_abs() + c.sup_abs()},
                                        {c.sup_abs()}};

    const double kappa = sc.embedding_const / std::sqrt(sc.lambda1);
    std::vector<MultiPoly::Monomial> ms;
    if (b.sup_abs() > 0.0) ms.push_back({kappa * b.sup_abs(), {1, 0}});
    if (c.sup_abs() > 0.0) ms.push_back({kappa * c.sup_abs(), {0, 1}});
    sc.small_bounds = SmallDataBounds{alpha0, MultiPoly(2, std::move(ms))};
    return sc;
}

Scenario hutchinson_scenario(const Domain1D& dom, double alpha, double tau) {
    Scenario sc = logistic_scenario(dom, Coefficient(alpha), Coefficient(0.0),
                                    Coefficient(-alpha), tau);
    sc.name = "hutchinson";
    return sc;
}

Scenario modified_hutchinson_scenario(const Domain1D& dom, double alpha, double beta, double gamma,
                                      double delta, double tau) {
    Scenario sc = scalar_diffusion_base(dom, "modified_hutchinson");
    const double eps = sc.epsilon;

    DelayTerm term;
    term.delay = tau;
    term.rule = ModifiedHutchinson{alpha, beta, gamma, delta, eps};
    term.lipschitz_gamma = std::abs(alpha);
    term.gamma_is_global = (beta == 0.0 && gamma == 0.0 && delta == 0.0);
    sc.terms.push_back(std::move(term));
    set_delays(sc);

    const double aa = std::abs(alpha);
    const double alpha0 = std::abs(alpha + eps);
    sc.reaction_bounds = ReactionBounds{
        alpha0,
        {aa * std::abs(beta), aa * std::abs(gamma), aa * std::abs(delta)},
        {aa * std::abs(beta), 2.0 * aa * std::abs(gamma), 3.0 * aa * std::abs(delta)}};

    const double ce = sc.embedding_const;
    const double inv_sqrt = 1.0 / std::sqrt(sc.lambda1);
    std::vector<MultiPoly::Monomial> ms;
    if (beta != 0.0) ms.push_back({aa * std::abs(beta) * ce * inv_sqrt, {0, 1}});
    if (gamma != 0.0) ms.push_back({aa * std::abs(gamma) * ce * ce * inv_sqrt, {0, 2}});
    if (delta != 0.0) ms.push_back({aa * std::abs(delta) * ce * ce * ce * inv_sqrt, {0, 3}});
    sc.small_bounds = SmallDataBounds{alpha0, MultiPoly(2, std::move(ms))};
    return sc;
}

Scenario cubic_scenario(const Domain1D& dom, double tau) {
    if (dom.boundary == BoundaryKind::neumann)
        throw ConfigError("cubic scenario requires Dirichlet or Robin boundaries");
    Scenario sc = scalar_diffusion_base(dom, "cubic");

    DelayTerm term;
    term.delay = tau;
    term.rule = CubicDelay{};
    sc.terms.push_back(std::move(term));
    set_delays(sc);

    sc.reaction_bounds = ReactionBounds{0.0, {0.0, 1.0}, {0.0, 1.0}};
    const double ce = sc.embedding_const;
    sc.small_bounds = SmallDataBounds{
        0.0, MultiPoly(2, {{ce * ce / std::sqrt(sc.lambda1), {1, 1}}})};
    return sc;
}

Scenario competition_scenario(const CompetitionSpec& spec) {
    Domain1D d1 = spec.field1;
    Domain1D d2 = spec.field2;

    int case_index = spec.case_index;
    const bool neu1 = d1.boundary == BoundaryKind::neumann;
    const bool neu2 = d2.boundary == BoundaryKind::neumann;
    const int derived = (!neu1 && !neu2) ? 1 : (!neu1 && neu2) ? 2 : (neu1 && !neu2) ? 3 : 4;
    if (case_index == 0) case_index = derived;
    if (case_index != derived)
        throw ConfigError("competition case index inconsistent with the boundary pair");

    Scenario sc;
    sc.name = "competition";
    Scenario::CompetitionMeta meta;
    meta.case_index = case_index;
    meta.a1 = stats(spec.a1);
    meta.a2 = stats(spec.a2);
    meta.mu1 = neu1 ? 0.0 : principal_eigenvalue(d1);
    meta.mu2 = neu2 ? 0.0 : principal_eigenvalue(d2);

    double eps1 = 0.0, eps2 = 0.0;
    switch (case_index) {
    case 1:
        break;
    case 2:
        if (spec.epsilon) {
            eps2 = *spec.epsilon;
        } else {
            const EpsilonSelection sel = select_epsilon2(meta.a1, meta.a2, meta.mu1);
            eps2 = sel.epsilon;
            meta.delta = sel.delta;
        }
        break;
    case 3:
        if (spec.epsilon) {
            eps1 = *spec.epsilon;
        } else {
            const EpsilonSelection sel = select_epsilon1(meta.a1, meta.a2, meta.mu2);
            eps1 = sel.epsilon;
            meta.delta = sel.delta;
        }
        break;
    case 4:
        if (spec.epsilon) {
            eps1 = eps2 = *spec.epsilon;
        } else {
            const double worst = std::min(meta.a1.inf, meta.a2.inf);
            if (!(worst < 0.0))
                throw ConfigError("competition case 4 needs epsilon or negative growth rates");
            eps1 = eps2 = -worst;
        }
        break;
    }
    meta.epsilon1 = eps1;
    meta.epsilon2 = eps2;
    d1.epsilon = neu1 ? eps1 : 0.0;
    d2.epsilon = neu2 ? eps2 : 0.0;
    if (neu1 && !(d1.epsilon > 0.0))
        throw ConfigError("competition case with Neumann field 1 needs a positive shift");
    if (neu2 && !(d2.epsilon > 0.0))
        throw ConfigError("competition case with Neumann field 2 needs a positive shift");

    SpectralField f1 = build_diffusion_operator(d1);
    SpectralField f2 = build_diffusion_operator(d2);
    const double l1 = f1.op.lambda1();
    const double l2 = f2.op.lambda1();
    sc.lambda1 = std::min(l1, l2);
    sc.big_m = 1.0;
    sc.omega = sc.lambda1;
    sc.embedding_const = std::max(embedding_constant(d1.length, l1, d1.diffusion),
                                  embedding_constant(d2.length, l2, d2.diffusion));
    sc.system = System::spectral({std::move(f1), std::move(f2)});

    // Term split: the field-1 piece carries the larger of tau11/tau12 together
    // with the linear and self-interaction parts; the remaining couplings form
    // their own terms.
    const bool first_coupling_11 = spec.tau11 >= spec.tau12;
    DelayTerm t1;
    t1.target_field = 0;
    t1.delay = first_coupling_11 ? spec.tau11 : spec.tau12;
    t1.rule = CompetitionCoupling{shift_coefficient(spec.a1, eps1), spec.a11,
                                  first_coupling_11 ? spec.ap11 : spec.ap12,
                                  first_coupling_11 ? std::size_t{0} : std::size_t{1}};
    sc.terms.push_back(t1);

    DelayTerm t2;
    t2.target_field = 1;
    t2.delay = spec.tau21;
    t2.rule = CompetitionCoupling{shift_coefficient(spec.a2, eps2), spec.a22, spec.ap21, 0};
    sc.terms.push_back(t2);

    DelayTerm t3;
    t3.target_field = 0;
    t3.delay = first_coupling_11 ? spec.tau12 : spec.tau11;
    t3.rule = CompetitionCoupling{Coefficient(0.0), Coefficient(0.0),
                                  first_coupling_11 ? spec.ap12 : spec.ap11,
                                  first_coupling_11 ? std::size_t{1} : std::size_t{0}};
    sc.terms.push_back(t3);

    DelayTerm t4;
    t4.target_field = 1;
    t4.delay = spec.tau22;
    t4.rule = CompetitionCoupling{Coefficient(0.0), Coefficient(0.0), spec.ap22, 1};
    sc.terms.push_back(t4);
    set_delays(sc);

    const double c1 = std::max(sup_abs_shifted(spec.a1, eps1), sup_abs_shifted(spec.a2, eps2));
    const double quad_sum = spec.a11.sup_abs() + spec.a22.sup_abs();
    const double coup_sum = spec.ap11.sup_abs() + spec.ap12.sup_abs() + spec.ap21.sup_abs() +
                            spec.ap22.sup_abs();
    sc.reaction_bounds = ReactionBounds{c1, {quad_sum + coup_sum}, {coup_sum}};

    const double kappa = sc.embedding_const / std::sqrt(sc.lambda1);
    std::vector<MultiPoly::Monomial> ms;
    if (quad_sum > 0.0) ms.push_back({kappa * quad_sum, {1, 0, 0, 0, 0}});
    const double coup_abs[4] = {
        std::get<CompetitionCoupling>(sc.terms[0].rule).coup.sup_abs(),
        std::get<CompetitionCoupling>(sc.terms[1].rule).coup.sup_abs(),
        std::get<CompetitionCoupling>(sc.terms[2].rule).coup.sup_abs(),
        std::get<CompetitionCoupling>(sc.terms[3].rule).coup.sup_abs()};
    for (std::size_t t = 0; t < 4; ++t) {
        if (coup_abs[t] == 0.0) continue;
        std::vector<unsigned> deg(5, 0);
        deg[t + 1] = 1;
        ms.push_back({kappa * coup_abs[t], std::move(deg)});
    }
    sc.small_bounds = SmallDataBounds{c1, MultiPoly(5, std::move(ms))};
    sc.competition = std::move(meta);
    return sc;
}

Scenario damped_wave_scenario(const Domain1D& dom, double a0) {
    Scenario sc;
    sc.name = "damped_wave";
    GeneralOperator op = build_damped_wave(dom, a0, &sc.wave_blocks);
    sc.system = System::general(std::move(op));
    sc.tau_max = 0.0;
    sc.tau_min = 0.0;
    sc.big_m = 1.0; // placeholder until the envelope fit runs
    sc.omega = 0.0;
    return sc;
}

} // namespace ddes
