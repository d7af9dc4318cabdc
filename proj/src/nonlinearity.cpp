#include "ddes/nonlinearity.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ddes {

Coefficient::Coefficient(std::vector<double> nodal) : values_(std::move(nodal)) {
    if (values_.empty()) throw ContractError("nodal coefficient must not be empty");
    for (double v : values_)
        if (!std::isfinite(v)) throw ContractError("coefficient values must be finite");
}

double Coefficient::sup() const { return *std::max_element(values_.begin(), values_.end()); }

double Coefficient::inf() const { return *std::min_element(values_.begin(), values_.end()); }

double Coefficient::sup_abs() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

CoeffStats stats(const Coefficient& c) { return {c.sup(), c.inf(), c.sup_abs()}; }

TermKind DelayTerm::kind() const {
    switch (rule.index()) {
    case 0: return TermKind::affine_gate;
    case 1: return TermKind::logistic_delay;
    case 2: return TermKind::modified_hutchinson;
    case 3: return TermKind::cubic_delay;
    case 4: return TermKind::globally_lipschitz_scalar;
    default: return TermKind::competition_coupling;
    }
}

const char* kind_name(TermKind k) {
    switch (k) {
    case TermKind::affine_gate: return "affine_gate";
    case TermKind::logistic_delay: return "logistic_delay";
    case TermKind::modified_hutchinson: return "modified_hutchinson";
    case TermKind::cubic_delay: return "cubic_delay";
    case TermKind::globally_lipschitz_scalar: return "globally_lipschitz_scalar";
    case TermKind::competition_coupling: return "competition_coupling";
    }
    return "unknown";
}

void DelayTerm::validate() const {
    if (!(delay > 0.0) || !std::isfinite(delay)) throw ContractError("delay must be positive");
    if (lipschitz_gamma && (!(*lipschitz_gamma >= 0.0) || !std::isfinite(*lipschitz_gamma)))
        throw ContractError("declared Lipschitz constant must be >= 0");
    const TermKind k = kind();
    if (k == TermKind::globally_lipschitz_scalar || k == TermKind::affine_gate) {
        // F(0,0) = 0 by construction; evaluate once to enforce it.
        std::vector<double> zero{0.0};
        const std::vector<double> val = eval_term(*this, zero, zero);
        if (std::abs(val[0]) != 0.0) throw ContractError("globally Lipschitz term must vanish at zero");
    }
}

namespace {

void check_grid(std::span<const std::span<const double>> u,
                std::span<const std::span<const double>> v,
                std::span<const std::span<double>> out, std::size_t target,
                std::size_t delayed) {
    if (u.size() != v.size() || u.size() != out.size())
        throw ContractError("field count mismatch in eval_term");
    if (target >= u.size() || delayed >= u.size())
        throw ContractError("term field index out of range");
    for (std::size_t f = 0; f < u.size(); ++f) {
        if (u[f].size() != v[f].size() || u[f].size() != out[f].size())
            throw ContractError("grid length mismatch in eval_term");
    }
}

} // namespace

void eval_term(const DelayTerm& term, std::span<const std::span<const double>> u,
               std::span<const std::span<const double>> v,
               std::span<const std::span<double>> out) {
    const std::size_t tf = term.target_field;
    std::size_t df = tf;
    if (const auto* cc = std::get_if<CompetitionCoupling>(&term.rule)) df = cc->delayed_field;
    check_grid(u, v, out, tf, df);

    std::span<const double> x = u[tf];
    std::span<double> o = out[tf];
    const std::size_t n = x.size();

    switch (term.kind()) {
    case TermKind::affine_gate: {
        const auto& r = std::get<AffineGate>(term.rule);
        std::span<const double> y = v[tf];
        for (std::size_t i = 0; i < n; ++i) o[i] += r.p * x[i] + r.q * y[i];
        break;
    }
    case TermKind::logistic_delay: {
        const auto& r = std::get<LogisticDelay>(term.rule);
        std::span<const double> y = v[tf];
        for (std::size_t i = 0; i < n; ++i) {
            o[i] += (r.a.at(i) + r.shift) * x[i] - r.b.at(i) * x[i] * x[i] +
                    r.c.at(i) * x[i] * y[i];
        }
        break;
    }
    case TermKind::modified_hutchinson: {
        const auto& r = std::get<ModifiedHutchinson>(term.rule);
        std::span<const double> y = v[tf];
        for (std::size_t i = 0; i < n; ++i) {
            const double yy = y[i];
            o[i] += r.alpha * x[i] * (1.0 + yy * (r.beta + yy * (r.gamma + yy * r.delta))) +
                    r.shift * x[i];
        }
        break;
    }
    case TermKind::cubic_delay: {
        std::span<const double> y = v[tf];
        for (std::size_t i = 0; i < n; ++i) o[i] += -x[i] * x[i] * y[i];
        break;
    }
    case TermKind::globally_lipschitz_scalar: {
        const auto& r = std::get<LipschitzSine>(term.rule);
        std::span<const double> y = v[tf];
        for (std::size_t i = 0; i < n; ++i) o[i] += r.cx * std::sin(x[i]) + r.cy * std::sin(y[i]);
        break;
    }
    case TermKind::competition_coupling: {
        const auto& r = std::get<CompetitionCoupling>(term.rule);
        std::span<const double> y = v[r.delayed_field];
        for (std::size_t i = 0; i < n; ++i)
            o[i] += (r.lin.at(i) + r.quad.at(i) * x[i] + r.coup.at(i) * y[i]) * x[i];
        break;
    }
    }
}

std::vector<double> eval_term(const DelayTerm& term, std::span<const double> u,
                              std::span<const double> v) {
    if (u.size() != v.size()) throw ContractError("grid length mismatch in eval_term");
    std::vector<double> out(u.size(), 0.0);
    const std::span<const double> us[] = {u};
    const std::span<const double> vs[] = {v};
    const std::span<double> os[] = {std::span<double>(out)};
    eval_term(term, us, vs, os);
    return out;
}

LipschitzData lipschitz_sum(std::span<const DelayTerm> terms) {
    LipschitzData data;
    for (const DelayTerm& t : terms) {
        if (!t.lipschitz_gamma) throw ContractError("not globally Lipschitz");
        data.gamma_i.push_back(*t.lipschitz_gamma);
        data.gamma += *t.lipschitz_gamma;
        data.all_global = data.all_global && t.gamma_is_global;
    }
    return data;
}

MultiPoly::MultiPoly(std::size_t arity, std::vector<Monomial> monomials)
    : arity_(arity), monomials_(std::move(monomials)) {
    if (arity_ == 0) throw ContractError("polynomial arity must be >= 1");
    for (const Monomial& m : monomials_) {
        if (!(m.coeff >= 0.0) || !std::isfinite(m.coeff))
            throw ContractError("polynomial coefficients must be non-negative and finite");
        if (m.degrees.size() != arity_) throw ContractError("monomial arity mismatch");
        unsigned total = 0;
        for (unsigned d : m.degrees) total += d;
        if (total == 0 && m.coeff != 0.0)
            throw ContractError("polynomial must have zero constant term");
    }
}

MultiPoly MultiPoly::zero(std::size_t arity) { return MultiPoly(arity, {}); }

MultiPoly MultiPoly::from_univariate(std::span<const double> coeffs) {
    std::vector<Monomial> ms;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j] == 0.0) continue;
        ms.push_back({coeffs[j], {static_cast<unsigned>(j + 1)}});
    }
    return MultiPoly(1, std::move(ms));
}

double MultiPoly::eval(std::span<const double> x) const {
    if (x.size() != arity_) throw ContractError("polynomial arity mismatch");
    double sum = 0.0;
    for (const Monomial& m : monomials_) {
        double term = m.coeff;
        for (std::size_t i = 0; i < arity_; ++i)
            for (unsigned d = 0; d < m.degrees[i]; ++d) term *= x[i];
        sum += term;
    }
    return sum;
}

double MultiPoly::corner(double k) const {
    double sum = 0.0;
    for (const Monomial& m : monomials_) {
        unsigned total = 0;
        for (unsigned d : m.degrees) total += d;
        sum += m.coeff * std::pow(k, static_cast<double>(total));
    }
    return sum;
}

double corner_bound(const MultiPoly& poly, double k) {
    if (!(k >= 0.0)) throw ContractError("corner_bound requires K >= 0");
    return poly.corner(k);
}

double corner_bound(const SmallDataBounds& bounds, double k) { return corner_bound(bounds.h3, k); }

} // namespace ddes
