#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ddes {

// Reaction coefficient: a single constant or one value per grid node.
class Coefficient {
public:
    Coefficient() : values_{0.0} {}
    Coefficient(double constant) : values_{constant} {}
    explicit Coefficient(std::vector<double> nodal);

    bool is_constant() const { return values_.size() == 1; }
    std::size_t size() const { return values_.size(); }
    double at(std::size_t node) const { return values_.size() == 1 ? values_[0] : values_[node]; }

    double sup() const;
    double inf() const;
    double sup_abs() const;

private:
    std::vector<double> values_;
};

struct CoeffStats {
    double sup = 0.0;
    double inf = 0.0;
    double sup_abs = 0.0;
};

CoeffStats stats(const Coefficient& c);

enum class TermKind {
    affine_gate,
    logistic_delay,
    modified_hutchinson,
    cubic_delay,
    globally_lipschitz_scalar,
    competition_coupling,
};

// F(x, y) = p x + q y
struct AffineGate {
    double p = 0.0, q = 0.0;
};

// F(x, y) = (a + shift) x - b x^2 + c x y; shift holds the Neumann epsilon.
struct LogisticDelay {
    Coefficient a, b, c;
    double shift = 0.0;
};

// F(x, y) = alpha x (1 + beta y + gamma y^2 + delta y^3) + shift x
struct ModifiedHutchinson {
    double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
    double shift = 0.0;
};

// F(x, y) = -x^2 y
struct CubicDelay {};

// F(x, y) = cx sin(x) + cy sin(y); globally Lipschitz with constant max(|cx|, |cy|).
struct LipschitzSine {
    double cx = 0.0, cy = 0.0;
};

// One piece of the two-species competition split:
// adds (lin + quad * u_t + coup * v_d) * u_t to the target field, where u_t is
// the target field of the current state and v_d the delayed_field of the
// state at this term's delay. lin already includes the epsilon shift.
struct CompetitionCoupling {
    Coefficient lin, quad, coup;
    std::size_t delayed_field = 0;
};

using TermRule =
    std::variant<AffineGate, LogisticDelay, ModifiedHutchinson, CubicDelay, LipschitzSine,
                 CompetitionCoupling>;

struct DelayTerm {
    double delay = 0.0;
    std::size_t target_field = 0;
    TermRule rule;
    // Declared Lipschitz constant. Exact for affine_gate / lipschitz sine;
    // for the polynomial kinds the builders declare the constant of the
    // linearisation at the origin and clear gamma_is_global.
    std::optional<double> lipschitz_gamma;
    bool gamma_is_global = false;

    TermKind kind() const;
    void validate() const;
};

const char* kind_name(TermKind k);

// Pointwise evaluation, accumulated into out (all spans are per-field nodal
// grids of equal length). u is the current state, v the state at t - delay.
void eval_term(const DelayTerm& term, std::span<const std::span<const double>> u,
               std::span<const std::span<const double>> v,
               std::span<const std::span<double>> out);

// Single-field convenience wrapper.
std::vector<double> eval_term(const DelayTerm& term, std::span<const double> u,
                              std::span<const double> v);

struct LipschitzData {
    std::vector<double> gamma_i;
    double gamma = 0.0;
    bool all_global = true;
};

// Sums declared per-term constants. Throws ContractError("not globally
// Lipschitz") when a term carries no declared constant.
LipschitzData lipschitz_sum(std::span<const DelayTerm> terms);

// Multivariate polynomial with non-negative coefficients; used for the h3
// bound of the small-data certificate, so the box maximum over [0,K]^n sits
// at the corner.
class MultiPoly {
public:
    struct Monomial {
        double coeff = 0.0;
        std::vector<unsigned> degrees;
    };

    MultiPoly() : arity_(1) {}
    MultiPoly(std::size_t arity, std::vector<Monomial> monomials);

    static MultiPoly zero(std::size_t arity);
    // P(X) = sum_j coeffs[j] X^(j+1) lifted to one variable.
    static MultiPoly from_univariate(std::span<const double> coeffs);

    std::size_t arity() const { return arity_; }
    bool is_zero() const { return monomials_.empty(); }
    double eval(std::span<const double> x) const;
    // All variables set to k.
    double corner(double k) const;

private:
    std::size_t arity_;
    std::vector<Monomial> monomials_;
};

// Energy-pairing bound metadata: |sum_i (W, F_i(U, V_i))| <=
// ||W|| (c1 ||U||_H + h3(||U||_V, ||V_1||_V, ...) ||U||_V).
struct SmallDataBounds {
    double c1 = 0.0;
    MultiPoly h3;
};

// Local-Lipschitz growth metadata: alpha0 plus the growth polynomials P1, P2
// with zero constant term; degrees drive the dimension conditions.
struct ReactionBounds {
    double alpha0 = 0.0;
    std::vector<double> p1_coeffs;
    std::vector<double> p2_coeffs;

    std::size_t n1() const { return p1_coeffs.size(); }
    std::size_t n2() const { return p2_coeffs.size(); }
};

// max of the polynomial over the box [0, K]^arity = value at the corner.
double corner_bound(const MultiPoly& poly, double k);
double corner_bound(const SmallDataBounds& bounds, double k);

} // namespace ddes
