#pragma once

#include "ddes/certificates.hpp"
#include "ddes/history.hpp"
#include "ddes/nonlinearity.hpp"
#include "ddes/stepper.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddes {

// 1-D interval (0, L) with -d u'' and one of three boundary conditions.
// epsilon is the Neumann zero-mode shift; robin_alpha the Robin coefficient
// in u'(0) = alpha' u(0), u'(L) = -alpha' u(L).
struct Domain1D {
    double length = 3.141592653589793;
    double diffusion = 1.0;
    BoundaryKind boundary = BoundaryKind::dirichlet;
    double epsilon = 0.0;
    double robin_alpha = 1.0;
    std::size_t modes = 16;

    void validate() const;
};

// Eigenpairs of the domain: Dirichlet and Neumann in closed form, Robin roots
// by bracketed bisection of (alpha'^2 - mu^2) sin(mu L) + 2 alpha' mu cos(mu L).
SpectralField build_diffusion_operator(const Domain1D& dom);

// Smallest eigenvalue of -d Laplace with the domain's Dirichlet/Robin
// boundary (no shift); the mu constant of the competition case analysis.
double principal_eigenvalue(const Domain1D& dom);

// Damped wave in energy coordinates: per mode k the 2x2 block
// [[0, sqrt(mu_k)], [-sqrt(mu_k), -a0]], assembled block-diagonally. The
// Euclidean norm of the assembled state is the physical energy norm.
GeneralOperator build_damped_wave(const Domain1D& dom, double a0,
                                  std::vector<linalg::Matrix>* blocks_out = nullptr);

struct CompetitionSpec {
    Domain1D field1;
    Domain1D field2;
    Coefficient a1, a2;       // linear growth rates
    Coefficient a11, a22;     // self-interaction
    Coefficient ap11, ap12, ap21, ap22; // delayed couplings
    double tau11 = 1.0, tau12 = 1.0, tau21 = 1.0, tau22 = 1.0;
    int case_index = 0;                // 0 = derive from the boundary pair
    std::optional<double> epsilon;     // user shift for the Neumann fields
};

// Everything the front-end needs about one configured model.
struct Scenario {
    std::string name;
    System system;
    std::vector<DelayTerm> terms;
    double tau_max = 0.0;
    double tau_min = 0.0;

    // Semigroup envelope data: exact (1, lambda1) for self-adjoint systems;
    // wave scenarios carry their blocks for a numerical fit instead.
    double big_m = 1.0;
    double omega = 0.0;
    std::vector<linalg::Matrix> wave_blocks;

    double lambda1 = 0.0;
    double epsilon = 0.0;
    BoundaryKind boundary = BoundaryKind::dirichlet;
    double embedding_const = 0.0; // C_e with ||u||_inf <= C_e ||u||_V

    std::optional<SmallDataBounds> small_bounds;
    std::optional<ReactionBounds> reaction_bounds;

    struct CompetitionMeta {
        int case_index = 0;
        CoeffStats a1, a2;
        double mu1 = 0.0, mu2 = 0.0;
        double epsilon1 = 0.0, epsilon2 = 0.0;
        std::optional<double> delta;
    };
    std::optional<CompetitionMeta> competition;

    // Constant-in-time initial datum amplitude * (first eigenfunction of each
    // field), sampled every dt on [-tau_max, 0].
    HistoryBuffer make_history(double amplitude, double dt,
                               Interp mode = Interp::cubic_hermite) const;
    // V norm of that datum per unit amplitude.
    double history_vnorm_per_amplitude() const;
};

// Presets for the concrete models.
Scenario logistic_scenario(const Domain1D& dom, const Coefficient& a, const Coefficient& b,
                           const Coefficient& c, double tau);
Scenario hutchinson_scenario(const Domain1D& dom, double alpha, double tau);
Scenario modified_hutchinson_scenario(const Domain1D& dom, double alpha, double beta, double gamma,
                                      double delta, double tau);
Scenario cubic_scenario(const Domain1D& dom, double tau);
Scenario competition_scenario(const CompetitionSpec& spec);
Scenario damped_wave_scenario(const Domain1D& dom, double a0);

// Neumann shift rule used when a config says epsilon = auto.
double auto_epsilon(double relevant_sup);

} // namespace ddes
