#pragma once

#include "ddes/history.hpp"
#include "ddes/nonlinearity.hpp"
#include "ddes/spectral.hpp"

#include <optional>
#include <vector>

namespace ddes {

// One spectral field: diagonal generator plus the dense eigenfunction
// transforms between modal coefficients and grid values.
struct SpectralField {
    SpectralOperator op;
    linalg::Matrix to_nodal; // E, columns are eigenfunctions at the nodes
    linalg::Matrix to_modal; // E^{-1}
    std::vector<double> nodes;
};

// State container for the stepper: either a list of spectral fields (state =
// concatenated modal coefficients) or one dense generator (state = raw
// coordinates). Immutable after construction; safe to share across runs.
class System {
public:
    static System spectral(std::vector<SpectralField> fields);
    static System general(GeneralOperator op);

    bool is_spectral() const { return !fields_.empty(); }
    std::size_t field_count() const { return is_spectral() ? fields_.size() : 1; }
    std::size_t dim() const;
    std::size_t field_offset(std::size_t f) const;
    std::size_t field_dim(std::size_t f) const;

    const std::vector<SpectralField>& fields() const { return fields_; }
    const GeneralOperator& general_op() const;

    // Smallest eigenvalue of -A across fields (spectral only).
    double lambda1() const;

    struct StateNorms {
        double h = 0.0;
        double v = 0.0;
        std::vector<double> field_h;
    };
    StateNorms norms(std::span<const double> state) const;

private:
    std::vector<SpectralField> fields_;
    std::optional<GeneralOperator> general_;
};

enum class Scheme { exp_euler, exp_rk2 };

struct StepPlan {
    double h = 0.0;
    Scheme scheme = Scheme::exp_rk2;
    std::size_t output_every = 1;
    bool store_states = false;
    double b_max = 1e12; // blow-up threshold on the V norm
};

enum class Terminal { completed, blew_up, history_underrun };

struct Trajectory {
    std::vector<double> times;
    std::vector<double> h_norms;
    std::vector<double> v_norms;
    std::vector<std::vector<double>> field_h_norms; // per field, when fields > 1
    std::vector<std::vector<double>> states;        // filled when store_states
    Terminal terminal = Terminal::completed;
    std::optional<double> blowup_estimate; // lower estimate of the blow-up time
    Scheme scheme = Scheme::exp_rk2;
    double h = 0.0;
};

const char* terminal_name(Terminal t);
const char* scheme_name(Scheme s);

// Exponential-integrator stepping of U' = AU + sum_i F_i(U(t), U(t - tau_i)).
// The linear part is propagated exactly; nonlinear terms enter through
// phi-function weights; delayed states come from the history buffer, which
// must span [-tau_max, 0] with its last node at t = 0.
Trajectory integrate(const System& sys, const std::vector<DelayTerm>& terms, HistoryBuffer history,
                     double t_final, const StepPlan& plan);

struct OraclePlan {
    double h = 0.0;
    std::size_t record_every = 1;
    bool store_states = false;
    double b_max = 1e12;
};

// Independent check integrator: classical RK4 on the full right-hand side
// with linearly interpolated history. Used only for validation.
Trajectory oracle_integrate(const System& sys, const std::vector<DelayTerm>& terms,
                            const HistoryBuffer& history, double t_final, const OraclePlan& plan);

// Blow-up decision on the latest norm sample: flags when the norm exceeds
// b_max or stops being finite. `t_prev` is the last known-finite time.
struct BlowupDecision {
    bool blew_up = false;
    double t_estimate = 0.0;
};
BlowupDecision detect_blowup(double norm, double t, double t_prev, double b_max);

} // namespace ddes
