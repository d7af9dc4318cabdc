#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ddes {

enum class Interp { linear, cubic_hermite };

// Time-stamped states on [t_now - tau_max, t_now] with dense interpolation.
// Doubles as the initial datum: builders fill [-tau_max, 0] and the stepper
// appends forward in time. Single writer; sampling never extrapolates.
class HistoryBuffer {
public:
    HistoryBuffer(std::size_t dim, double tau_max, Interp mode = Interp::cubic_hermite);

    std::size_t dim() const { return dim_; }
    double tau_max() const { return tau_max_; }
    Interp interpolation() const { return mode_; }
    std::size_t size() const { return count_; }

    double t_now() const;
    double t_front() const;

    // t must be strictly greater than the last stored time.
    void record(double t, std::span<const double> state);
    void record(double t, std::span<const double> state, std::span<const double> deriv);
    // Attach/overwrite the derivative of the most recent sample (the stepper
    // knows the exact right-hand side only once it evaluates the next step).
    void set_last_derivative(std::span<const double> deriv);

    // Interpolated state; exact at stored nodes. Throws HistoryUnderrun for
    // t outside [t_front, t_now].
    void sample(double t, std::span<double> out) const;
    std::vector<double> sample(double t) const;

    // Drop samples older than t_now - tau_max - 2 h_retain.
    void trim(double h_retain);

private:
    std::size_t node_index_before(double t) const;
    void slope_at(std::size_t idx, double* out) const;
    void compact();

    std::size_t dim_;
    double tau_max_;
    Interp mode_;
    std::size_t begin_ = 0;
    std::size_t count_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;
    std::vector<double> derivs_;
    std::vector<char> has_deriv_;
};

// Builders for the initial datum on [-tau_max, 0] (node spacing dt; the last
// node lands exactly at t = 0).
HistoryBuffer history_constant(std::size_t dim, double tau_max, double dt,
                               std::span<const double> profile,
                               Interp mode = Interp::cubic_hermite);

HistoryBuffer history_from_function(std::size_t dim, double tau_max, double dt,
                                    const std::function<void(double, std::span<double>)>& state,
                                    const std::function<void(double, std::span<double>)>& deriv,
                                    Interp mode = Interp::cubic_hermite);

// CSV rows "t,c_1,...,c_dim" sorted by t, spanning at least [-tau_max, 0];
// cubically resampled onto the uniform internal grid.
HistoryBuffer history_from_csv(const std::string& path, std::size_t dim, double tau_max, double dt,
                               Interp mode = Interp::cubic_hermite);

} // namespace ddes
