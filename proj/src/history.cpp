#include "ddes/history.hpp"

#include "ddes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddes {

HistoryBuffer::HistoryBuffer(std::size_t dim, double tau_max, Interp mode)
    : dim_(dim), tau_max_(tau_max), mode_(mode) {
    if (dim_ == 0) throw ContractError("history dimension must be positive");
    if (!(tau_max_ >= 0.0) || !std::isfinite(tau_max_))
        throw ContractError("tau_max must be finite and >= 0");
}

double HistoryBuffer::t_now() const {
    if (count_ == 0) throw ContractError("history is empty");
    return times_[begin_ + count_ - 1];
}

double HistoryBuffer::t_front() const {
    if (count_ == 0) throw ContractError("history is empty");
    return times_[begin_];
}

void HistoryBuffer::record(double t, std::span<const double> state) {
    record(t, state, {});
}

void HistoryBuffer::record(double t, std::span<const double> state,
                           std::span<const double> deriv) {
    if (state.size() != dim_) throw ContractError("history state dimension mismatch");
    if (!deriv.empty() && deriv.size() != dim_)
        throw ContractError("history derivative dimension mismatch");
    if (!std::isfinite(t)) throw ContractError("history time must be finite");
    if (count_ > 0 && !(t > t_now())) throw ContractError("history times must be strictly increasing");

    times_.push_back(t);
    states_.insert(states_.end(), state.begin(), state.end());
    if (deriv.empty()) {
        derivs_.insert(derivs_.end(), dim_, 0.0);
        has_deriv_.push_back(0);
    } else {
        derivs_.insert(derivs_.end(), deriv.begin(), deriv.end());
        has_deriv_.push_back(1);
    }
    ++count_;
}

void HistoryBuffer::set_last_derivative(std::span<const double> deriv) {
    if (count_ == 0) throw ContractError("history is empty");
    if (deriv.size() != dim_) throw ContractError("history derivative dimension mismatch");
    const std::size_t idx = begin_ + count_ - 1;
    std::copy(deriv.begin(), deriv.end(), derivs_.begin() + static_cast<long>(idx * dim_));
    has_deriv_[idx] = 1;
}

std::size_t HistoryBuffer::node_index_before(double t) const {
    const auto first = times_.begin() + static_cast<long>(begin_);
    const auto last = times_.begin() + static_cast<long>(begin_ + count_);
    auto it = std::upper_bound(first, last, t);
    if (it == first) throw HistoryUnderrun("history underrun");
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

void HistoryBuffer::slope_at(std::size_t idx, double* out) const {
    if (has_deriv_[idx]) {
        const double* d = derivs_.data() + idx * dim_;
        std::copy(d, d + dim_, out);
        return;
    }
    // Finite-difference slope on the (possibly non-uniform) neighbours.
    const std::size_t lo = begin_;
    const std::size_t hi = begin_ + count_ - 1;
    const double* s = states_.data();
    if (count_ == 1) {
        std::fill(out, out + dim_, 0.0);
        return;
    }
    if (idx == lo) {
        const double dt = times_[idx + 1] - times_[idx];
        for (std::size_t k = 0; k < dim_; ++k)
            out[k] = (s[(idx + 1) * dim_ + k] - s[idx * dim_ + k]) / dt;
        return;
    }
    if (idx == hi) {
        const double dt = times_[idx] - times_[idx - 1];
        for (std::size_t k = 0; k < dim_; ++k)
            out[k] = (s[idx * dim_ + k] - s[(idx - 1) * dim_ + k]) / dt;
        return;
    }
    const double dl = times_[idx] - times_[idx - 1];
    const double dr = times_[idx + 1] - times_[idx];
    for (std::size_t k = 0; k < dim_; ++k) {
        const double left = (s[idx * dim_ + k] - s[(idx - 1) * dim_ + k]) / dl;
        const double right = (s[(idx + 1) * dim_ + k] - s[idx * dim_ + k]) / dr;
        out[k] = (left * dr + right * dl) / (dl + dr);
    }
}

void HistoryBuffer::sample(double t, std::span<double> out) const {
    if (out.size() != dim_) throw ContractError("history sample dimension mismatch");
    if (count_ == 0) throw ContractError("history is empty");
    const double lo = t_front();
    const double hi = t_now();
    const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (t < lo - tol || t > hi + tol) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "history underrun: t=%.17g outside [%.17g, %.17g]", t, lo,
                      hi);
        throw HistoryUnderrun(msg);
    }
    t = std::clamp(t, lo, hi);

    const std::size_t i0 = std::min(node_index_before(t), begin_ + count_ - 1);
    if (times_[i0] == t || i0 == begin_ + count_ - 1) {
        const double* s = states_.data() + i0 * dim_;
        std::copy(s, s + dim_, out.begin());
        return;
    }
    const std::size_t i1 = i0 + 1;
    const double t0 = times_[i0], t1 = times_[i1];
    const double dt = t1 - t0;
    const double th = (t - t0) / dt;
    const double* s0 = states_.data() + i0 * dim_;
    const double* s1 = states_.data() + i1 * dim_;

    if (mode_ == Interp::linear) {
        for (std::size_t k = 0; k < dim_; ++k) out[k] = (1.0 - th) * s0[k] + th * s1[k];
        return;
    }

    std::vector<double> d0(dim_), d1(dim_);
    slope_at(i0, d0.data());
    slope_at(i1, d1.data());
    const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    const double h10 = th * (1.0 - th) * (1.0 - th);
    const double h01 = th * th * (3.0 - 2.0 * th);
    const double h11 = th * th * (th - 1.0);
    for (std::size_t k = 0; k < dim_; ++k)
        out[k] = h00 * s0[k] + h10 * dt * d0[k] + h01 * s1[k] + h11 * dt * d1[k];
}

std::vector<double> HistoryBuffer::sample(double t) const {
    std::vector<double> out(dim_);
    sample(t, out);
    return out;
}

void HistoryBuffer::trim(double h_retain) {
    if (count_ == 0) return;
    const double cutoff = t_now() - tau_max_ - 2.0 * h_retain;
    // Keep one node at or before the cutoff so queries down to
    // t_now - tau_max always have a left neighbour.
    while (count_ > 1 && times_[begin_ + 1] <= cutoff) {
        ++begin_;
        --count_;
    }
    compact();
}

void HistoryBuffer::compact() {
    if (begin_ < 4096 || begin_ < count_) return;
    times_.erase(times_.begin(), times_.begin() + static_cast<long>(begin_));
    states_.erase(states_.begin(), states_.begin() + static_cast<long>(begin_ * dim_));
    derivs_.erase(derivs_.begin(), derivs_.begin() + static_cast<long>(begin_ * dim_));
    has_deriv_.erase(has_deriv_.begin(), has_deriv_.begin() + static_cast<long>(begin_));
    begin_ = 0;
}

namespace {

std::size_t node_count(double tau_max, double dt) {
    if (!(dt > 0.0)) throw ContractError("history node spacing must be positive");
    if (tau_max == 0.0) return 1;
    return static_cast<std::size_t>(std::llround(std::ceil(tau_max / dt - 1e-9))) + 1;
}

} // namespace

HistoryBuffer history_constant(std::size_t dim, double tau_max, double dt,
                               std::span<const double> profile, Interp mode) {
    if (profile.size() != dim) throw ContractError("profile dimension mismatch");
    HistoryBuffer buf(dim, tau_max, mode);
    const std::size_t n = node_count(tau_max, dt);
    std::vector<double> zero(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // Walk forward so the last node is exactly t = 0.
        const double t = (n == 1) ? 0.0 : -tau_max * (1.0 - static_cast<double>(i) / (n - 1));
        buf.record(i + 1 == n ? 0.0 : t, profile, zero);
    }
    return buf;
}

HistoryBuffer history_from_function(std::size_t dim, double tau_max, double dt,
                                    const std::function<void(double, std::span<double>)>& state,
                                    const std::function<void(double, std::span<double>)>& deriv,
                                    Interp mode) {
    HistoryBuffer buf(dim, tau_max, mode);
    const std::size_t n = node_count(tau_max, dt);
    std::vector<double> s(dim), d(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (n == 1 || i + 1 == n)
                             ? 0.0
                             : -tau_max * (1.0 - static_cast<double>(i) / (n - 1));
        state(t, s);
        if (deriv) {
            deriv(t, d);
            buf.record(t, s, d);
        } else {
            buf.record(t, s);
        }
    }
    return buf;
}

HistoryBuffer history_from_csv(const std::string& path, std::size_t dim, double tau_max, double dt,
                               Interp mode) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open history file: " + path);
    HistoryBuffer raw(dim, 1e300, Interp::cubic_hermite);
    std::string line;
    std::size_t rows = 0;
    bool first_line = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                numeric = false;
                break;
            }
            vals.push_back(v);
        }
        if (!numeric) {
            if (first_line) {
                first_line = false;
                continue; // header row
            }
            throw ConfigError("history file has a non-numeric row: " + path);
        }
        first_line = false;
        if (vals.size() != dim + 1)
            throw ConfigError("history file row must have 1 + dim columns: " + path);
        raw.record(vals[0], std::span<const double>(vals).subspan(1));
        ++rows;
    }
    if (rows < 2) throw ConfigError("history file needs at least two rows: " + path);
    if (raw.t_front() > -tau_max + 1e-12 || raw.t_now() < -1e-12)
        throw ConfigError("history file must span [-tau_max, 0]");

    HistoryBuffer buf(dim, tau_max, mode);
    const std::size_t n = node_count(tau_max, dt);
    std::vector<double> s(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (n == 1 || i + 1 == n)
                             ? 0.0
                             : -tau_max * (1.0 - static_cast<double>(i) / (n - 1));
        raw.sample(std::max(t, raw.t_front()), s);
        buf.record(t, s);
    }
    return buf;
}

} // namespace ddes
