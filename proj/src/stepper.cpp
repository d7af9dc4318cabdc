#include "ddes/stepper.hpp"

#include "ddes/errors.hpp"
#include "ddes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ddes {

System System::spectral(std::vector<SpectralField> fields) {
    if (fields.empty()) throw ContractError("spectral system needs at least one field");
    for (const SpectralField& f : fields) {
        f.op.validate();
        if (f.to_nodal.rows() != f.op.dim() || f.to_nodal.cols() != f.op.dim() ||
            f.to_modal.rows() != f.op.dim() || f.to_modal.cols() != f.op.dim())
            throw ContractError("eigen-transform shape mismatch");
    }
    System s;
    s.fields_ = std::move(fields);
    return s;
}

System System::general(GeneralOperator op) {
    op.validate();
    System s;
    s.general_ = std::move(op);
    return s;
}

std::size_t System::dim() const {
    if (!is_spectral()) return general_->dim();
    std::size_t n = 0;
    for (const SpectralField& f : fields_) n += f.op.dim();
    return n;
}

std::size_t System::field_offset(std::size_t f) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < f; ++i) off += fields_[i].op.dim();
    return off;
}

std::size_t System::field_dim(std::size_t f) const {
    return is_spectral() ? fields_[f].op.dim() : general_->dim();
}

const GeneralOperator& System::general_op() const {
    if (is_spectral()) throw ContractError("system has no general operator");
    return *general_;
}

double System::lambda1() const {
    if (!is_spectral()) throw ContractError("lambda1 is defined for spectral systems only");
    double lam = fields_.front().op.lambda1();
    for (const SpectralField& f : fields_) lam = std::min(lam, f.op.lambda1());
    return lam;
}

System::StateNorms System::norms(std::span<const double> state) const {
    StateNorms n;
    if (!is_spectral()) {
        n.h = std::sqrt(kernels::sum_sq(state.data(), state.size()));
        n.v = n.h; // the general path carries no V norm; mirror H
        n.field_h = {n.h};
        return n;
    }
    double h2 = 0.0, v2 = 0.0;
    std::size_t off = 0;
    for (const SpectralField& f : fields_) {
        const std::size_t d = f.op.dim();
        const double fh2 = kernels::sum_sq(state.data() + off, d);
        h2 += fh2;
        v2 += kernels::weighted_sum_sq(f.op.eigenvalues.data(), state.data() + off, d);
        n.field_h.push_back(std::sqrt(fh2));
        off += d;
    }
    n.h = std::sqrt(h2);
    n.v = std::sqrt(v2);
    return n;
}

const char* terminal_name(Terminal t) {
    switch (t) {
    case Terminal::completed: return "completed";
    case Terminal::blew_up: return "blew_up";
    case Terminal::history_underrun: return "history_underrun";
    }
    return "unknown";
}

const char* scheme_name(Scheme s) {
    return s == Scheme::exp_euler ? "exp_euler" : "exp_rk2";
}

BlowupDecision detect_blowup(double norm, double t, double t_prev, double b_max) {
    if (!std::isfinite(norm)) return {true, t_prev};
    if (norm > b_max) return {true, t};
    return {false, 0.0};
}

namespace {

double min_delay(const std::vector<DelayTerm>& terms) {
    double tau = std::numeric_limits<double>::infinity();
    for (const DelayTerm& t : terms) tau = std::min(tau, t.delay);
    return tau;
}

double max_delay(const std::vector<DelayTerm>& terms) {
    double tau = 0.0;
    for (const DelayTerm& t : terms) tau = std::max(tau, t.delay);
    return tau;
}

// Shared evaluation context: scratch buffers plus the nodal transform logic.
struct EvalContext {
    const System& sys;
    const std::vector<DelayTerm>& terms;

    std::vector<double> u_nodal;    // current state, nodal, concatenated
    std::vector<double> accum;      // nonlinearity accumulator, nodal
    std::vector<double> n_modal;    // projected nonlinearity
    std::vector<double> delayed;    // scratch for sampled delayed states
    std::vector<double> delayed_nodal;
    std::map<double, std::vector<double>> delay_cache; // nodal delayed states by tau

    explicit EvalContext(const System& s, const std::vector<DelayTerm>& t)
        : sys(s), terms(t), u_nodal(s.dim()), accum(s.dim()), n_modal(s.dim()),
          delayed(s.dim()), delayed_nodal(s.dim()) {}

    void to_nodal(std::span<const double> modal, std::span<double> nodal) const {
        if (!sys.is_spectral()) {
            std::copy(modal.begin(), modal.end(), nodal.begin());
            return;
        }
        std::size_t off = 0;
        for (const SpectralField& f : sys.fields()) {
            const std::size_t d = f.op.dim();
            f.to_nodal.matvec(modal.data() + off, nodal.data() + off);
            off += d;
        }
    }

    void to_modal(std::span<const double> nodal, std::span<double> modal) const {
        if (!sys.is_spectral()) {
            std::copy(nodal.begin(), nodal.end(), modal.begin());
            return;
        }
        std::size_t off = 0;
        for (const SpectralField& f : sys.fields()) {
            const std::size_t d = f.op.dim();
            f.to_modal.matvec(nodal.data() + off, modal.data() + off);
            off += d;
        }
    }

    std::vector<std::span<const double>> field_views(std::span<const double> flat) const {
        std::vector<std::span<const double>> views;
        const std::size_t nf = sys.field_count();
        for (std::size_t f = 0; f < nf; ++f)
            views.push_back(flat.subspan(sys.field_offset(f), sys.field_dim(f)));
        return views;
    }

    std::vector<std::span<double>> field_views_mut(std::span<double> flat) const {
        std::vector<std::span<double>> views;
        const std::size_t nf = sys.field_count();
        for (std::size_t f = 0; f < nf; ++f)
            views.push_back(flat.subspan(sys.field_offset(f), sys.field_dim(f)));
        return views;
    }

    // Nonlinearity in modal coordinates at (t, state). Throws HistoryUnderrun
    // if a delayed lookup leaves the buffer span.
    void nonlinearity(double t, std::span<const double> state, const HistoryBuffer& hist,
                      std::span<double> out) {
        if (terms.empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        to_nodal(state, u_nodal);
        std::fill(accum.begin(), accum.end(), 0.0);
        delay_cache.clear();
        const auto u_views = field_views(u_nodal);
        auto out_views = field_views_mut(accum);
        for (const DelayTerm& term : terms) {
            auto it = delay_cache.find(term.delay);
            if (it == delay_cache.end()) {
                hist.sample(t - term.delay, delayed);
                to_nodal(delayed, delayed_nodal);
                it = delay_cache.emplace(term.delay, delayed_nodal).first;
            }
            const auto v_views = field_views(it->second);
            eval_term(term, u_views, v_views, out_views);
        }
        to_modal(accum, out);
    }
};

void push_row(Trajectory& traj, const System& sys, double t, std::span<const double> state,
              bool store_states) {
    const System::StateNorms n = sys.norms(state);
    traj.times.push_back(t);
    traj.h_norms.push_back(n.h);
    traj.v_norms.push_back(n.v);
    if (sys.field_count() > 1) {
        traj.field_h_norms.resize(sys.field_count());
        for (std::size_t f = 0; f < n.field_h.size(); ++f)
            traj.field_h_norms[f].push_back(n.field_h[f]);
    }
    if (store_states) traj.states.emplace_back(state.begin(), state.end());
}

void validate_common(const System& sys, const std::vector<DelayTerm>& terms,
                     const HistoryBuffer& history, double t_final, double h) {
    if (!(h > 0.0)) throw ContractError("step size must be positive");
    if (!(t_final > 0.0)) throw ContractError("final time must be positive");
    if (history.dim() != sys.dim()) throw ContractError("history/system dimension mismatch");
    if (std::abs(history.t_now()) > 1e-9)
        throw ContractError("history must end exactly at t = 0");
    const double tau_max = max_delay(terms);
    if (!terms.empty() && history.t_front() > -tau_max + 1e-9)
        throw ContractError("history must span [-tau_max, 0]");
    for (const DelayTerm& t : terms) {
        t.validate();
        if (t.target_field >= sys.field_count())
            throw ContractError("term target field out of range");
    }
    const double tau_min = min_delay(terms);
    if (!terms.empty() && h > tau_min * (1.0 + 1e-12))
        throw ContractError("step size must not exceed the smallest delay");
}

} // namespace

Trajectory integrate(const System& sys, const std::vector<DelayTerm>& terms, HistoryBuffer history,
                     double t_final, const StepPlan& plan) {
    validate_common(sys, terms, history, t_final, plan.h);
    if (plan.output_every == 0) throw ContractError("output_every must be >= 1");

    const double h = plan.h;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(t_final / h));
    if (n_steps == 0) throw ContractError("final time shorter than one step");

    const std::size_t dim = sys.dim();
    Trajectory traj;
    traj.scheme = plan.scheme;
    traj.h = h;

    // Exact propagator and phi weights for the fixed step (diagonal for the
    // spectral path, dense matrices for the general path).
    std::vector<double> e_diag(dim), p1_diag(dim), p2_diag(dim);
    linalg::Matrix e_mat, p1_mat, p2_mat;
    if (sys.is_spectral()) {
        std::size_t off = 0;
        for (const SpectralField& f : sys.fields()) {
            for (std::size_t k = 0; k < f.op.dim(); ++k) {
                const double z = -f.op.eigenvalues[k] * h;
                e_diag[off + k] = std::exp(z);
                p1_diag[off + k] = linalg::phi1(z);
                p2_diag[off + k] = linalg::phi2(z);
            }
            off += f.op.dim();
        }
    } else {
        linalg::phi_exp(sys.general_op().m, h, e_mat, p1_mat, p2_mat);
    }

    EvalContext ctx(sys, terms);
    std::vector<double> state = history.sample(0.0);
    std::vector<double> nl(dim), nl_star(dim), stage(dim), deriv(dim), scratch(dim);

    push_row(traj, sys, 0.0, state, plan.store_states);

    auto apply_linear = [&](std::span<const double> in, std::span<double> out) {
        if (sys.is_spectral()) {
            std::size_t off = 0;
            for (const SpectralField& f : sys.fields()) {
                for (std::size_t k = 0; k < f.op.dim(); ++k)
                    out[off + k] = -f.op.eigenvalues[k] * in[off + k];
                off += f.op.dim();
            }
        } else {
            sys.general_op().m.matvec(in.data(), out.data());
        }
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const double t_next = static_cast<double>(n + 1) * h;
        try {
            ctx.nonlinearity(t, state, history, nl);

            // The exact right-hand side at t_n is now known; store it so the
            // cubic dense output of the history stays at interpolation order.
            apply_linear(state, deriv);
            for (std::size_t k = 0; k < dim; ++k) deriv[k] += nl[k];
            history.set_last_derivative(deriv);

            if (sys.is_spectral()) {
                std::copy(state.begin(), state.end(), stage.begin());
                kernels::ew_step_update(e_diag.data(), p1_diag.data(), nl.data(), h, stage.data(),
                                        dim);
            } else {
                e_mat.matvec(state.data(), stage.data());
                p1_mat.matvec(nl.data(), scratch.data());
                kernels::axpy(h, scratch.data(), stage.data(), dim);
            }

            if (plan.scheme == Scheme::exp_rk2) {
                // ETD2RK correction: U_{n+1} = a + h phi2(hA) (F(a, t_{n+1}) - F(U_n, t_n)).
                // The delayed lookup at t_{n+1} - tau_i lands at or before t_n
                // because h <= tau_min, so the buffer already covers it.
                ctx.nonlinearity(t_next, stage, history, nl_star);
                for (std::size_t k = 0; k < dim; ++k) nl_star[k] -= nl[k];
                if (sys.is_spectral()) {
                    for (std::size_t k = 0; k < dim; ++k)
                        stage[k] += h * p2_diag[k] * nl_star[k];
                } else {
                    p2_mat.matvec(nl_star.data(), scratch.data());
                    kernels::axpy(h, scratch.data(), stage.data(), dim);
                }
            }
            history.record(t_next, stage);
        } catch (const HistoryUnderrun&) {
            traj.terminal = Terminal::history_underrun;
            return traj;
        }

        std::swap(state, stage);
        history.trim(h);

        const System::StateNorms norms_next = sys.norms(state);
        const double guard_norm = sys.is_spectral() ? norms_next.v : norms_next.h;
        const BlowupDecision bd = detect_blowup(guard_norm, t_next, t, plan.b_max);
        if (bd.blew_up) {
            push_row(traj, sys, t_next, state, plan.store_states);
            traj.terminal = Terminal::blew_up;
            traj.blowup_estimate = bd.t_estimate;
            return traj;
        }

        if ((n + 1) % plan.output_every == 0 || n + 1 == n_steps)
            push_row(traj, sys, t_next, state, plan.store_states);
    }

    traj.terminal = Terminal::completed;
    return traj;
}

Trajectory oracle_integrate(const System& sys, const std::vector<DelayTerm>& terms,
                            const HistoryBuffer& history, double t_final, const OraclePlan& plan) {
    validate_common(sys, terms, history, t_final, plan.h);
    if (plan.record_every == 0) throw ContractError("record_every must be >= 1");

    const double h = plan.h;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(t_final / h));
    const std::size_t dim = sys.dim();
    const double tau_max = max_delay(terms);

    // Rebuild the pre-history on the oracle grid with linear interpolation.
    HistoryBuffer hist(dim, tau_max, Interp::linear);
    if (terms.empty()) {
        hist.record(0.0, history.sample(0.0));
    } else {
        const std::size_t n_hist = static_cast<std::size_t>(std::llround(tau_max / h));
        std::vector<double> s(dim);
        for (std::size_t i = 0; i <= n_hist; ++i) {
            const double t = (i == n_hist)
                                 ? 0.0
                                 : -tau_max * (1.0 - static_cast<double>(i) / n_hist);
            history.sample(std::max(t, history.t_front()), s);
            hist.record(t, s);
        }
    }

    Trajectory traj;
    traj.scheme = Scheme::exp_rk2; // provenance field unused by the oracle
    traj.h = h;

    EvalContext ctx(sys, terms);
    std::vector<double> state = hist.sample(0.0);
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), lin(dim);

    push_row(traj, sys, 0.0, state, plan.store_states);

    auto rhs = [&](double t, std::span<const double> u, std::span<double> out) {
        ctx.nonlinearity(t, u, hist, out);
        if (sys.is_spectral()) {
            std::size_t off = 0;
            for (const SpectralField& f : sys.fields()) {
                for (std::size_t k = 0; k < f.op.dim(); ++k)
                    out[off + k] -= f.op.eigenvalues[k] * u[off + k];
                off += f.op.dim();
            }
        } else {
            sys.general_op().m.matvec(u.data(), lin.data());
            for (std::size_t k = 0; k < dim; ++k) out[k] += lin[k];
        }
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const double t_next = static_cast<double>(n + 1) * h;
        try {
            rhs(t, state, k1);
            for (std::size_t k = 0; k < dim; ++k) tmp[k] = state[k] + 0.5 * h * k1[k];
            rhs(t + 0.5 * h, tmp, k2);
            for (std::size_t k = 0; k < dim; ++k) tmp[k] = state[k] + 0.5 * h * k2[k];
            rhs(t + 0.5 * h, tmp, k3);
            for (std::size_t k = 0; k < dim; ++k) tmp[k] = state[k] + h * k3[k];
            rhs(t_next, tmp, k4);
            for (std::size_t k = 0; k < dim; ++k)
                state[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            hist.record(t_next, state);
        } catch (const HistoryUnderrun&) {
            traj.terminal = Terminal::history_underrun;
            return traj;
        }
        hist.trim(h);

        const System::StateNorms norms_next = sys.norms(state);
        const double guard_norm = sys.is_spectral() ? norms_next.v : norms_next.h;
        const BlowupDecision bd = detect_blowup(guard_norm, t_next, t, plan.b_max);
        if (bd.blew_up) {
            push_row(traj, sys, t_next, state, plan.store_states);
            traj.terminal = Terminal::blew_up;
            traj.blowup_estimate = bd.t_estimate;
            return traj;
        }

        if ((n + 1) % plan.record_every == 0 || n + 1 == n_steps)
            push_row(traj, sys, t_next, state, plan.store_states);
    }

    traj.terminal = Terminal::completed;
    return traj;
}

} // namespace ddes
