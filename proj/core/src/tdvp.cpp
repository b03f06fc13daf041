#include "sbvar/tdvp.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbvar/linalg.hpp"

namespace sbvar {

void TdvpConfig::validate() const {
    if (abs_tol <= 0.0 || rel_tol <= 0.0)
        throw std::invalid_argument("TdvpConfig: tolerances must be positive");
    if (pinv_rcut <= 0.0 || pinv_rcut >= 1.0)
        throw std::invalid_argument("TdvpConfig: pinv_rcut must be in (0, 1)");
    if (max_time <= 0.0) throw std::invalid_argument("TdvpConfig: max_time must be positive");
    if (dt_out <= 0.0) throw std::invalid_argument("TdvpConfig: dt_out must be positive");
    if (initial_dt <= 0.0)
        throw std::invalid_argument("TdvpConfig: initial_dt must be positive");
    if (stop_grad_norm < 0.0 || leakage_every < 0 || max_restart_attempts < 0)
        throw std::invalid_argument("TdvpConfig: negative thresholds");
}

EomResult eom_rhs(const VariationalState& vs, const SpinBosonParams& params,
                  double coupling_scale, TdvpMode mode, double pinv_rcut) {
    const Eigen::MatrixXcd gram = gram_matrix(vs);
    const GradientData gd = energy_gradient(vs, params, coupling_scale);

    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    if (mode == TdvpMode::imaginary) {
        a = 2.0 * gram.real();
        b = -gd.grad_eps();
    } else {
        a = 2.0 * gram.imag();
        b = -gd.grad_E();
    }

    const PinvSolveResult sol = pinv_solve(a, b, pinv_rcut);
    EomResult r;
    r.xdot = sol.x;
    r.residual = sol.residual;
    r.grad_norm = b.norm();
    // The relative test alone misfires near stationary points, where the
    // gradient decays to zero while the residual sits at the numerical noise
    // floor; an absolute floor keeps convergence from looking ill-conditioned.
    r.unstable = !r.xdot.allFinite() ||
                 (r.residual > 1e-6 * r.grad_norm && r.residual > 1e-12);
    return r;
}

double leakage(const VariationalState& vs, const Eigen::VectorXd& xdot,
               const SpinBosonParams& params, double coupling_scale) {
    const Eigen::MatrixXcd gram = gram_matrix(vs);
    const GradientData gd = energy_gradient(vs, params, coupling_scale);
    const double h2_raw =
        expect(vs, Observable::hamiltonian_sq(), params, coupling_scale).real() *
        gd.norm2;
    // ||(d_t + iH)psi||^2 = xdot'(Re G)xdot + <H^2> - 2 xdot . Im<v|H|psi>
    const double lam2 = xdot.dot(gram.real() * xdot) + h2_raw -
                        2.0 * xdot.dot(gd.h_overlap.imag());
    return std::sqrt(std::max(0.0, lam2 / gd.norm2));
}

namespace {

// Shift every kappa entry of the flat parameter vector by the offset that
// restores unit norm.
void renormalize_flat(Eigen::VectorXd& x, int n_polarons, int n_modes, double norm2) {
    const double offset = -0.5 * std::log(norm2);
    const int ppb = 2 + 2 * n_modes;
    for (int b = 0; b < 2 * n_polarons; ++b) x[b * ppb] += offset;
}

struct IntegrationOutcome {
    EvolutionTrace trace;
    VariationalState final_state;
};

EvolutionTrace integrate_once(const VariationalState& vs0, const SpinBosonParams& params,
                              const RampProtocol* schedule, const TdvpConfig& cfg,
                              const std::vector<Observable>& observables,
                              double coupling_scale) {
    const int n_p = vs0.n_polarons();
    const int n_m = vs0.n_modes;
    const double horizon = schedule ? schedule->t_f() : cfg.max_time;

    auto scale_at = [&](double t) {
        return schedule ? schedule->scale(std::min(t, horizon)) : coupling_scale;
    };

    using state_type = std::vector<double>;
    // residual-based instability only counts on accepted steps; trial stage
    // evaluations may visit transiently ill-conditioned states. The dopri5
    // FSAL stage makes the last evaluation of an accepted step coincide with
    // the accepted state.
    bool last_eval_unstable = false;
    double last_eval_t = 0.0;
    auto rhs = [&](const state_type& y, state_type& dydt, double t) {
        const Eigen::VectorXd x =
            Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<long>(y.size()));
        const VariationalState vs = VariationalState::unflatten(x, n_p, n_m);
        const EomResult er = eom_rhs(vs, params, scale_at(t), cfg.mode, cfg.pinv_rcut);
        if (!er.xdot.allFinite())
            throw TdvpInstabilityError("non-finite equations of motion at t = " +
                                       std::to_string(t));
        last_eval_unstable = er.unstable;
        last_eval_t = t;
        dydt.assign(er.xdot.data(), er.xdot.data() + er.xdot.size());
    };

    Eigen::VectorXd x = vs0.flatten();
    state_type y(x.data(), x.data() + x.size());

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                        ode::runge_kutta_dopri5<state_type>());

    EvolutionTrace trace;
    for (const auto& obs : observables) trace.observables[obs.name()];

    const double nan = std::numeric_limits<double>::quiet_NaN();
    int record_idx = 0;
    bool done = false;

    auto record = [&](double t) {
        Eigen::VectorXd xv =
            Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<long>(y.size()));
        VariationalState vs = VariationalState::unflatten(xv, n_p, n_m);
        const double s = scale_at(t);
        double n2 = norm_squared(vs);
        if (std::abs(n2 - 1.0) > 1e-9) {
            renormalize_flat(xv, n_p, n_m, n2);
            y.assign(xv.data(), xv.data() + xv.size());
            vs = VariationalState::unflatten(xv, n_p, n_m);
            n2 = norm_squared(vs);
        }
        const GradientData gd = energy_gradient(vs, params, s);

        trace.times.push_back(t);
        trace.norm2.push_back(n2);
        trace.energy.push_back(gd.energy());
        for (const auto& obs : observables)
            trace.observables[obs.name()].push_back(expect(vs, obs, params, s).real());

        const bool want_eom = (cfg.leakage_every > 0 &&
                               record_idx % cfg.leakage_every == 0) ||
                              cfg.stop_grad_norm > 0.0;
        double lam = nan;
        if (want_eom) {
            const EomResult er = eom_rhs(vs, params, s, cfg.mode, cfg.pinv_rcut);
            trace.final_grad_norm = er.grad_norm;
            if (cfg.leakage_every > 0 && record_idx % cfg.leakage_every == 0)
                lam = leakage(vs, er.xdot, params, s);
            if (cfg.mode == TdvpMode::imaginary && cfg.stop_grad_norm > 0.0 &&
                er.grad_norm < cfg.stop_grad_norm) {
                trace.converged = true;
                done = true;
            }
        }
        trace.leakage.push_back(lam);
        trace.states.push_back(std::move(vs));
        ++record_idx;
    };

    double t = 0.0;
    double dt = std::min(cfg.initial_dt, cfg.dt_out);
    record(0.0);
    const int n_out = static_cast<int>(std::ceil(horizon / cfg.dt_out - 1e-12));
    for (int next_out = 1; next_out <= n_out && !done; ++next_out) {
        const double t_target = std::min(next_out * cfg.dt_out, horizon);
        while (t < t_target - 1e-13) {
            double dt_try = std::min(dt, t_target - t);
            const auto res = stepper.try_step(rhs, y, t, dt_try);
            dt = dt_try;
            if (res == ode::controlled_step_result::success && last_eval_unstable)
                throw TdvpInstabilityError("equations of motion ill-conditioned at t = " +
                                           std::to_string(last_eval_t));
            if (res != ode::controlled_step_result::success &&
                dt < 1e-14 * std::max(1.0, horizon))
                throw TdvpInstabilityError("step-size underflow at t = " +
                                           std::to_string(t));
        }
        record(t_target);
    }
    return trace;
}

} // namespace

EvolutionTrace evolve(const VariationalState& vs0, const SpinBosonParams& params,
                      const RampProtocol* schedule, const TdvpConfig& cfg,
                      const std::vector<Observable>& observables,
                      double coupling_scale,
                      const std::function<VariationalState(int)>& reseed) {
    cfg.validate();
    if (vs0.n_modes != params.n_modes())
        throw std::invalid_argument("evolve: mode count mismatch");
    vs0.check_degeneracy();

    VariationalState start = vs0;
    int restarts = 0;
    for (;;) {
        try {
            EvolutionTrace trace =
                integrate_once(start, params, schedule, cfg, observables, coupling_scale);
            trace.restarts_used = restarts;
            return trace;
        } catch (const TdvpInstabilityError&) {
            if (!reseed || restarts >= cfg.max_restart_attempts) throw;
            ++restarts;
            start = reseed(restarts);
            start.check_degeneracy();
        }
    }
}

GroundStateResult imaginary_groundstate(const SpinBosonParams& params, int n_polarons,
                                        const TdvpConfig& cfg, std::uint64_t seed,
                                        double coupling_scale, SpinInit init) {
    TdvpConfig c = cfg;
    c.mode = TdvpMode::imaginary;
    if (c.stop_grad_norm <= 0.0) c.stop_grad_norm = 1e-8;

    const VariationalState vs0 = seed_random(n_polarons, params.n_modes(), init, seed);
    auto reseed = [&](int attempt) {
        return seed_random(n_polarons, params.n_modes(), init,
                           seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    };
    const EvolutionTrace trace =
        evolve(vs0, params, nullptr, c, {}, coupling_scale, reseed);

    GroundStateResult r;
    r.state = trace.states.back();
    renormalize(r.state);
    const GradientData gd = energy_gradient(r.state, params, coupling_scale);
    r.energy = gd.energy();
    const double h2 =
        expect(r.state, Observable::hamiltonian_sq(), params, coupling_scale).real();
    r.var_h = std::max(0.0, h2 - r.energy * r.energy);
    r.converged = trace.converged;
    r.final_grad_norm = trace.final_grad_norm;
    return r;
}

} // namespace sbvar
