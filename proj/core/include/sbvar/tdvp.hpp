#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sbvar/ansatz.hpp"
#include "sbvar/model.hpp"
#include "sbvar/ramp.hpp"

namespace sbvar {

enum class TdvpMode { real, imaginary };

struct TdvpConfig {
    TdvpMode mode = TdvpMode::real;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double pinv_rcut = 1e-12;     // relative singular-value cutoff
    double max_time = 10.0;       // t or tau horizon
    double stop_grad_norm = 0.0;  // imaginary-time stationarity threshold (0 = off)
    int leakage_every = 10;       // leakage sampling stride in output points (0 = off)
    int max_restart_attempts = 0; // instability restarts (0 = off)
    double dt_out = 0.05;         // observable output grid spacing
    double initial_dt = 1e-4;

    void validate() const;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<VariationalState> states;              // checkpoints on the output grid
    std::map<std::string, std::vector<double>> observables;
    std::vector<double> leakage;  // sampled every leakage_every points (NaN elsewhere)
    std::vector<double> norm2;
    std::vector<double> energy;
    int restarts_used = 0;
    bool converged = false;       // imaginary mode: gradient threshold reached
    double final_grad_norm = 0.0;
};

struct EomResult {
    Eigen::VectorXd xdot;
    double residual;       // ||A xdot + grad||
    double grad_norm;      // ||grad||
    bool unstable = false; // residual above 1e-6 * ||grad||
};

/// Right-hand side of the McLachlan equations of motion.
/// imaginary: 2Re<v|v> xdot = -grad eps; real: 2Im<v|v> xdot = -grad E.
EomResult eom_rhs(const VariationalState& vs, const SpinBosonParams& params,
                  double coupling_scale, TdvpMode mode, double pinv_rcut = 1e-12);

/// Instantaneous leakage Lambda = ||(d_t + iH)|psi>|| given the parameter
/// velocities from eom_rhs at the same instant.
double leakage(const VariationalState& vs, const Eigen::VectorXd& xdot,
               const SpinBosonParams& params, double coupling_scale = 1.0);

class TdvpInstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration of the equations of motion. schedule == nullptr
/// means constant couplings at coupling_scale. reseed, when set, supplies a
/// fresh initial state on instability (attempt index 1-based).
EvolutionTrace evolve(const VariationalState& vs0, const SpinBosonParams& params,
                      const RampProtocol* schedule, const TdvpConfig& cfg,
                      const std::vector<Observable>& observables,
                      double coupling_scale = 1.0,
                      const std::function<VariationalState(int)>& reseed = {});

struct GroundStateResult {
    VariationalState state;
    double energy;
    double var_h;          // <H^2> - <H>^2
    bool converged;
    double final_grad_norm;
};

/// Imaginary-time relaxation from a randomly seeded state until
/// ||xdot|| < stop_grad_norm or cfg.max_time.
GroundStateResult imaginary_groundstate(const SpinBosonParams& params, int n_polarons,
                                        const TdvpConfig& cfg, std::uint64_t seed,
                                        double coupling_scale = 1.0,
                                        SpinInit init = SpinInit::minus);

} // namespace sbvar
