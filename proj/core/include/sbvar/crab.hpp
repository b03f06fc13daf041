#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sbvar/ansatz.hpp"
#include "sbvar/model.hpp"
#include "sbvar/ramp.hpp"
#include "sbvar/tdvp.hpp"

namespace sbvar {

struct NelderMeadResult {
    Eigen::VectorXd best_x;
    double best_f;
    int evaluations;
    std::vector<std::pair<Eigen::VectorXd, double>> history;
};

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Deterministic given x0; terminates when the simplex value
/// spread drops below ftol or the evaluation budget is exhausted.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, double simplex_scale,
                             int budget, double ftol);

struct CrabProblem {
    SpinBosonParams params;
    VariationalState target;     // normalized target ground state
    int n_polarons;              // ansatz size for the evolved state
    SpinInit initial_spin = SpinInit::minus;
    double t_f;
    int n_harmonics = 4;
    std::vector<int> r;          // frozen random bits, one per harmonic
    TdvpConfig tdvp_cfg;
    std::uint64_t seed = 0;      // seeds the shared initial state

    /// Draws r_j in {0,1} from the problem seed if r is empty.
    void freeze_random_bits();
    VariationalState seeded_initial() const;
    RampProtocol make_protocol(const Eigen::VectorXd& coeffs) const;
};

struct CrabEvalStats {
    int aborted_evals = 0;
};

/// 1 - fidelity(final state, target) for the CRAB ramp built from coeffs
/// (layout [A_1..A_M, B_1..B_M]). Numerically unstable evolutions yield 1.
double crab_objective(const CrabProblem& problem, const Eigen::VectorXd& coeffs,
                      CrabEvalStats* stats = nullptr);

struct OptimResult {
    Eigen::VectorXd best_coeffs;
    double best_infidelity;
    int evaluations;
    int aborted_evals;
    std::vector<std::pair<Eigen::VectorXd, double>> history;
    RampProtocol best_protocol;
};

/// Nelder-Mead search over the CRAB coefficients, seeded at the linear ramp
/// (all coefficients 0) with per-coordinate simplex offset simplex_scale.
OptimResult optimize_ramp(const CrabProblem& problem, int budget,
                          double simplex_scale = 0.1, double ftol = 1e-10);

struct ProtocolBenchmarkRow {
    std::string protocol;
    double t_f;
    double infidelity;
    double leakage_integral;
    double max_inst_infidelity; // vs instantaneous ground state (NaN if not computed)
};

/// Final infidelity, integrated leakage, and adiabaticity trace per
/// (protocol, t_f). inst_ground, when set, supplies the instantaneous ground
/// state at a given coupling_scale for the adiabaticity column.
std::vector<ProtocolBenchmarkRow> benchmark_protocols(
    const CrabProblem& problem,
    const std::vector<std::pair<std::string, RampProtocol>>& protocols,
    const std::function<VariationalState(double)>& inst_ground = {});

} // namespace sbvar
