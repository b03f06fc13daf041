#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbvar/ansatz.hpp"
#include "sbvar/tdvp.hpp"

namespace sbvar {

/// Lower bound (1 - I(t)^2/2)^2 on the fidelity with the exact evolution,
/// where I(t) is the trapezoidal integral of the recorded leakage.
/// Clamped to 0 once I exceeds sqrt(2).
std::vector<double> fidelity_bound(const EvolutionTrace& trace);

struct ConvergenceReport {
    std::string observable;
    std::vector<int> n_polarons;
    double horizon;
    std::vector<double> values;  // (Delta O / Obar) per N_p; NaN when undefined
};

/// Time-integrated relative deviation of an observable from its value at the
/// largest polaron number. Traces are resampled by linear interpolation onto
/// the coarsest common uniform grid.
ConvergenceReport convergence_criterion(const std::vector<int>& n_polarons,
                                        const std::vector<const EvolutionTrace*>& traces,
                                        const std::string& observable, double horizon);

struct OtocReport {
    int mode;
    std::vector<double> times;
    std::vector<double> var_x;
    std::optional<double> t_star;            // first local maximum of var(x_k)
    std::vector<double> occupations_at_t_star; // <n_k> for all modes, when t_star exists
};

/// Quadrature-variance OTOC proxy: var(x_k)(t) = <x_k^2> - <x_k>^2 with the
/// scrambling time t* at its first strict local maximum (5-point window,
/// relative prominence >= 1e-3).
OtocReport otoc_variance(const EvolutionTrace& trace, int mode);

/// <H^2> - <H>^2, clipped at -1e-9 -> 0.
double var_h(const VariationalState& vs, const SpinBosonParams& params,
             double coupling_scale = 1.0);

/// sigma_z(t) series extracted from a trace (plot-ready, no classification).
std::vector<double> magnetization_trace(const EvolutionTrace& trace);

} // namespace sbvar
