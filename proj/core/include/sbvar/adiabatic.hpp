#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sbvar/fock.hpp"
#include "sbvar/linalg.hpp"
#include "sbvar/model.hpp"
#include "sbvar/ramp.hpp"

namespace sbvar {

/// Parity-connected gap and transition matrix element along a coupling path.
struct GapScan {
    Eigen::VectorXd couplings;      // coupling_scale grid (fraction of g_final)
    Eigen::VectorXd gap;            // E_j - E_0, lowest same-parity excitation
    Eigen::VectorXd matrix_element; // |<E_j| sigma_z sum_k g_{k,f} x_k |E_0>|
    int n_modes = 0;
};

/// Computes a GapScan with ED over a uniform coupling_scale grid in [lo, hi].
GapScan gap_scan(const SpinBosonParams& params, const FockSpace& space,
                 double lo = 0.0, double hi = 1.0, int points = 101);

struct CriticalGap {
    double gap;          // Delta_c
    double coupling;     // argmin location
};

/// Minimum of the parity-connected gap over a coupling window.
CriticalGap critical_gap(const GapScan& scan, double window_lo, double window_hi);

struct TfBound {
    double t_f;            // adiabatic-theorem lower bound on the ramp time
    double at_coupling;    // where the bounding maximum occurs
};

/// t_f >~ max_s |M(s)| / (2 Delta_c^2 epsilon) for a linear ramp traversing
/// [0, g_final]; epsilon is the adiabaticity tolerance (infidelity = eps^2).
TfBound adiabatic_tf_bound(const GapScan& scan, double epsilon = 1.0);

/// Minimum over the path of gap(g(t))^2 / |<dH/dt>_{j,0}|; >> 1 means adiabatic.
double adiabaticity_gamma(const GapScan& scan, const RampProtocol& protocol);

struct ScalingFit {
    Eigen::VectorXd abscissa;
    Eigen::VectorXd ordinate;
    LineFit fit;
    double predicted; // value at the query abscissa
};

ScalingFit linear_fit_extrapolate(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                                  double x_query);

} // namespace sbvar
