#pragma once

#include <Eigen/Dense>
#include <optional>

namespace sbvar {

/// Spin-boson Hamiltonian data:
///   H = Delta/2 sigma_x + sum_k eps_k b_k^dag b_k
///       - 1/2 sigma_z sum_k g_k (b_k^dag + b_k).
/// Couplings may be multiplied by a global time-dependent scale (ramps).
struct SpinBosonParams {
    double delta = 1.0;          // tunnelling Delta
    Eigen::VectorXd eps;         // mode frequencies eps_k > 0
    Eigen::VectorXd g;           // spin-mode couplings g_k
    double omega_c = 0.0;        // cutoff frequency (metadata)
    std::optional<double> alpha_ohmic; // Ohmic strength, when applicable

    int n_modes() const { return static_cast<int>(eps.size()); }
    void validate() const;
};

/// Ohmic bath discretized on eps_k = omega_c k/N with
/// g_k = sqrt(2 alpha omega_c eps_k / N). For N=1 this reduces to
/// g = sqrt(2 alpha) omega_c with eps = omega_c.
SpinBosonParams ohmic_discretization(double alpha, double omega_c, int n_modes,
                                     double delta = 1.0);

/// Tanh-shaped coupling profile
///   g_k = gbar/2 tanh[sign * 0.25 (k - ceil(N/2))] + gbar,  k = 1..N.
Eigen::VectorXd tanh_profiles(double g_bar, int n_modes, int sign);

struct QrmCriticalCouplings {
    double g_c0; // sqrt(eps Delta), thermodynamic-limit critical point
    double g_c;  // 2 sqrt(eps^2 + sqrt(eps^4 + (g_c0/2)^4)), finite-Delta crossover
};

QrmCriticalCouplings qrm_critical_coupling(double eps, double delta);

/// Perturbative estimate of the Ohmic critical coupling, 1 + Delta/(2 omega_c).
double perturbative_alpha_c(double delta, double omega_c);

/// Trapped-ion drive parameters realizing a given spin-boson Hamiltonian.
struct IonDriveParams {
    double delta_drive;          // common detuning delta = 4 Delta
    Eigen::VectorXd delta_blue;  // blue-sideband detunings, delta/2 + eps_k
    Eigen::VectorXd delta_red;   // red-sideband detunings, delta/2 - eps_k
    Eigen::VectorXd omega_rabi;  // Rabi frequencies, -g_k / eta_k
    bool rwa_warning = false;    // |Omega_k| large compared to detuning spacing
};

/// Inverts Delta = delta/4, eps_k = (delta_b - delta_r)/2, g_k = -eta_k Omega_k,
/// enforcing delta_b + delta_r = delta.
IonDriveParams ion_map(const SpinBosonParams& target, const Eigen::VectorXd& eta);

/// Forward map, used to round-trip-check a drive table.
SpinBosonParams ion_map_forward(const IonDriveParams& drive, const Eigen::VectorXd& eta);

} // namespace sbvar
