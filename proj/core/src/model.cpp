#include "sbvar/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sbvar {

void SpinBosonParams::validate() const {
    if (eps.size() < 1)
        throw std::invalid_argument("SpinBosonParams: need at least one mode");
    if (g.size() != eps.size())
        throw std::invalid_argument("SpinBosonParams: eps/g length mismatch");
    if ((eps.array() <= 0.0).any())
        throw std::invalid_argument("SpinBosonParams: mode frequencies must be positive");
}

SpinBosonParams ohmic_discretization(double alpha, double omega_c, int n_modes,
                                     double delta) {
    if (alpha < 0.0) throw std::invalid_argument("ohmic_discretization: alpha < 0");
    if (omega_c <= 0.0) throw std::invalid_argument("ohmic_discretization: omega_c <= 0");
    if (n_modes < 1) throw std::invalid_argument("ohmic_discretization: N < 1");

    SpinBosonParams p;
    p.delta = delta;
    p.omega_c = omega_c;
    p.alpha_ohmic = alpha;
    p.eps.resize(n_modes);
    p.g.resize(n_modes);
    for (int k = 1; k <= n_modes; ++k) {
        p.eps[k - 1] = omega_c * k / n_modes;
        p.g[k - 1] = std::sqrt(2.0 * alpha * omega_c * p.eps[k - 1] / n_modes);
    }
    return p;
}

Eigen::VectorXd tanh_profiles(double g_bar, int n_modes, int sign) {
    if (n_modes < 1) throw std::invalid_argument("tanh_profiles: N < 1");
    if (sign != 1 && sign != -1) throw std::invalid_argument("tanh_profiles: sign must be +-1");
    const int mid = (n_modes + 1) / 2; // ceil(N/2)
    Eigen::VectorXd g(n_modes);
    for (int k = 1; k <= n_modes; ++k)
        g[k - 1] = 0.5 * g_bar * std::tanh(sign * 0.25 * (k - mid)) + g_bar;
    return g;
}

QrmCriticalCouplings qrm_critical_coupling(double eps, double delta) {
    if (eps <= 0.0 || delta <= 0.0)
        throw std::invalid_argument("qrm_critical_coupling: eps, delta must be positive");
    const double gc0 = std::sqrt(eps * delta);
    const double gc = 2.0 * std::sqrt(eps * eps +
                                      std::sqrt(std::pow(eps, 4) + std::pow(gc0 / 2.0, 4)));
    return {gc0, gc};
}

double perturbative_alpha_c(double delta, double omega_c) {
    if (omega_c <= 0.0) throw std::invalid_argument("perturbative_alpha_c: omega_c <= 0");
    return 1.0 + delta / (2.0 * omega_c);
}

} // namespace sbvar
