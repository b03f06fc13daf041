#include "sbvar/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbvar {

IonDriveParams ion_map(const SpinBosonParams& target, const Eigen::VectorXd& eta) {
    if (eta.size() != target.eps.size())
        throw std::invalid_argument("ion_map: eta length mismatch");
    if ((eta.array() <= 0.0).any())
        throw std::invalid_argument("ion_map: Lamb-Dicke parameters must be positive");

    const int n = target.n_modes();
    IonDriveParams d;
    d.delta_drive = 4.0 * target.delta;
    d.delta_blue.resize(n);
    d.delta_red.resize(n);
    d.omega_rabi.resize(n);
    for (int k = 0; k < n; ++k) {
        // delta_b + delta_r = delta, delta_b - delta_r = 2 eps_k
        d.delta_blue[k] = d.delta_drive / 2.0 + target.eps[k];
        d.delta_red[k] = d.delta_drive / 2.0 - target.eps[k];
        d.omega_rabi[k] = -target.g[k] / eta[k];
    }

    // RWA sanity margin: Rabi frequencies should stay small against the
    // detuning spacing, otherwise the sideband picture degrades.
    double min_spacing = std::numeric_limits<double>::infinity();
    for (int k = 1; k < n; ++k)
        min_spacing = std::min(min_spacing, std::abs(target.eps[k] - target.eps[k - 1]));
    if (n == 1) min_spacing = target.eps[0];
    for (int k = 0; k < n; ++k)
        if (std::abs(d.omega_rabi[k]) >= min_spacing / 10.0) d.rwa_warning = true;
    return d;
}

SpinBosonParams ion_map_forward(const IonDriveParams& drive, const Eigen::VectorXd& eta) {
    const int n = static_cast<int>(eta.size());
    SpinBosonParams p;
    p.delta = drive.delta_drive / 4.0;
    p.eps.resize(n);
    p.g.resize(n);
    for (int k = 0; k < n; ++k) {
        p.eps[k] = 0.5 * (drive.delta_blue[k] - drive.delta_red[k]);
        p.g[k] = -eta[k] * drive.omega_rabi[k];
    }
    return p;
}

} // namespace sbvar
