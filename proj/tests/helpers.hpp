#pragma once

#include <random>

#include <sbvar/ansatz.hpp>
#include <sbvar/fock.hpp>
#include <sbvar/model.hpp>

namespace sbvar::test {

inline VariationalState random_state(int n_polarons, int n_modes, std::mt19937_64& rng,
                                     double alpha_max = 2.0) {
    std::uniform_real_distribution<double> uk(-0.7, 0.2), uth(-3.0, 3.0),
        ua(-alpha_max / 1.5, alpha_max / 1.5);
    VariationalState vs;
    vs.n_modes = n_modes;
    for (int sector = 0; sector < 2; ++sector) {
        auto& list = (sector == 0) ? vs.up : vs.down;
        for (int p = 0; p < n_polarons; ++p) {
            PolaronBranch b;
            b.kappa = uk(rng);
            b.theta = uth(rng);
            b.alpha.resize(n_modes);
            for (int k = 0; k < n_modes; ++k) b.alpha[k] = Complex(ua(rng), ua(rng));
            list.push_back(std::move(b));
        }
    }
    return vs;
}

inline SpinBosonParams random_params(int n_modes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.3, 2.0), ue(0.2, 2.5), ug(-1.5, 1.5);
    SpinBosonParams p;
    p.delta = ud(rng);
    p.eps.resize(n_modes);
    p.g.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        p.eps[k] = ue(rng);
        p.g[k] = ug(rng);
    }
    return p;
}

/// Fock embedding of the state at flat parameters x (for finite-difference
/// tangent vectors).
inline Eigen::VectorXcd embed(const Eigen::VectorXd& x, int n_polarons, int n_modes,
                              const FockSpace& space) {
    const auto vs = VariationalState::unflatten(x, n_polarons, n_modes);
    return ansatz_to_fock(vs, space).state.amplitudes;
}

} // namespace sbvar::test
