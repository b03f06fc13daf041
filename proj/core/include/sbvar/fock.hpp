#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <optional>
#include <vector>

#include "sbvar/ansatz.hpp"
#include "sbvar/model.hpp"
#include "sbvar/ramp.hpp"

namespace sbvar {

/// Truncated spin (x) Fock Hilbert space. Basis enumeration is a fixed
/// bijection: spin index major (0 = up, 1 = down), then mode occupations
/// (n_1, ..., n_N) in lexicographic order with n_N fastest.
struct FockSpace {
    int n_modes;
    int cutoff; // occupations 0 .. cutoff-1

    FockSpace(int n_modes_, int cutoff_);

    std::int64_t boson_dim() const;
    std::int64_t dim() const { return 2 * boson_dim(); }

    std::int64_t index(int spin, const std::vector<int>& occ) const;
    void decode(std::int64_t idx, int& spin, std::vector<int>& occ) const;
};

struct FockState {
    const FockSpace* space = nullptr;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
    void normalize();
};

/// Sparse real-symmetric Hamiltonian matrix for the spin-boson model with
/// all couplings multiplied by coupling_scale.
Eigen::SparseMatrix<double> build_hamiltonian(const SpinBosonParams& params,
                                              const FockSpace& space,
                                              double coupling_scale = 1.0);

/// Coupling part alone, -1/2 sigma_z sum_k g_k (b_k^dag + b_k); H(t) is
/// H(0-couplings) + scale(t) * this.
Eigen::SparseMatrix<double> build_coupling_term(const SpinBosonParams& params,
                                                const FockSpace& space);

/// <e^{i pi N_ex}> with N_ex = (sigma_x + 1)/2 + sum_k n_k.
double parity_expectation(const FockState& state);

/// Applies the parity operator (cheap; used for parity-resolving spectra).
Eigen::VectorXcd apply_parity(const FockSpace& space, const Eigen::VectorXcd& v);

struct SpectrumSlice {
    Eigen::VectorXd eigenvalues;        // ascending
    std::vector<int> parities;          // +1 / -1 per level
    std::vector<Eigen::VectorXd> eigenvectors; // real eigenvectors (H is real symmetric)

    /// E_j - E_0 for the lowest excited level sharing the ground-state parity.
    double relevant_gap() const;
    /// Index of that level.
    int relevant_index() const;
};

/// k lowest eigenpairs with parities attached. Dense solve for small
/// dimensions, Lanczos with full reorthogonalization above dense_threshold.
SpectrumSlice lowest_eigenpairs(const Eigen::SparseMatrix<double>& h,
                                const FockSpace& space, int k,
                                std::int64_t dense_threshold = 3200);

struct FockTrajectory {
    std::vector<double> times;
    std::vector<FockState> states;
    double max_norm_drift = 0.0;
};

/// Integrates i d|psi>/dt = H(t)|psi> with adaptive error control,
/// recording on a uniform grid of dt_out spacing (plus the endpoint).
FockTrajectory propagate(const FockState& initial, const SpinBosonParams& params,
                         const RampProtocol* schedule, double t_f, double dt_out,
                         double abs_tol = 1e-10, double rel_tol = 1e-10);

struct FockConversion {
    FockState state;
    double truncation_bound; // estimated weight outside the truncated space
};

/// Expands the multipolaron ansatz in the truncated Fock basis. Requires
/// |alpha_k|^2 <= cutoff/4 per mode of every branch.
FockConversion ansatz_to_fock(const VariationalState& vs, const FockSpace& space);

/// |<fock|ansatz>|^2 / (<fock|fock><ansatz|ansatz>).
double fidelity(const FockState& a, const VariationalState& b);
double fidelity(const FockState& a, const FockState& b);

/// Fock-space expectation of an Observable (oracle counterpart of expect()).
Complex fock_expect(const FockState& state, const Observable& obs,
                    const SpinBosonParams& params, double coupling_scale = 1.0);

} // namespace sbvar
