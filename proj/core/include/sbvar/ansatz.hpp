#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sbvar/model.hpp"

namespace sbvar {

using Complex = std::complex<double>;

/// One displaced-vacuum branch e^{kappa + i theta} D(alpha)|s, 0>.
struct PolaronBranch {
    double kappa = 0.0;
    double theta = 0.0;
    Eigen::VectorXcd alpha;

    Complex weight() const { return std::exp(Complex(kappa, theta)); }
};

/// Multipolaron ansatz: N_p branches attached to each spin sector.
/// Flat real-parameter layout (length M = 2 N_p (2 + 2N)): branch-major,
/// all up-branches then all down-branches, within a branch
/// [kappa, theta, Re alpha_1..N, Im alpha_1..N].
struct VariationalState {
    std::vector<PolaronBranch> up;
    std::vector<PolaronBranch> down;
    int n_modes = 0;

    int n_polarons() const { return static_cast<int>(up.size()); }
    int params_per_branch() const { return 2 + 2 * n_modes; }
    int n_params() const { return 2 * n_polarons() * params_per_branch(); }

    Eigen::VectorXd flatten() const;
    static VariationalState unflatten(const Eigen::VectorXd& x, int n_polarons, int n_modes);

    /// Throws if two branches within a spin sector coincide to machine
    /// precision (degenerate equations of motion).
    void check_degeneracy(double tol = 1e-14) const;

    nlohmann::json to_json() const;
    static VariationalState from_json(const nlohmann::json& j);
};

enum class ObsTag {
    sigma_x, sigma_y, sigma_z,
    mode_occupation,   // n_k
    quadrature,        // x_k = b_k^dag + b_k
    quadrature_sq,     // x_k^2
    hamiltonian,       // H
    hamiltonian_sq,    // H^2
    parity             // exp(i pi N_ex)
};

struct Observable {
    ObsTag tag;
    int k = -1; // mode index where applicable

    static Observable sigma_x() { return {ObsTag::sigma_x}; }
    static Observable sigma_y() { return {ObsTag::sigma_y}; }
    static Observable sigma_z() { return {ObsTag::sigma_z}; }
    static Observable n_k(int k) { return {ObsTag::mode_occupation, k}; }
    static Observable x_k(int k) { return {ObsTag::quadrature, k}; }
    static Observable x2_k(int k) { return {ObsTag::quadrature_sq, k}; }
    static Observable hamiltonian() { return {ObsTag::hamiltonian}; }
    static Observable hamiltonian_sq() { return {ObsTag::hamiltonian_sq}; }
    static Observable parity() { return {ObsTag::parity}; }

    std::string name() const;
    static Observable from_name(const std::string& s);
};

/// <alpha|beta> = exp(sum_k a_k^* b_k - |a_k|^2/2 - |b_k|^2/2).
Complex coherent_overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Unnormalized overlap <a|b> between two ansatz states.
Complex braket(const VariationalState& a, const VariationalState& b);

double norm_squared(const VariationalState& vs);

/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const VariationalState& a, const VariationalState& b);

/// Normalized expectation value; real part is the physical value for
/// Hermitian observables.
Complex expect(const VariationalState& vs, const Observable& obs,
               const SpinBosonParams& params, double coupling_scale = 1.0);

/// Hermitian M x M matrix of tangent-vector overlaps <v_mu|v_nu>.
Eigen::MatrixXcd gram_matrix(const VariationalState& vs);

/// Raw ingredients of the equations of motion.
struct GradientData {
    Eigen::VectorXcd h_overlap; // <v_mu|H|psi>
    Eigen::VectorXcd s_overlap; // <v_mu|psi>
    double norm2 = 0.0;         // <psi|psi>
    Complex energy_raw;         // <psi|H|psi> (unnormalized)

    double energy() const { return energy_raw.real() / norm2; }

    /// d<H>/dx_mu at fixed normalization: 2 Re <v_mu|H|psi>.
    Eigen::VectorXd grad_E() const;
    /// d(E/<psi|psi>)/dx_mu: 2 Re[<v_mu|H|psi> - eps <v_mu|psi>] / <psi|psi>.
    Eigen::VectorXd grad_eps() const;
};

GradientData energy_gradient(const VariationalState& vs, const SpinBosonParams& params,
                             double coupling_scale = 1.0);

/// Shifts all kappa so that <psi|psi> = 1; returns the applied offset.
double renormalize(VariationalState& vs);

enum class SpinInit { up, down, plus, minus };

SpinInit spin_init_from_name(const std::string& s);
std::string spin_init_name(SpinInit s);

/// Encodes the requested spin state with every parameter perturbed by an
/// independent uniform draw in [0, perturbation]; deterministic in seed.
VariationalState seed_random(int n_polarons, int n_modes, SpinInit init,
                             std::uint64_t seed, double perturbation = 0.01);

/// Like seed_random for plus/minus spin states, but only the up-sector
/// branches are perturbed; the down sector mirrors them (alpha -> -alpha,
/// theta shifted by pi for minus). The result is an exact parity eigenstate
/// for any perturbation, and since the mirror map commutes with the dynamics
/// the parity stays pinned during time evolution.
VariationalState seed_symmetric(int n_polarons, int n_modes, SpinInit init,
                                std::uint64_t seed, double perturbation = 0.01);

} // namespace sbvar
