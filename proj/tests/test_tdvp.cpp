#include <doctest.h>

#include <cmath>
#include <random>

#include <sbvar/diagnostics.hpp>
#include <sbvar/fock.hpp>
#include <sbvar/tdvp.hpp>

#include "helpers.hpp"

using namespace sbvar;

TEST_CASE("eom_rhs: well-posed on seeded states, instability flag on garbage") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 0.15);
    p.g = Eigen::VectorXd::Constant(1, 0.3);
    const auto vs = seed_random(2, 1, SpinInit::minus, 9);
    const auto er = eom_rhs(vs, p, 1.0, TdvpMode::imaginary);
    CHECK(er.xdot.allFinite());
    CHECK_FALSE(er.unstable);
    CHECK(er.grad_norm > 0.0);
    CHECK(er.residual <= 1e-6 * er.grad_norm);
}

TEST_CASE("imaginary time: decoupled spin relaxes to the sigma_x ground state") {
    SpinBosonParams p;
    p.delta = 1.3;
    p.eps = Eigen::VectorXd::Constant(1, 1.0);
    p.g = Eigen::VectorXd::Zero(1);
    TdvpConfig cfg;
    cfg.mode = TdvpMode::imaginary;
    cfg.max_time = 40.0;
    cfg.stop_grad_norm = 1e-9;
    cfg.dt_out = 0.5;
    const auto r = imaginary_groundstate(p, 1, cfg, 4, 1.0, SpinInit::plus);
    CHECK(r.converged);
    CHECK(r.energy == doctest::Approx(-0.5 * p.delta).epsilon(1e-8));
    CHECK(r.var_h < 1e-8);
    CHECK(expect(r.state, Observable::sigma_x(), p).real() ==
          doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("imaginary time: QRM ground energy matches ED") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 0.15);
    p.g = Eigen::VectorXd::Constant(1, 0.4);
    const FockSpace space(1, 50);
    const auto slice = lowest_eigenpairs(build_hamiltonian(p, space), space, 2);

    TdvpConfig cfg;
    cfg.mode = TdvpMode::imaginary;
    cfg.max_time = 200.0;
    cfg.stop_grad_norm = 1e-8;
    cfg.dt_out = 1.0;
    cfg.max_restart_attempts = 3;
    const auto r = imaginary_groundstate(p, 3, cfg, 11);
    CHECK(r.converged);
    // the N_p=3 ansatz is variational: a few 1e-6 relative above ED
    CHECK(r.energy ==
          doctest::Approx(slice.eigenvalues[0]).epsilon(2e-5));
    CHECK(r.energy >= slice.eigenvalues[0] - 1e-10);
    // energy variance small at the converged optimum
    CHECK(r.var_h < 1e-4);
    // ground state carries parity +1
    CHECK(expect(r.state, Observable::parity(), p).real() ==
          doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("real time: norm, energy, and parity conserved on a quench") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 1.0);
    p.g = Eigen::VectorXd::Constant(1, 0.8);
    TdvpConfig cfg;
    cfg.mode = TdvpMode::real;
    cfg.max_time = 8.0;
    cfg.dt_out = 0.1;
    cfg.leakage_every = 10;
    const auto vs0 = seed_random(3, 1, SpinInit::minus, 21);
    const auto trace = evolve(vs0, p, nullptr, cfg,
                              {Observable::sigma_x(), Observable::parity()});
    REQUIRE(trace.times.size() == 81);
    const double e0 = trace.energy.front();
    const double par0 = trace.observables.at("parity").front();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        CHECK(std::abs(trace.norm2[i] - 1.0) < 1e-8);
        CHECK(std::abs(trace.energy[i] - e0) < 1e-8);
        // parity is conserved only up to the projection error of the
        // variational manifold, not to integrator accuracy
        CHECK(std::abs(trace.observables.at("parity")[i] - par0) < 1e-5);
    }
}

TEST_CASE("real time tracks the Fock oracle on a single-mode quench") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 1.0);
    p.g = Eigen::VectorXd::Constant(1, 0.9);
    TdvpConfig cfg;
    cfg.mode = TdvpMode::real;
    cfg.max_time = 5.0;
    cfg.dt_out = 0.25;
    const auto vs0 = seed_random(3, 1, SpinInit::minus, 33, 0.2);
    const auto trace = evolve(vs0, p, nullptr, cfg, {Observable::sigma_x()});

    const FockSpace space(1, 30);
    auto psi0 = ansatz_to_fock(vs0, space).state;
    psi0.normalize();
    const auto ref = propagate(psi0, p, nullptr, 5.0, 0.25);
    REQUIRE(ref.times.size() == trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double sx_ref =
            fock_expect(ref.states[i], Observable::sigma_x(), p).real();
        CHECK(trace.observables.at("sigma_x")[i] ==
              doctest::Approx(sx_ref).epsilon(2e-3).scale(1.0));
        CHECK(fidelity(ref.states[i], trace.states[i]) > 0.999);
    }
}

TEST_CASE("leakage matches the exact residual norm in Fock space") {
    std::mt19937_64 rng(47);
    const int np = 2, nm = 1;
    const FockSpace space(1, 30);
    const auto vs = test::random_state(np, nm, rng, 1.0);
    auto p = test::random_params(nm, rng);

    const auto er = eom_rhs(vs, p, 1.0, TdvpMode::real);
    REQUIRE_FALSE(er.unstable);
    const double lam = leakage(vs, er.xdot, p, 1.0);

    // oracle: psi_dot = sum xdot_mu v_mu via central differences of the
    // Fock embedding; Lambda = ||psi_dot + i H psi|| / ||psi||
    const Eigen::VectorXd x0 = vs.flatten();
    const double h = 1e-5;
    Eigen::VectorXcd psi_dot = Eigen::VectorXcd::Zero(space.dim());
    for (int mu = 0; mu < x0.size(); ++mu) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[mu] += h;
        xm[mu] -= h;
        psi_dot += er.xdot[mu] *
                   (test::embed(xp, np, nm, space) - test::embed(xm, np, nm, space)) /
                   (2.0 * h);
    }
    const Eigen::VectorXcd psi = test::embed(x0, np, nm, space);
    const Eigen::MatrixXd hmat(build_hamiltonian(p, space, 1.0));
    const Eigen::VectorXcd resid = psi_dot + Complex(0, 1) * (hmat * psi);
    const double lam_ref = resid.norm() / psi.norm();
    CHECK(lam == doctest::Approx(lam_ref).epsilon(1e-4).scale(1e-6));
}

TEST_CASE("instability restart: reseed callback is honored") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 1.0);
    p.g = Eigen::VectorXd::Constant(1, 0.5);
    TdvpConfig cfg;
    cfg.mode = TdvpMode::real;
    cfg.max_time = 1.0;
    cfg.dt_out = 0.1;
    cfg.max_restart_attempts = 2;
    // an overflowing branch weight produces non-finite equations of motion
    // on the very first evaluation
    auto bad = seed_random(2, 1, SpinInit::minus, 5);
    bad.up[0].kappa = 400.0;
    int calls = 0;
    const auto trace = evolve(bad, p, nullptr, cfg, {}, 1.0, [&](int attempt) {
        ++calls;
        return seed_random(2, 1, SpinInit::minus, 100 + attempt);
    });
    CHECK(calls >= 1);
    CHECK(trace.restarts_used >= 1);
    CHECK(trace.times.size() == 11);
}

TEST_CASE("fidelity lower bound stays below the measured Fock fidelity") {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 1.0);
    p.g = Eigen::VectorXd::Constant(1, 1.2);
    TdvpConfig cfg;
    cfg.mode = TdvpMode::real;
    cfg.max_time = 4.0;
    cfg.dt_out = 0.1;
    cfg.leakage_every = 1;
    const auto vs0 = seed_random(2, 1, SpinInit::minus, 55, 1e-3);
    const auto trace = evolve(vs0, p, nullptr, cfg, {});

    const FockSpace space(1, 40);
    auto psi0 = ansatz_to_fock(vs0, space).state;
    psi0.normalize();
    const auto ref = propagate(psi0, p, nullptr, 4.0, 0.1);
    const auto bound = fidelity_bound(trace);
    REQUIRE(bound.size() == trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double f = fidelity(ref.states[i], trace.states[i]);
        CHECK(bound[i] <= f + 1e-9);
        CHECK(bound[i] >= 0.0);
        if (i) CHECK(bound[i] <= bound[i - 1] + 1e-12);
    }
}
