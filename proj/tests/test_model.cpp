#include <doctest.h>

#include <cmath>
#include <random>

#include <sbvar/model.hpp>

using namespace sbvar;

TEST_CASE("ohmic discretization") {
    const auto p = ohmic_discretization(0.1, 10.0, 4, 1.0);
    REQUIRE(p.n_modes() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(p.eps[k] == doctest::Approx(10.0 * (k + 1) / 4.0));
        CHECK(p.g[k] == doctest::Approx(std::sqrt(2.0 * 0.1 * 10.0 * p.eps[k] / 4.0)));
    }
    // N=1 reduces to g = sqrt(2 alpha) omega_c, eps = omega_c
    const auto q = ohmic_discretization(0.3, 2.5, 1);
    CHECK(q.eps[0] == doctest::Approx(2.5));
    CHECK(q.g[0] == doctest::Approx(std::sqrt(2.0 * 0.3) * 2.5));
}

TEST_CASE("tanh coupling profiles") {
    const int n = 11;
    const double gbar = 1.0;
    const auto gp = tanh_profiles(gbar, n, +1);
    const auto gm = tanh_profiles(gbar, n, -1);
    REQUIRE(gp.size() == n);
    const int mid = (n + 1) / 2; // k = 1..N convention
    for (int k = 1; k <= n; ++k) {
        CHECK(gp[k - 1] ==
              doctest::Approx(0.5 * gbar * std::tanh(0.25 * (k - mid)) + gbar));
        CHECK(gm[k - 1] ==
              doctest::Approx(0.5 * gbar * std::tanh(-0.25 * (k - mid)) + gbar));
    }
    // mirror symmetry about the central mode
    for (int k = 0; k < n; ++k)
        CHECK(gp[k] == doctest::Approx(gm[n - 1 - k]));
    // center value equals gbar
    CHECK(gp[mid - 1] == doctest::Approx(gbar));
}

TEST_CASE("QRM critical couplings") {
    const auto c = qrm_critical_coupling(0.15, 1.0);
    CHECK(c.g_c0 == doctest::Approx(std::sqrt(0.15)));
    const double expected =
        2.0 * std::sqrt(0.15 * 0.15 +
                        std::sqrt(std::pow(0.15, 4) + std::pow(c.g_c0 / 2.0, 4)));
    CHECK(c.g_c == doctest::Approx(expected));
    CHECK(c.g_c == doctest::Approx(0.5147).epsilon(1e-3));
    // degenerate spin limit: eps -> 0 gives g_c -> sqrt(2) g_c0
    const auto d = qrm_critical_coupling(1e-9, 1.0);
    CHECK(d.g_c == doctest::Approx(std::sqrt(2.0) * d.g_c0).epsilon(1e-3));
}

TEST_CASE("perturbative critical Ohmic coupling") {
    CHECK(perturbative_alpha_c(1.0, 0.125) == doctest::Approx(5.0));
    CHECK(perturbative_alpha_c(0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("ion mapping round trip is exact") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0), ug(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        SpinBosonParams p;
        p.delta = u(rng);
        p.eps.resize(n);
        p.g.resize(n);
        Eigen::VectorXd eta(n);
        for (int k = 0; k < n; ++k) {
            p.eps[k] = u(rng);
            p.g[k] = ug(rng);
            eta[k] = 0.05 + 0.2 * u(rng);
        }
        const auto drive = ion_map(p, eta);
        CHECK(drive.delta_drive == 4.0 * p.delta);
        for (int k = 0; k < n; ++k)
            CHECK(drive.delta_blue[k] + drive.delta_red[k] ==
                  doctest::Approx(drive.delta_drive / 2.0 * 2.0));
        const auto back = ion_map_forward(drive, eta);
        CHECK(back.delta == p.delta);
        CHECK((back.eps - p.eps).norm() <= 1e-14 * p.eps.norm());
        CHECK((back.g - p.g).norm() <= 1e-14 * p.g.norm());
    }
    // Delta = 0: delta = 0, blue = -red = eps_k
    SpinBosonParams p;
    p.delta = 0.0;
    p.eps = Eigen::VectorXd::Constant(1, 1.5);
    p.g = Eigen::VectorXd::Constant(1, 0.3);
    const auto d0 = ion_map(p, Eigen::VectorXd::Constant(1, 0.1));
    CHECK(d0.delta_drive == 0.0);
    CHECK(d0.delta_blue[0] == doctest::Approx(1.5));
    CHECK(d0.delta_red[0] == doctest::Approx(-1.5));
    // eta = 0 rejected
    CHECK_THROWS(ion_map(p, Eigen::VectorXd::Zero(1)));
}
