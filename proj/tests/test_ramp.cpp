#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>
#include <sbvar/ramp.hpp>

using namespace sbvar;

TEST_CASE("linear ramp endpoints and slope") {
    const auto p = RampProtocol::linear(4.0);
    CHECK(p.scale(0.0) == 0.0);
    CHECK(p.scale(4.0) == 1.0);
    CHECK(p.scale(1.0) == doctest::Approx(0.25));
    CHECK_THROWS(p.scale(-0.5));
    CHECK_THROWS(p.scale(4.5));
    CHECK_THROWS(RampProtocol::linear(0.0));
}

TEST_CASE("CRAB ramp: endpoints, zero coefficients, rejection") {
    const int m = 4;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m), b = Eigen::VectorXd::Zero(m);
    std::vector<int> r = {0, 1, 0, 1};
    const auto flat = RampProtocol::crab(10.0, a, b, r);
    // all-zero coefficients reduce to the linear carrier
    for (double t : {0.0, 1.3, 5.5, 10.0})
        CHECK(flat.scale(t) == doctest::Approx(t / 10.0));

    a << 0.3, -0.2, 0.1, 0.05;
    b << 0.2, 0.1, -0.05, 0.0;
    const auto p = RampProtocol::crab(10.0, a, b, r);
    CHECK(p.scale(0.0) == doctest::Approx(0.0));
    CHECK(p.scale(10.0) == 1.0); // exact endpoint by normalization
    // explicit evaluation at an interior point
    const double t = 3.7;
    double f = 1.0;
    for (int j = 0; j < m; ++j) {
        const double nu = 2.0 * M_PI * (j + 1) * (1 + r[j]) / 10.0;
        f += a[j] * std::sin(nu * t) + b[j] * std::cos(nu * t);
    }
    CHECK(p.scale(t) == doctest::Approx((t / 10.0) * f / (1.0 + b.sum())));

    // vanishing normalization rejected
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(m);
    bad[0] = -1.0;
    CHECK_THROWS(RampProtocol::crab(10.0, a, bad, r));
}

TEST_CASE("local-adiabatic table: monotone interpolation and endpoint") {
    // dg/dt = gap^2/gamma with constant gap G: g(t) = G^2 t / gamma,
    // t_f = gamma g_f / G^2
    const double G = 0.5, gamma = 8.0, gf = 2.0;
    const auto p = local_adiabatic_table([&](double) { return G; }, gf, gamma, 101);
    CHECK(p.t_f() == doctest::Approx(gamma * gf / (G * G)).epsilon(1e-10));
    CHECK(p.scale(0.0) == doctest::Approx(0.0));
    CHECK(p.scale(p.t_f()) == 1.0);
    CHECK(p.scale(0.5 * p.t_f()) == doctest::Approx(0.5).epsilon(1e-6));

    // monotone: no overshoot anywhere
    double prev = -1e-12;
    for (int i = 0; i <= 1000; ++i) {
        const double s = p.scale(p.t_f() * i / 1000.0);
        CHECK(s >= prev - 1e-12);
        CHECK(s <= 1.0 + 1e-12);
        prev = s;
    }

    // gamma doubled -> t_f doubled (same path)
    const auto p2 = local_adiabatic_table([&](double) { return G; }, gf, 2 * gamma, 101);
    CHECK(p2.t_f() == doctest::Approx(2 * p.t_f()).epsilon(1e-10));

    // vanishing gap on the path rejected
    CHECK_THROWS(local_adiabatic_table([](double g) { return 1.0 - g; }, 1.0, 1.0, 11));
}

TEST_CASE("ramp JSON round trip") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Eigen::VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    const auto crab = RampProtocol::crab(7.0, a, b, {1, 0, 1});
    const auto crab2 = RampProtocol::from_json(crab.to_json());
    for (double t : {0.0, 1.0, 3.3, 7.0})
        CHECK(crab.scale(t) == crab2.scale(t));

    const auto lin = RampProtocol::linear(2.0);
    CHECK(RampProtocol::from_json(lin.to_json()).scale(1.7) == lin.scale(1.7));

    const auto la = local_adiabatic_table([](double) { return 1.0; }, 1.0, 3.0, 21);
    const auto la2 = RampProtocol::from_json(la.to_json());
    for (double t : {0.0, 0.4, 2.9})
        CHECK(la.scale(t) == doctest::Approx(la2.scale(t)).epsilon(1e-14));
}
