#include <doctest.h>

#include <cmath>

#include <sbvar/crab.hpp>
#include <sbvar/tdvp.hpp>

using namespace sbvar;

namespace {

CrabProblem small_problem() {
    CrabProblem p;
    p.params.delta = 1.0;
    p.params.eps = Eigen::VectorXd::Constant(1, 0.15);
    p.params.g = Eigen::VectorXd::Constant(1, 0.4);
    p.n_polarons = 2;
    p.t_f = 6.0;
    p.n_harmonics = 2;
    p.seed = 17;
    p.tdvp_cfg.dt_out = 0.5;
    p.tdvp_cfg.leakage_every = 0;
    p.tdvp_cfg.max_time = p.t_f;

    TdvpConfig gcfg;
    gcfg.mode = TdvpMode::imaginary;
    gcfg.max_time = 150.0;
    gcfg.stop_grad_norm = 1e-7;
    gcfg.dt_out = 1.0;
    gcfg.max_restart_attempts = 3;
    const auto gs = imaginary_groundstate(p.params, 2, gcfg, 23);
    REQUIRE(gs.converged);
    p.target = gs.state;
    return p;
}

} // namespace

TEST_CASE("nelder_mead minimizes a shifted quadratic deterministically") {
    Eigen::VectorXd c(3);
    c << 0.4, -1.2, 2.0;
    auto f = [&](const Eigen::VectorXd& x) { return (x - c).squaredNorm(); };
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);

    const auto r1 = nelder_mead(f, x0, 0.5, 600, 1e-14);
    CHECK(r1.best_f < 1e-10);
    CHECK((r1.best_x - c).norm() < 1e-5);
    CHECK(r1.evaluations <= 600);
    CHECK(r1.history.size() == static_cast<std::size_t>(r1.evaluations));

    const auto r2 = nelder_mead(f, x0, 0.5, 600, 1e-14);
    CHECK(r1.evaluations == r2.evaluations);
    CHECK(r1.best_x == r2.best_x);

    CHECK_THROWS_AS((void)nelder_mead(f, x0, 0.5, 2, 1e-14), std::invalid_argument);
}

TEST_CASE("frozen random bits are deterministic in the seed") {
    CrabProblem a, b;
    a.n_harmonics = b.n_harmonics = 6;
    a.seed = b.seed = 99;
    a.freeze_random_bits();
    b.freeze_random_bits();
    REQUIRE(a.r.size() == 6);
    CHECK(a.r == b.r);
    for (int bit : a.r) CHECK((bit == 0 || bit == 1));

    CrabProblem c = b;
    c.r.clear();
    c.seed = 100;
    c.freeze_random_bits();
    CHECK(c.r != a.r); // overwhelmingly likely for 6 bits; fixed seeds make it exact
}

TEST_CASE("zero coefficients reproduce the linear ramp") {
    CrabProblem p;
    p.n_harmonics = 3;
    p.t_f = 7.0;
    p.seed = 5;
    p.freeze_random_bits();
    const auto proto = p.make_protocol(Eigen::VectorXd::Zero(6));
    const auto lin = RampProtocol::linear(7.0);
    for (double t : {0.0, 1.3, 3.5, 6.2, 7.0})
        CHECK(proto.scale(t) == doctest::Approx(lin.scale(t)).epsilon(1e-14));
    CHECK_THROWS_AS((void)p.make_protocol(Eigen::VectorXd::Zero(5)),
                    std::invalid_argument);
}

TEST_CASE("optimize_ramp does not do worse than the linear ramp") {
    auto p = small_problem();
    p.freeze_random_bits();
    const double f_linear = crab_objective(p, Eigen::VectorXd::Zero(4));
    CHECK(f_linear > 0.0);
    CHECK(f_linear < 1.0);

    const auto opt = optimize_ramp(p, 40, 0.2);
    CHECK(opt.best_infidelity <= f_linear + 1e-12);
    CHECK(opt.evaluations <= 40);
    CHECK(opt.aborted_evals == 0);
    CHECK(opt.history.size() == static_cast<std::size_t>(opt.evaluations));
    CHECK(opt.best_protocol.kind() == RampKind::crab);
    CHECK(opt.best_protocol.scale(p.t_f) == doctest::Approx(1.0));
}

TEST_CASE("benchmark_protocols reports infidelity and integrated leakage") {
    auto p = small_problem();
    p.freeze_random_bits();
    const auto rows = benchmark_protocols(
        p, {{"linear", RampProtocol::linear(p.t_f)}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].protocol == "linear");
    CHECK(rows[0].t_f == doctest::Approx(p.t_f));
    CHECK(rows[0].infidelity >= 0.0);
    CHECK(rows[0].infidelity < 1.0);
    CHECK(rows[0].leakage_integral >= 0.0);
    CHECK(std::isfinite(rows[0].leakage_integral));
    CHECK(std::isnan(rows[0].max_inst_infidelity));
}
