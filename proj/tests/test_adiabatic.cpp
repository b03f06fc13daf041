#include <doctest.h>

#include <cmath>

#include <sbvar/adiabatic.hpp>

using namespace sbvar;

namespace {

SpinBosonParams qrm(double g) {
    SpinBosonParams p;
    p.delta = 1.0;
    p.eps = Eigen::VectorXd::Constant(1, 0.15);
    p.g = Eigen::VectorXd::Constant(1, g);
    return p;
}

GapScan synthetic_scan() {
    GapScan scan;
    scan.n_modes = 1;
    scan.couplings.resize(3);
    scan.couplings << 0.0, 0.5, 1.0;
    scan.gap.resize(3);
    scan.gap << 1.0, 0.5, 1.0;
    scan.matrix_element.resize(3);
    scan.matrix_element << 0.1, 0.4, 0.2;
    return scan;
}

} // namespace

TEST_CASE("gap_scan: decoupled limit gives the two-phonon gap") {
    const FockSpace space(1, 40);
    const auto scan = gap_scan(qrm(0.6), space, 0.0, 1.0, 11);
    REQUIRE(scan.couplings.size() == 11);
    // at zero coupling the lowest excitation of the same parity as the
    // ground state |-x, 0> is |-x, 2>
    CHECK(scan.gap[0] == doctest::Approx(0.3).epsilon(1e-10));
    // sigma_z x has no diagonal element between two |-x> states
    CHECK(scan.matrix_element[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    for (int i = 0; i < scan.gap.size(); ++i) {
        CHECK(scan.gap[i] > 0.0);
        CHECK(std::isfinite(scan.matrix_element[i]));
    }
}

TEST_CASE("gap_scan: super-critical ramp has an interior gap minimum") {
    const FockSpace space(1, 60);
    const auto scan = gap_scan(qrm(0.6), space, 0.0, 1.0, 41);
    const auto cg = critical_gap(scan, 0.0, 1.0);
    CHECK(cg.coupling > 0.0);
    CHECK(cg.coupling < 1.0);
    CHECK(cg.gap < scan.gap[0]);
    CHECK(cg.gap < scan.gap[scan.gap.size() - 1]);
    // crossover coupling estimate: the minimum sits near g_c / g_final
    const auto qc = qrm_critical_coupling(0.15, 1.0);
    CHECK(cg.coupling * 0.6 == doctest::Approx(qc.g_c).epsilon(0.15));
    CHECK_THROWS_AS((void)critical_gap(scan, 2.0, 3.0), std::invalid_argument);
}

TEST_CASE("adiabatic_tf_bound: max element over squared minimum gap") {
    const auto scan = synthetic_scan();
    const auto b = adiabatic_tf_bound(scan, 0.2);
    CHECK(b.t_f == doctest::Approx(0.4 / (2.0 * 0.25 * 0.2)));
    CHECK(b.at_coupling == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)adiabatic_tf_bound(scan, 0.0), std::invalid_argument);
}

TEST_CASE("adiabaticity_gamma: linear ramp over a flat scan") {
    GapScan scan;
    scan.couplings.resize(2);
    scan.couplings << 0.0, 1.0;
    scan.gap.resize(2);
    scan.gap << 0.8, 0.8;
    scan.matrix_element.resize(2);
    scan.matrix_element << 0.3, 0.3;
    const double t_f = 25.0;
    const auto lin = RampProtocol::linear(t_f);
    // sdot = 1/t_f everywhere, so gamma = gap^2 t_f / 0.3
    const double expected = 0.8 * 0.8 * t_f / 0.3;
    CHECK(adiabaticity_gamma(scan, lin) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("linear_fit_extrapolate recovers an exact line") {
    Eigen::VectorXd xs(4), ys(4);
    xs << 1.0, 0.5, 0.25, 0.125;
    for (int i = 0; i < 4; ++i) ys[i] = 0.7 - 0.3 * xs[i];
    const auto f = linear_fit_extrapolate(xs, ys, 0.0);
    CHECK(f.fit.slope == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(f.predicted == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(f.fit.residual_rms < 1e-12);
}
