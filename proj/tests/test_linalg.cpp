#include <doctest.h>

#include <sbvar/linalg.hpp>

using namespace sbvar;

TEST_CASE("pseudo-inverse solve: exact on well-conditioned systems") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    Eigen::VectorXd x_true(3);
    x_true << 1, -2, 0.5;
    const auto r = pinv_solve(a, a * x_true, 1e-12);
    CHECK((r.x - x_true).norm() < 1e-12);
    CHECK(r.rank == 3);
    CHECK(r.residual < 1e-12);
}

TEST_CASE("pseudo-inverse solve: rank-deficient system") {
    // singular matrix: second row = 2 * first row
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 4;
    Eigen::VectorXd b(2);
    b << 1, 2; // consistent
    const auto r = pinv_solve(a, b, 1e-12);
    CHECK(r.rank == 1);
    CHECK(r.residual < 1e-12);
    // minimum-norm solution: x = A^T (A A^T)^+ b = (0.2, 0.4)
    CHECK(r.x[0] == doctest::Approx(0.2));
    CHECK(r.x[1] == doctest::Approx(0.4));

    // inconsistent RHS: residual equals distance to the range
    b << 1, 0;
    const auto r2 = pinv_solve(a, b, 1e-12);
    CHECK(r2.residual > 0.1);
}

TEST_CASE("line fit: exact line and residual report") {
    Eigen::VectorXd xs(4), ys(4);
    xs << 0, 1, 2, 3;
    ys = 2.0 * xs.array() + 1.0;
    const auto f = fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.residual_rms < 1e-12);
    CHECK_THROWS(fit_line(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)));
}
