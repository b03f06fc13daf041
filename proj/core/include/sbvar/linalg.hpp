#pragma once

#include <Eigen/Dense>

namespace sbvar {

struct PinvSolveResult {
    Eigen::VectorXd x;
    double residual; // ||A x - b||
    int rank;        // singular values kept
};

/// Minimum-norm least-squares solve of A x = b through an SVD pseudo-inverse.
/// Singular values are inverted through the smooth filter s/(s^2 + c^2) with
/// c = rcut * sigma_max, which suppresses directions below the cutoff without
/// a hard discontinuity; rank counts the singular values above c.
PinvSolveResult pinv_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           double rcut);

/// Least-squares line fit y = slope * x + intercept.
struct LineFit {
    double slope;
    double intercept;
    double residual_rms;

    double operator()(double x) const { return slope * x + intercept; }
};

LineFit fit_line(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys);

} // namespace sbvar
