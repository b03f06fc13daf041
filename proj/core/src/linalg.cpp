#include "sbvar/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace sbvar {

namespace {

// Smooth inversion factor s/(s^2 + cut^2): equals 1/s well above the cutoff,
// rolls off to 0 below it without the hard-threshold discontinuity (which
// stalls adaptive integrators when a singular value drifts across the cutoff).
double tikhonov(double s, double cut) { return s / (s * s + cut * cut); }

} // namespace

PinvSolveResult pinv_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           double rcut) {
    PinvSolveResult r;
    r.rank = 0;

    const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    const bool square = a.rows() == a.cols();
    const bool symmetric = square && (a - a.transpose()).norm() <= 1e-13 * (1.0 + scale);
    const bool antisymmetric =
        square && (a + a.transpose()).norm() <= 1e-13 * (1.0 + scale);

    if (symmetric) {
        // spectral pseudo-inverse; avoids Eigen's divide-and-conquer SVD,
        // which misbehaves on severely rank-deficient inputs
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const Eigen::VectorXd& d = es.eigenvalues();
        const double cut = rcut * d.cwiseAbs().maxCoeff();
        Eigen::VectorXd vtb = es.eigenvectors().transpose() * b;
        for (int i = 0; i < d.size(); ++i) {
            vtb[i] *= tikhonov(d[i], cut);
            if (std::abs(d[i]) > cut) ++r.rank;
        }
        r.x = es.eigenvectors() * vtb;
    } else if (antisymmetric) {
        // iA is Hermitian with real spectrum d, so A = -i V diag(d) V^H and
        // the filtered pseudo-inverse is V diag(i d/(d^2 + cut^2)) V^H
        const Eigen::MatrixXcd ia = std::complex<double>(0, 1) * a;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ia);
        const Eigen::VectorXd& d = es.eigenvalues();
        const double cut = rcut * d.cwiseAbs().maxCoeff();
        Eigen::VectorXcd vtb = es.eigenvectors().adjoint() * b;
        for (int i = 0; i < d.size(); ++i) {
            vtb[i] *= std::complex<double>(0, 1) * tikhonov(d[i], cut);
            if (std::abs(d[i]) > cut) ++r.rank;
        }
        r.x = (es.eigenvectors() * vtb).real();
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double cut = sv.size() ? rcut * sv[0] : 0.0;
        Eigen::VectorXd utb = svd.matrixU().transpose() * b;
        for (int i = 0; i < sv.size(); ++i) {
            utb[i] *= tikhonov(sv[i], cut);
            if (sv[i] > cut) ++r.rank;
        }
        r.x = svd.matrixV() * utb;
    }
    r.residual = (a * r.x - b).norm();
    return r;
}

LineFit fit_line(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matching points");
    const double n = static_cast<double>(xs.size());
    const double mx = xs.mean(), my = ys.mean();
    const double sxx = (xs.array() - mx).square().sum();
    if (sxx <= 0.0)
        throw std::invalid_argument("fit_line: degenerate abscissa");
    const double sxy = ((xs.array() - mx) * (ys.array() - my)).sum();
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.residual_rms = std::sqrt(
        (ys.array() - f.slope * xs.array() - f.intercept).square().sum() / n);
    return f;
}

} // namespace sbvar
