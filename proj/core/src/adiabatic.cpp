#include "sbvar/adiabatic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbvar {

namespace {

double interp(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, double x) {
    if (x <= xs[0]) return ys[0];
    if (x >= xs[xs.size() - 1]) return ys[ys.size() - 1];
    int lo = 0, hi = static_cast<int>(xs.size()) - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (xs[mid] <= x) lo = mid; else hi = mid;
    }
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - w) * ys[lo] + w * ys[hi];
}

} // namespace

GapScan gap_scan(const SpinBosonParams& params, const FockSpace& space,
                 double lo, double hi, int points) {
    if (points < 2 || hi <= lo)
        throw std::invalid_argument("gap_scan: bad grid");
    const Eigen::SparseMatrix<double> hg = build_coupling_term(params, space);

    GapScan scan;
    scan.n_modes = space.n_modes;
    scan.couplings.resize(points);
    scan.gap.resize(points);
    scan.matrix_element.resize(points);

    const int k = std::min<std::int64_t>(6, space.dim());
    for (int i = 0; i < points; ++i) {
        const double s = lo + (hi - lo) * i / (points - 1);
        scan.couplings[i] = s;
        const auto h = build_hamiltonian(params, space, s);
        const SpectrumSlice slice = lowest_eigenpairs(h, space, k);
        scan.gap[i] = slice.relevant_gap();
        const int j = slice.relevant_index();
        // |<E_j| sigma_z sum g_k x_k |E_0>|; the Hamiltonian coupling term
        // is -1/2 of that operator.
        scan.matrix_element[i] =
            2.0 * std::abs(slice.eigenvectors[j].dot(hg * slice.eigenvectors[0]));
    }
    return scan;
}

CriticalGap critical_gap(const GapScan& scan, double window_lo, double window_hi) {
    CriticalGap cg{std::numeric_limits<double>::infinity(), 0.0};
    bool found = false;
    for (int i = 0; i < scan.couplings.size(); ++i) {
        const double s = scan.couplings[i];
        if (s < window_lo - 1e-12 || s > window_hi + 1e-12) continue;
        found = true;
        if (scan.gap[i] < cg.gap) {
            cg.gap = scan.gap[i];
            cg.coupling = s;
        }
    }
    if (!found)
        throw std::invalid_argument("critical_gap: window contains no scan points");
    return cg;
}

TfBound adiabatic_tf_bound(const GapScan& scan, double epsilon) {
    if (epsilon <= 0.0)
        throw std::invalid_argument("adiabatic_tf_bound: epsilon must be positive");
    const CriticalGap cg = critical_gap(scan, scan.couplings[0],
                                        scan.couplings[scan.couplings.size() - 1]);
    int arg = 0;
    for (int i = 1; i < scan.matrix_element.size(); ++i)
        if (scan.matrix_element[i] > scan.matrix_element[arg]) arg = i;
    TfBound b;
    b.t_f = scan.matrix_element[arg] / (2.0 * cg.gap * cg.gap * epsilon);
    b.at_coupling = scan.couplings[arg];
    return b;
}

double adiabaticity_gamma(const GapScan& scan, const RampProtocol& protocol) {
    const double t_f = protocol.t_f();
    const int n = 801;
    double gamma = std::numeric_limits<double>::infinity();
    const double dt = t_f / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        const double tm = std::max(0.0, t - 0.5 * dt);
        const double tp = std::min(t_f, t + 0.5 * dt);
        const double sdot = (protocol.scale(tp) - protocol.scale(tm)) / (tp - tm);
        const double s = protocol.scale(t);
        const double gap = interp(scan.couplings, scan.gap, s);
        const double me = interp(scan.couplings, scan.matrix_element, s);
        // drive strength sdot * |<E_j| sigma_z sum g_k x_k |E_0>|, so that a
        // linear ramp gives gamma = gap^2 t_f / matrix_element at the
        // bounding point
        const double drive = std::abs(sdot) * me;
        if (drive <= 0.0) continue;
        gamma = std::min(gamma, gap * gap / drive);
    }
    return gamma;
}

ScalingFit linear_fit_extrapolate(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                                  double x_query) {
    ScalingFit f;
    f.abscissa = xs;
    f.ordinate = ys;
    f.fit = fit_line(xs, ys);
    f.predicted = f.fit.intercept + f.fit.slope * x_query;
    return f;
}

} // namespace sbvar
