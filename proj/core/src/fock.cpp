#include "sbvar/fock.hpp"

#include <boost/numeric/odeint.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sbvar {

FockSpace::FockSpace(int n_modes_, int cutoff_) : n_modes(n_modes_), cutoff(cutoff_) {
    if (n_modes < 1) throw std::invalid_argument("FockSpace: n_modes < 1");
    if (cutoff < 1) throw std::invalid_argument("FockSpace: cutoff < 1");
    if (dim() > (std::int64_t{1} << 31))
        throw std::invalid_argument("FockSpace: dimension too large");
}

std::int64_t FockSpace::boson_dim() const {
    std::int64_t d = 1;
    for (int k = 0; k < n_modes; ++k) d *= cutoff;
    return d;
}

std::int64_t FockSpace::index(int spin, const std::vector<int>& occ) const {
    std::int64_t idx = 0;
    for (int k = 0; k < n_modes; ++k) idx = idx * cutoff + occ[k];
    return spin * boson_dim() + idx;
}

void FockSpace::decode(std::int64_t idx, int& spin, std::vector<int>& occ) const {
    const std::int64_t bd = boson_dim();
    spin = static_cast<int>(idx / bd);
    std::int64_t rest = idx % bd;
    occ.resize(n_modes);
    for (int k = n_modes - 1; k >= 0; --k) {
        occ[k] = static_cast<int>(rest % cutoff);
        rest /= cutoff;
    }
}

void FockState::normalize() {
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::runtime_error("FockState: cannot normalize zero/non-finite state");
    amplitudes /= n;
}

namespace {

// Enumerate bosonic basis as mixed-radix digits; stride_k = cutoff^(N-1-k).
std::vector<std::int64_t> mode_strides(const FockSpace& s) {
    std::vector<std::int64_t> st(s.n_modes);
    std::int64_t acc = 1;
    for (int k = s.n_modes - 1; k >= 0; --k) {
        st[k] = acc;
        acc *= s.cutoff;
    }
    return st;
}

} // namespace

Eigen::SparseMatrix<double> build_hamiltonian(const SpinBosonParams& params,
                                              const FockSpace& space,
                                              double coupling_scale) {
    params.validate();
    if (params.n_modes() != space.n_modes)
        throw std::invalid_argument("build_hamiltonian: mode count mismatch");
    if (coupling_scale < 0.0)
        throw std::invalid_argument("build_hamiltonian: coupling_scale < 0");

    const std::int64_t bd = space.boson_dim();
    const auto strides = mode_strides(space);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(bd * (2 + 2 * space.n_modes)));

    std::vector<int> occ(space.n_modes);
    for (std::int64_t b = 0; b < bd; ++b) {
        int spin;
        space.decode(b, spin, occ);
        double diag = 0.0;
        for (int k = 0; k < space.n_modes; ++k) diag += params.eps[k] * occ[k];
        for (int s = 0; s < 2; ++s) {
            const std::int64_t i = s * bd + b;
            trip.emplace_back(i, i, diag);
            // Delta/2 sigma_x
            trip.emplace_back(i, (1 - s) * bd + b, 0.5 * params.delta);
            // -1/2 sigma_z sum g_k (b^dag + b); sigma_z = +1 on spin index 0
            const double sz = (s == 0) ? 1.0 : -1.0;
            for (int k = 0; k < space.n_modes; ++k) {
                if (occ[k] + 1 < space.cutoff) {
                    const double el = -0.5 * sz * coupling_scale * params.g[k] *
                                      std::sqrt(occ[k] + 1.0);
                    const std::int64_t j = i + strides[k];
                    trip.emplace_back(j, i, el);
                    trip.emplace_back(i, j, el);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> h(space.dim(), space.dim());
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

Eigen::SparseMatrix<double> build_coupling_term(const SpinBosonParams& params,
                                                const FockSpace& space) {
    const std::int64_t bd = space.boson_dim();
    const auto strides = mode_strides(space);
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> occ(space.n_modes);
    for (std::int64_t b = 0; b < bd; ++b) {
        int spin;
        space.decode(b, spin, occ);
        for (int s = 0; s < 2; ++s) {
            const std::int64_t i = s * bd + b;
            const double sz = (s == 0) ? 1.0 : -1.0;
            for (int k = 0; k < space.n_modes; ++k) {
                if (occ[k] + 1 < space.cutoff) {
                    const double el = -0.5 * sz * params.g[k] * std::sqrt(occ[k] + 1.0);
                    const std::int64_t j = i + strides[k];
                    trip.emplace_back(j, i, el);
                    trip.emplace_back(i, j, el);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> h(space.dim(), space.dim());
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

Eigen::VectorXcd apply_parity(const FockSpace& space, const Eigen::VectorXcd& v) {
    // P = -sigma_x (x) (-1)^{N_b}: P|s, occ> = -(-1)^{sum n} |sbar, occ>
    const std::int64_t bd = space.boson_dim();
    Eigen::VectorXcd out(space.dim());
    std::vector<int> occ(space.n_modes);
    for (std::int64_t b = 0; b < bd; ++b) {
        int spin;
        space.decode(b, spin, occ);
        int n = 0;
        for (int k = 0; k < space.n_modes; ++k) n += occ[k];
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        out[bd + b] = sign * v[b];
        out[b] = sign * v[bd + b];
    }
    return out;
}

double parity_expectation(const FockState& state) {
    const Eigen::VectorXcd pv = apply_parity(*state.space, state.amplitudes);
    const Complex e = state.amplitudes.dot(pv) / state.amplitudes.squaredNorm();
    return e.real();
}

namespace {

double apply_parity_real(const FockSpace& space, const Eigen::VectorXd& v,
                         Eigen::VectorXd& out) {
    const std::int64_t bd = space.boson_dim();
    out.resize(space.dim());
    std::vector<int> occ(space.n_modes);
    for (std::int64_t b = 0; b < bd; ++b) {
        int spin;
        space.decode(b, spin, occ);
        int n = 0;
        for (int k = 0; k < space.n_modes; ++k) n += occ[k];
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        out[bd + b] = sign * v[b];
        out[b] = sign * v[bd + b];
    }
    return 0.0;
}

// Resolve parity labels, rotating within numerically degenerate clusters so
// each eigenvector carries a definite parity.
void parity_resolve(const FockSpace& space, Eigen::VectorXd& evals,
                    std::vector<Eigen::VectorXd>& evecs, std::vector<int>& parities) {
    const int n = static_cast<int>(evals.size());
    parities.assign(n, 0);
    Eigen::VectorXd pv;
    int i = 0;
    while (i < n) {
        int j = i + 1;
        while (j < n && std::abs(evals[j] - evals[i]) <
                            1e-9 * std::max(1.0, std::abs(evals[i])))
            ++j;
        const int c = j - i;
        if (c > 1) {
            Eigen::MatrixXd pmat(c, c);
            for (int a = 0; a < c; ++a) {
                apply_parity_real(space, evecs[i + a], pv);
                for (int b = 0; b < c; ++b) pmat(b, a) = evecs[i + b].dot(pv);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (pmat + pmat.transpose()));
            // order the degenerate members with parity +1 first (ground-state
            // parity convention for quasi-degenerate doublets)
            std::vector<Eigen::VectorXd> rotated(c);
            for (int a = 0; a < c; ++a) {
                const int col = c - 1 - a; // P eigenvalues ascending -> reverse
                rotated[a] = Eigen::VectorXd::Zero(evecs[i].size());
                for (int b = 0; b < c; ++b)
                    rotated[a] += es.eigenvectors()(b, col) * evecs[i + b];
            }
            for (int a = 0; a < c; ++a) evecs[i + a] = std::move(rotated[a]);
        }
        for (int a = i; a < j; ++a) {
            apply_parity_real(space, evecs[a], pv);
            const double p = evecs[a].dot(pv) / evecs[a].squaredNorm();
            const double r = std::round(p);
            if (std::abs(p - r) > 1e-8 || std::abs(std::abs(r) - 1.0) > 1e-8)
                throw std::runtime_error("lowest_eigenpairs: parity resolution failed");
            parities[a] = static_cast<int>(r);
        }
        i = j;
    }
}

// Lanczos restricted to one parity sector: the start vector is projected
// onto the sector and the residual re-projected every iteration, so quasi-
// degenerate opposite-parity doublets cannot mix into the Krylov space.
void lanczos_sector(const Eigen::SparseMatrix<double>& h, const FockSpace& space,
                    int parity_sign, int k, std::vector<double>& evals,
                    std::vector<Eigen::VectorXd>& evecs) {
    const std::int64_t dim = h.rows();
    const int max_iter = static_cast<int>(std::min<std::int64_t>(dim, 800));
    std::mt19937_64 rng(0x5eed5eedULL + parity_sign);
    std::normal_distribution<double> gauss;

    Eigen::VectorXd pv;
    auto project = [&](Eigen::VectorXd& v) {
        apply_parity_real(space, v, pv);
        v = 0.5 * (v + parity_sign * pv);
    };

    Eigen::VectorXd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) v[i] = gauss(rng);
    project(v);
    v.normalize();

    std::vector<Eigen::VectorXd> basis{v};
    std::vector<double> a, b; // tridiagonal entries
    Eigen::VectorXd w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    int m = 0;
    for (int it = 0; it < max_iter; ++it) {
        w = h * basis.back();
        if (m > 0) w -= b[m - 1] * basis[m - 1];
        const double alpha = basis[m].dot(w);
        a.push_back(alpha);
        w -= alpha * basis[m];
        project(w);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) w -= q.dot(w) * q;
        const double beta = w.norm();
        ++m;
        if (beta < 1e-13) break;
        b.push_back(beta);
        basis.push_back(w / beta);

        if (m >= std::max(2 * k + 10, 30) && m % 10 == 0) {
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) tri(i, i) = a[i];
            for (int i = 0; i + 1 < m; ++i) tri(i, i + 1) = tri(i + 1, i) = b[i];
            es.compute(tri);
            bool converged = true;
            for (int i = 0; i < k; ++i)
                if (beta * std::abs(es.eigenvectors()(m - 1, i)) > 1e-10)
                    converged = false;
            if (converged) break;
        }
    }
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) tri(i, i) = a[i];
    for (int i = 0; i + 1 < m; ++i) tri(i, i + 1) = tri(i + 1, i) = b[i];
    es.compute(tri);
    if (m < k)
        throw std::runtime_error("lowest_eigenpairs: Lanczos basis exhausted");
    const double beta_last = b.empty() ? 0.0 : b.back();
    for (int i = 0; i < k; ++i)
        if (beta_last * std::abs(es.eigenvectors()(m - 1, i)) > 1e-7)
            throw std::runtime_error("lowest_eigenpairs: eigensolver did not converge");

    for (int i = 0; i < k; ++i) {
        evals.push_back(es.eigenvalues()[i]);
        Eigen::VectorXd ritz = Eigen::VectorXd::Zero(dim);
        for (int j = 0; j < m; ++j) ritz += es.eigenvectors()(j, i) * basis[j];
        ritz.normalize();
        evecs.push_back(std::move(ritz));
    }
}

SpectrumSlice lanczos_lowest(const Eigen::SparseMatrix<double>& h,
                             const FockSpace& space, int k) {
    std::vector<double> evals;
    std::vector<Eigen::VectorXd> evecs;
    std::vector<int> pars;
    for (int sign : {+1, -1}) {
        lanczos_sector(h, space, sign, k, evals, evecs);
        pars.resize(evals.size(), sign);
    }
    std::vector<int> idx(evals.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return evals[a] < evals[b]; });
    // within numerically degenerate clusters, order parity +1 first
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const double tol = 1e-9 * std::max(1.0, std::abs(evals[idx[i]]));
        if (std::abs(evals[idx[i + 1]] - evals[idx[i]]) < tol &&
            pars[idx[i]] < pars[idx[i + 1]])
            std::swap(idx[i], idx[i + 1]);
    }

    SpectrumSlice out;
    out.eigenvalues.resize(k);
    out.eigenvectors.resize(k);
    out.parities.resize(k);
    for (int i = 0; i < k; ++i) {
        out.eigenvalues[i] = evals[idx[i]];
        out.eigenvectors[i] = std::move(evecs[idx[i]]);
        out.parities[i] = pars[idx[i]];
    }
    return out;
}

} // namespace

double SpectrumSlice::relevant_gap() const {
    return eigenvalues[relevant_index()] - eigenvalues[0];
}

int SpectrumSlice::relevant_index() const {
    const int p0 = parities.at(0);
    for (std::size_t j = 1; j < parities.size(); ++j)
        if (parities[j] == p0) return static_cast<int>(j);
    throw std::runtime_error("SpectrumSlice: no same-parity excited level in slice");
}

SpectrumSlice lowest_eigenpairs(const Eigen::SparseMatrix<double>& h,
                                const FockSpace& space, int k,
                                std::int64_t dense_threshold) {
    if (k < 1 || k > h.rows())
        throw std::invalid_argument("lowest_eigenpairs: bad k");
    SpectrumSlice out;
    if (h.rows() <= dense_threshold) {
        Eigen::MatrixXd dense(h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        out.eigenvalues = es.eigenvalues().head(k);
        out.eigenvectors.resize(k);
        for (int i = 0; i < k; ++i) out.eigenvectors[i] = es.eigenvectors().col(i);
        parity_resolve(space, out.eigenvalues, out.eigenvectors, out.parities);
    } else {
        out = lanczos_lowest(h, space, k); // parity labels exact by construction
    }
    return out;
}

FockTrajectory propagate(const FockState& initial, const SpinBosonParams& params,
                         const RampProtocol* schedule, double t_f, double dt_out,
                         double abs_tol, double rel_tol) {
    if (std::abs(initial.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("propagate: initial state not normalized");
    const FockSpace& space = *initial.space;
    const std::int64_t dim = space.dim();

    const Eigen::SparseMatrix<double> h0 = build_hamiltonian(params, space, 0.0);
    const Eigen::SparseMatrix<double> hg = build_coupling_term(params, space);

    using state_type = std::vector<double>;
    auto rhs = [&](const state_type& y, state_type& dydt, double t) {
        const double s = schedule ? schedule->scale(std::min(t, t_f)) : 1.0;
        Eigen::Map<const Eigen::VectorXd> re(y.data(), dim);
        Eigen::Map<const Eigen::VectorXd> im(y.data() + dim, dim);
        dydt.resize(2 * dim);
        Eigen::Map<Eigen::VectorXd> dre(dydt.data(), dim);
        Eigen::Map<Eigen::VectorXd> dim_(dydt.data() + dim, dim);
        // i psi' = H psi  ->  Re' = H Im, Im' = -H Re
        dre.noalias() = h0 * im + s * (hg * im);
        dim_.noalias() = -(h0 * re) - s * (hg * re);
    };

    state_type y(2 * dim);
    for (std::int64_t i = 0; i < dim; ++i) {
        y[i] = initial.amplitudes[i].real();
        y[dim + i] = initial.amplitudes[i].imag();
    }

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(abs_tol, rel_tol,
                                        ode::runge_kutta_dopri5<state_type>());

    FockTrajectory traj;
    auto record = [&](double t) {
        FockState st;
        st.space = initial.space;
        st.amplitudes.resize(dim);
        for (std::int64_t i = 0; i < dim; ++i)
            st.amplitudes[i] = Complex(y[i], y[dim + i]);
        traj.max_norm_drift =
            std::max(traj.max_norm_drift, std::abs(st.norm() - 1.0));
        traj.times.push_back(t);
        traj.states.push_back(std::move(st));
    };

    double t = 0.0;
    double dt = std::min(dt_out, 1e-3);
    record(0.0);
    int next_out = 1;
    const int n_out = static_cast<int>(std::ceil(t_f / dt_out - 1e-12));
    while (next_out <= n_out) {
        const double t_target = std::min(next_out * dt_out, t_f);
        while (t < t_target - 1e-13) {
            double dt_try = std::min(dt, t_target - t);
            auto res = stepper.try_step(rhs, y, t, dt_try);
            if (res == ode::controlled_step_result::success) {
                dt = dt_try;
            } else {
                dt = dt_try;
                if (dt < 1e-15 * std::max(1.0, t_f))
                    throw std::runtime_error("propagate: step-size underflow");
            }
        }
        record(t_target);
        ++next_out;
    }
    return traj;
}

FockConversion ansatz_to_fock(const VariationalState& vs, const FockSpace& space) {
    if (vs.n_modes != space.n_modes)
        throw std::invalid_argument("ansatz_to_fock: mode count mismatch");
    for (const auto* sector : {&vs.up, &vs.down}) {
        for (const auto& b : *sector) {
            for (int k = 0; k < vs.n_modes; ++k) {
                if (std::norm(b.alpha[k]) > space.cutoff / 4.0)
                    throw std::invalid_argument(
                        "ansatz_to_fock: displacement too large for cutoff at mode " +
                        std::to_string(k));
            }
        }
    }

    const std::int64_t bd = space.boson_dim();
    FockConversion out;
    out.state.space = &space;
    out.state.amplitudes = Eigen::VectorXcd::Zero(space.dim());
    out.truncation_bound = 0.0;

    std::vector<int> occ(space.n_modes);
    for (int sector = 0; sector < 2; ++sector) {
        const auto& list = (sector == 0) ? vs.up : vs.down;
        for (const auto& b : list) {
            // per-mode coefficient tables alpha^n / sqrt(n!); the per-mode
            // truncated weight is the Poisson tail P(n >= cutoff; |alpha|^2),
            // summed directly to avoid cancellation
            Eigen::MatrixXcd coef(space.n_modes, space.cutoff);
            double tail_sum = 0.0;
            for (int k = 0; k < space.n_modes; ++k) {
                Complex c(1, 0);
                for (int n = 0; n < space.cutoff; ++n) {
                    coef(k, n) = c;
                    c *= b.alpha[k] / std::sqrt(n + 1.0);
                }
                const double lambda = std::norm(b.alpha[k]);
                double term = std::exp(-lambda);
                for (int n = 1; n <= space.cutoff; ++n) term *= lambda / n;
                double tail = 0.0;
                for (int n = space.cutoff; n < space.cutoff + 400; ++n) {
                    tail += term;
                    term *= lambda / (n + 1);
                    if (term < 1e-300) break;
                }
                tail_sum += tail;
            }
            const Complex pref = b.weight() * std::exp(-0.5 * b.alpha.squaredNorm());
            for (std::int64_t bi = 0; bi < bd; ++bi) {
                std::int64_t rest = bi;
                Complex amp = pref;
                for (int k = space.n_modes - 1; k >= 0; --k) {
                    amp *= coef(k, static_cast<int>(rest % space.cutoff));
                    rest /= space.cutoff;
                }
                out.state.amplitudes[sector * bd + bi] += amp;
            }
            // weight of the branch outside the truncated space
            out.truncation_bound += std::exp(b.kappa) * std::sqrt(tail_sum);
        }
    }
    return out;
}

double fidelity(const FockState& a, const FockState& b) {
    const Complex ov = a.amplitudes.dot(b.amplitudes);
    return std::norm(ov) / (a.amplitudes.squaredNorm() * b.amplitudes.squaredNorm());
}

double fidelity(const FockState& a, const VariationalState& b) {
    const FockConversion conv = ansatz_to_fock(b, *a.space);
    const Complex ov = a.amplitudes.dot(conv.state.amplitudes);
    // normalize the ansatz by its analytic norm, not the truncated one
    return std::norm(ov) / (a.amplitudes.squaredNorm() * norm_squared(b));
}

namespace {

Eigen::VectorXcd apply_xk(const FockSpace& space, const Eigen::VectorXcd& v, int k) {
    const std::int64_t bd = space.boson_dim();
    const auto strides = mode_strides(space);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(space.dim());
    std::vector<int> occ(space.n_modes);
    for (std::int64_t b = 0; b < bd; ++b) {
        int spin;
        space.decode(b, spin, occ);
        for (int s = 0; s < 2; ++s) {
            const std::int64_t i = s * bd + b;
            if (occ[k] + 1 < space.cutoff)
                out[i + strides[k]] += std::sqrt(occ[k] + 1.0) * v[i];
            if (occ[k] > 0)
                out[i - strides[k]] += std::sqrt(static_cast<double>(occ[k])) * v[i];
        }
    }
    return out;
}

} // namespace

Complex fock_expect(const FockState& state, const Observable& obs,
                    const SpinBosonParams& params, double coupling_scale) {
    const FockSpace& space = *state.space;
    const std::int64_t bd = space.boson_dim();
    const Eigen::VectorXcd& v = state.amplitudes;
    const double n2 = v.squaredNorm();
    std::vector<int> occ(space.n_modes);

    switch (obs.tag) {
    case ObsTag::sigma_z: {
        const double up = v.head(bd).squaredNorm();
        const double dn = v.tail(bd).squaredNorm();
        return (up - dn) / n2;
    }
    case ObsTag::sigma_x:
        return (2.0 * v.head(bd).dot(v.tail(bd))).real() / n2;
    case ObsTag::sigma_y: {
        // <sy> = 2 Im <up|dn>... sy|dn> = -i|up>, so <psi|sy|psi> = -i<up|dn> + i<dn|up>
        const Complex ud = v.head(bd).dot(v.tail(bd));
        return (Complex(0, -1) * ud + Complex(0, 1) * std::conj(ud)) / n2;
    }
    case ObsTag::mode_occupation: {
        double acc = 0.0;
        for (std::int64_t b = 0; b < bd; ++b) {
            int spin;
            space.decode(b, spin, occ);
            const double nk = occ[obs.k];
            acc += nk * (std::norm(v[b]) + std::norm(v[bd + b]));
        }
        return acc / n2;
    }
    case ObsTag::quadrature:
        return v.dot(apply_xk(space, v, obs.k)) / n2;
    case ObsTag::quadrature_sq: {
        const Eigen::VectorXcd xv = apply_xk(space, v, obs.k);
        return xv.squaredNorm() / n2; // <psi|x x|psi> with x Hermitian
    }
    case ObsTag::hamiltonian: {
        const auto h = build_hamiltonian(params, space, coupling_scale);
        return v.dot(h * v) / n2;
    }
    case ObsTag::hamiltonian_sq: {
        const auto h = build_hamiltonian(params, space, coupling_scale);
        const Eigen::VectorXcd hv = h * v;
        return hv.squaredNorm() / n2;
    }
    case ObsTag::parity:
        return parity_expectation(state);
    }
    throw std::invalid_argument("fock_expect: unsupported observable");
}

} // namespace sbvar
