#include "sbvar/ansatz.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sbvar {

namespace {

struct BranchRef {
    const PolaronBranch* b;
    int s; // +1 up, -1 down
};

std::vector<BranchRef> branch_list(const VariationalState& vs) {
    std::vector<BranchRef> out;
    out.reserve(vs.up.size() + vs.down.size());
    for (const auto& b : vs.up) out.push_back({&b, +1});
    for (const auto& b : vs.down) out.push_back({&b, -1});
    return out;
}

// conj(w_p) w_q <alpha_p|alpha_q>, spin sectors ignored.
Complex pair_overlap(const BranchRef& p, const BranchRef& q) {
    return std::conj(p.b->weight()) * q.b->weight() *
           coherent_overlap(p.b->alpha, q.b->alpha);
}

// Tangent-vector coefficients: |v_j> = (c0 + c1 b^dag_mode)|branch>.
struct TangentCoeff {
    Complex c0;
    Complex c1;
    int mode; // -1 for kappa/theta
};

TangentCoeff tangent_coeff(const PolaronBranch& b, int j, int n_modes) {
    if (j == 0) return {Complex(1, 0), Complex(0, 0), -1};
    if (j == 1) return {Complex(0, 1), Complex(0, 0), -1};
    if (j < 2 + n_modes) {
        const int k = j - 2;
        return {Complex(-b.alpha[k].real(), 0), Complex(1, 0), k};
    }
    const int k = j - 2 - n_modes;
    return {Complex(-b.alpha[k].imag(), 0), Complex(0, 1), k};
}

} // namespace

Eigen::VectorXd VariationalState::flatten() const {
    const int p = params_per_branch();
    Eigen::VectorXd x(n_params());
    int off = 0;
    for (const auto* sector : {&up, &down}) {
        for (const auto& b : *sector) {
            x[off] = b.kappa;
            x[off + 1] = b.theta;
            for (int k = 0; k < n_modes; ++k) {
                x[off + 2 + k] = b.alpha[k].real();
                x[off + 2 + n_modes + k] = b.alpha[k].imag();
            }
            off += p;
        }
    }
    return x;
}

VariationalState VariationalState::unflatten(const Eigen::VectorXd& x, int n_polarons,
                                             int n_modes) {
    const int p = 2 + 2 * n_modes;
    if (x.size() != 2 * n_polarons * p)
        throw std::invalid_argument("VariationalState::unflatten: length mismatch");
    VariationalState vs;
    vs.n_modes = n_modes;
    int off = 0;
    for (auto* sector : {&vs.up, &vs.down}) {
        sector->resize(n_polarons);
        for (auto& b : *sector) {
            b.kappa = x[off];
            b.theta = x[off + 1];
            b.alpha.resize(n_modes);
            for (int k = 0; k < n_modes; ++k)
                b.alpha[k] = Complex(x[off + 2 + k], x[off + 2 + n_modes + k]);
            off += p;
        }
    }
    return vs;
}

void VariationalState::check_degeneracy(double tol) const {
    for (const auto* sector : {&up, &down}) {
        for (std::size_t i = 0; i < sector->size(); ++i) {
            for (std::size_t j = i + 1; j < sector->size(); ++j) {
                const auto& a = (*sector)[i];
                const auto& b = (*sector)[j];
                double d = std::abs(a.kappa - b.kappa) + std::abs(a.theta - b.theta);
                d += (a.alpha - b.alpha).cwiseAbs().sum();
                if (d <= tol)
                    throw std::invalid_argument(
                        "VariationalState: duplicate branches within a spin sector "
                        "(degenerate equations of motion)");
            }
        }
    }
}

Complex coherent_overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("coherent_overlap: length mismatch");
    Complex expo = a.dot(b); // sum conj(a_k) b_k
    expo -= 0.5 * (a.squaredNorm() + b.squaredNorm());
    return std::exp(expo);
}

Complex braket(const VariationalState& a, const VariationalState& b) {
    if (a.n_modes != b.n_modes)
        throw std::invalid_argument("braket: mode count mismatch");
    Complex s(0, 0);
    auto sector_sum = [](const std::vector<PolaronBranch>& bra,
                         const std::vector<PolaronBranch>& ket) {
        Complex acc(0, 0);
        for (const auto& p : bra)
            for (const auto& q : ket)
                acc += std::conj(p.weight()) * q.weight() * coherent_overlap(p.alpha, q.alpha);
        return acc;
    };
    s += sector_sum(a.up, b.up);
    s += sector_sum(a.down, b.down);
    return s;
}

double norm_squared(const VariationalState& vs) {
    const Complex n = braket(vs, vs);
    if (std::abs(n.imag()) > 1e-12 * std::max(1.0, std::abs(n.real())))
        throw std::runtime_error("norm_squared: non-real norm");
    return n.real();
}

double fidelity(const VariationalState& a, const VariationalState& b) {
    const double na = norm_squared(a);
    const double nb = norm_squared(b);
    const Complex ov = braket(a, b);
    return std::norm(ov) / (na * nb);
}

double renormalize(VariationalState& vs) {
    const double shift = -0.5 * std::log(norm_squared(vs));
    for (auto* sector : {&vs.up, &vs.down})
        for (auto& b : *sector) b.kappa += shift;
    return shift;
}

Complex expect(const VariationalState& vs, const Observable& obs,
               const SpinBosonParams& params, double coupling_scale) {
    if (params.n_modes() != vs.n_modes)
        throw std::invalid_argument("expect: params/state mode count mismatch");
    if (obs.k >= vs.n_modes)
        throw std::invalid_argument("expect: mode index out of range");

    const auto branches = branch_list(vs);
    const Eigen::VectorXd g = coupling_scale * params.g;
    const double g2sum = g.squaredNorm();

    Complex acc(0, 0);
    Complex nrm(0, 0);
    for (const auto& p : branches) {
        for (const auto& q : branches) {
            const Complex o = pair_overlap(p, q);
            if (p.s == q.s) nrm += o;
            const bool same = (p.s == q.s);

            Complex val(0, 0);
            switch (obs.tag) {
            case ObsTag::sigma_z:
                if (same) val = static_cast<double>(p.s);
                break;
            case ObsTag::sigma_x:
                if (!same) val = 1.0;
                break;
            case ObsTag::sigma_y:
                // <up|sy|down> = -i, <down|sy|up> = +i
                if (!same) val = (p.s > 0) ? Complex(0, -1) : Complex(0, 1);
                break;
            case ObsTag::mode_occupation:
                if (same) val = std::conj(p.b->alpha[obs.k]) * q.b->alpha[obs.k];
                break;
            case ObsTag::quadrature:
                if (same) val = std::conj(p.b->alpha[obs.k]) + q.b->alpha[obs.k];
                break;
            case ObsTag::quadrature_sq:
                if (same) {
                    const Complex y = std::conj(p.b->alpha[obs.k]) + q.b->alpha[obs.k];
                    val = y * y + 1.0;
                }
                break;
            case ObsTag::hamiltonian:
            case ObsTag::hamiltonian_sq: {
                Complex tau(0, 0), xt(0, 0), e2(0, 0), eg(0, 0);
                for (int k = 0; k < vs.n_modes; ++k) {
                    const Complex a = std::conj(p.b->alpha[k]);
                    const Complex b = q.b->alpha[k];
                    tau += params.eps[k] * a * b;
                    xt += g[k] * (a + b);
                    e2 += params.eps[k] * params.eps[k] * a * b;
                    eg += params.eps[k] * g[k] * (a + b);
                }
                if (same) {
                    const double c = -0.5 * p.s;
                    const Complex bos = tau + c * xt;
                    if (obs.tag == ObsTag::hamiltonian) {
                        val = bos;
                    } else {
                        val = 0.25 * params.delta * params.delta + bos * bos + e2 +
                              c * c * g2sum + c * eg;
                    }
                } else {
                    val = (obs.tag == ObsTag::hamiltonian) ? Complex(0.5 * params.delta, 0)
                                                           : params.delta * tau;
                }
                break;
            }
            case ObsTag::parity:
                // P = -sigma_x (x) (-1)^{N_b}; (-1)^{N_b}|beta> = |-beta>
                if (!same) {
                    const Complex flipped =
                        std::conj(p.b->weight()) * q.b->weight() *
                        coherent_overlap(p.b->alpha, (-q.b->alpha).eval());
                    acc += -flipped;
                    val = 0.0; // handled directly (different bosonic overlap)
                }
                break;
            }
            acc += val * o;
        }
    }
    return acc / nrm.real();
}

Eigen::MatrixXcd gram_matrix(const VariationalState& vs) {
    const auto branches = branch_list(vs);
    const int nb = static_cast<int>(branches.size());
    const int pp = vs.params_per_branch();
    const int m = nb * pp;
    const int nm = vs.n_modes;

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(m, m);
    Eigen::VectorXcd u(pp), v(pp);
    for (int ip = 0; ip < nb; ++ip) {
        for (int iq = 0; iq < nb; ++iq) {
            if (branches[ip].s != branches[iq].s) continue; // orthogonal sectors
            const auto& p = branches[ip];
            const auto& q = branches[iq];
            const Complex o = pair_overlap(p, q);

            for (int j = 0; j < pp; ++j) {
                const auto tc = tangent_coeff(*p.b, j, nm);
                u[j] = std::conj(tc.c0) +
                       (tc.mode >= 0 ? std::conj(tc.c1) * q.b->alpha[tc.mode] : Complex(0, 0));
            }
            for (int l = 0; l < pp; ++l) {
                const auto tc = tangent_coeff(*q.b, l, nm);
                v[l] = tc.c0 +
                       (tc.mode >= 0 ? tc.c1 * std::conj(p.b->alpha[tc.mode]) : Complex(0, 0));
            }
            auto block = gram.block(ip * pp, iq * pp, pp, pp);
            block.noalias() += o * (u * v.transpose());
            // contraction term c1_bra^* c1_ket on matching modes
            for (int k = 0; k < nm; ++k) {
                const int re = 2 + k, im = 2 + nm + k;
                block(re, re) += o;
                block(re, im) += o * Complex(0, 1);
                block(im, re) += o * Complex(0, -1);
                block(im, im) += o;
            }
        }
    }
    return gram;
}

Eigen::VectorXd GradientData::grad_E() const {
    return 2.0 * h_overlap.real();
}

Eigen::VectorXd GradientData::grad_eps() const {
    const double eps = energy_raw.real() / norm2;
    return 2.0 * (h_overlap - eps * s_overlap).real() / norm2;
}

GradientData energy_gradient(const VariationalState& vs, const SpinBosonParams& params,
                             double coupling_scale) {
    if (params.n_modes() != vs.n_modes)
        throw std::invalid_argument("energy_gradient: mode count mismatch");

    const auto branches = branch_list(vs);
    const int nb = static_cast<int>(branches.size());
    const int pp = vs.params_per_branch();
    const int nm = vs.n_modes;
    const Eigen::VectorXd g = coupling_scale * params.g;

    GradientData out;
    out.h_overlap = Eigen::VectorXcd::Zero(nb * pp);
    out.s_overlap = Eigen::VectorXcd::Zero(nb * pp);
    out.energy_raw = Complex(0, 0);
    double norm2 = 0.0;

    for (int ip = 0; ip < nb; ++ip) {
        const auto& p = branches[ip];
        for (int iq = 0; iq < nb; ++iq) {
            const auto& q = branches[iq];
            const Complex o = pair_overlap(p, q);
            const bool same = (p.s == q.s);

            Complex tau(0, 0), xt(0, 0);
            for (int k = 0; k < nm; ++k) {
                const Complex a = std::conj(p.b->alpha[k]);
                const Complex b = q.b->alpha[k];
                tau += params.eps[k] * a * b;
                xt += g[k] * (a + b);
            }
            const double c = -0.5 * p.s;
            const Complex bos = tau + c * xt; // <p|(T+X_s)|q>/<p|q>, same sector

            if (same) {
                norm2 += o.real();
                out.energy_raw += bos * o;
            } else {
                out.energy_raw += 0.5 * params.delta * o;
            }

            for (int j = 0; j < pp; ++j) {
                const auto tc = tangent_coeff(*p.b, j, nm);
                const Complex base =
                    std::conj(tc.c0) +
                    (tc.mode >= 0 ? std::conj(tc.c1) * q.b->alpha[tc.mode] : Complex(0, 0));
                const int mu = ip * pp + j;
                if (same) {
                    Complex h = base * bos;
                    if (tc.mode >= 0)
                        h += std::conj(tc.c1) *
                             (params.eps[tc.mode] * q.b->alpha[tc.mode] + c * g[tc.mode]);
                    out.h_overlap[mu] += h * o;
                    out.s_overlap[mu] += base * o;
                } else {
                    out.h_overlap[mu] += 0.5 * params.delta * base * o;
                }
            }
        }
    }
    out.norm2 = norm2;
    return out;
}

std::string Observable::name() const {
    switch (tag) {
    case ObsTag::sigma_x: return "sigma_x";
    case ObsTag::sigma_y: return "sigma_y";
    case ObsTag::sigma_z: return "sigma_z";
    case ObsTag::mode_occupation: return "n_" + std::to_string(k);
    case ObsTag::quadrature: return "x_" + std::to_string(k);
    case ObsTag::quadrature_sq: return "x2_" + std::to_string(k);
    case ObsTag::hamiltonian: return "H";
    case ObsTag::hamiltonian_sq: return "H2";
    case ObsTag::parity: return "parity";
    }
    return "?";
}

Observable Observable::from_name(const std::string& s) {
    if (s == "sigma_x") return sigma_x();
    if (s == "sigma_y") return sigma_y();
    if (s == "sigma_z") return sigma_z();
    if (s == "H") return hamiltonian();
    if (s == "H2") return hamiltonian_sq();
    if (s == "parity") return parity();
    auto parse_k = [&](std::size_t off) { return std::stoi(s.substr(off)); };
    if (s.rfind("n_", 0) == 0) return n_k(parse_k(2));
    if (s.rfind("x2_", 0) == 0) return x2_k(parse_k(3));
    if (s.rfind("x_", 0) == 0) return x_k(parse_k(2));
    throw std::invalid_argument("Observable: unknown name " + s);
}

SpinInit spin_init_from_name(const std::string& s) {
    if (s == "up") return SpinInit::up;
    if (s == "down") return SpinInit::down;
    if (s == "plus") return SpinInit::plus;
    if (s == "minus") return SpinInit::minus;
    throw std::invalid_argument("spin_init: unknown name " + s);
}

std::string spin_init_name(SpinInit s) {
    switch (s) {
    case SpinInit::up: return "up";
    case SpinInit::down: return "down";
    case SpinInit::plus: return "plus";
    case SpinInit::minus: return "minus";
    }
    return "?";
}

VariationalState seed_random(int n_polarons, int n_modes, SpinInit init,
                             std::uint64_t seed, double perturbation) {
    if (n_polarons < 1) throw std::invalid_argument("seed_random: N_p < 1");
    if (n_modes < 1) throw std::invalid_argument("seed_random: N < 1");

    // Sector amplitudes for the target spin state; a suppressed sector keeps
    // its branches at negligible (but nonzero) weight.
    const double tiny = -16.0; // log-weight offset for the empty sector
    double kappa_up = 0.0, kappa_down = 0.0, theta_down = 0.0;
    const double split = -std::log(static_cast<double>(n_polarons));
    switch (init) {
    case SpinInit::up:
        kappa_up = split;
        kappa_down = split + tiny;
        break;
    case SpinInit::down:
        kappa_up = split + tiny;
        kappa_down = split;
        break;
    case SpinInit::plus:
        kappa_up = kappa_down = split - 0.5 * std::log(2.0);
        break;
    case SpinInit::minus:
        kappa_up = kappa_down = split - 0.5 * std::log(2.0);
        theta_down = std::numbers::pi;
        break;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, perturbation);
    auto draw = [&]() { return perturbation > 0.0 ? u(rng) : 0.0; };

    VariationalState vs;
    vs.n_modes = n_modes;
    for (int sector = 0; sector < 2; ++sector) {
        auto& list = (sector == 0) ? vs.up : vs.down;
        list.resize(n_polarons);
        for (auto& b : list) {
            b.kappa = (sector == 0 ? kappa_up : kappa_down) + draw();
            b.theta = (sector == 0 ? 0.0 : theta_down) + draw();
            b.alpha.resize(n_modes);
            for (int k = 0; k < n_modes; ++k) {
                const double re = draw();
                const double im = draw();
                b.alpha[k] = Complex(re, im);
            }
        }
    }
    vs.check_degeneracy();
    return vs;
}

VariationalState seed_symmetric(int n_polarons, int n_modes, SpinInit init,
                                std::uint64_t seed, double perturbation) {
    if (n_polarons < 1) throw std::invalid_argument("seed_symmetric: N_p < 1");
    if (n_modes < 1) throw std::invalid_argument("seed_symmetric: N < 1");
    if (init != SpinInit::plus && init != SpinInit::minus)
        throw std::invalid_argument("seed_symmetric: init must be plus or minus");

    const double split = -std::log(static_cast<double>(n_polarons));
    const double kappa0 = split - 0.5 * std::log(2.0);
    const double theta_down = (init == SpinInit::minus) ? std::numbers::pi : 0.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, perturbation);
    auto draw = [&]() { return perturbation > 0.0 ? u(rng) : 0.0; };

    VariationalState vs;
    vs.n_modes = n_modes;
    vs.up.resize(n_polarons);
    vs.down.resize(n_polarons);
    for (int p = 0; p < n_polarons; ++p) {
        auto& bu = vs.up[p];
        bu.kappa = kappa0 + draw();
        bu.theta = draw();
        bu.alpha.resize(n_modes);
        for (int k = 0; k < n_modes; ++k) {
            const double re = draw();
            const double im = draw();
            bu.alpha[k] = Complex(re, im);
        }
        auto& bd = vs.down[p];
        bd.kappa = bu.kappa;
        bd.theta = bu.theta + theta_down;
        bd.alpha.resize(n_modes);
        for (int k = 0; k < n_modes; ++k) bd.alpha[k] = -bu.alpha[k];
    }
    vs.check_degeneracy();
    return vs;
}

nlohmann::json VariationalState::to_json() const {
    nlohmann::json j;
    j["n_modes"] = n_modes;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* sector : {&up, &down}) {
        const std::string name = (sector == &up) ? "up" : "down";
        for (const auto& b : *sector) {
            nlohmann::json jb;
            jb["sector"] = name;
            jb["kappa"] = b.kappa;
            jb["theta"] = b.theta;
            std::vector<double> re(n_modes), im(n_modes);
            for (int k = 0; k < n_modes; ++k) {
                re[k] = b.alpha[k].real();
                im[k] = b.alpha[k].imag();
            }
            jb["alpha_re"] = re;
            jb["alpha_im"] = im;
            arr.push_back(std::move(jb));
        }
    }
    j["branches"] = std::move(arr);
    return j;
}

VariationalState VariationalState::from_json(const nlohmann::json& j) {
    VariationalState vs;
    vs.n_modes = j.at("n_modes");
    for (const auto& jb : j.at("branches")) {
        PolaronBranch b;
        b.kappa = jb.at("kappa");
        b.theta = jb.at("theta");
        const auto re = jb.at("alpha_re").get<std::vector<double>>();
        const auto im = jb.at("alpha_im").get<std::vector<double>>();
        if (static_cast<int>(re.size()) != vs.n_modes ||
            static_cast<int>(im.size()) != vs.n_modes)
            throw std::invalid_argument("VariationalState: alpha length mismatch");
        b.alpha.resize(vs.n_modes);
        for (int k = 0; k < vs.n_modes; ++k) b.alpha[k] = Complex(re[k], im[k]);
        const std::string sector = jb.at("sector");
        if (sector == "up") vs.up.push_back(std::move(b));
        else if (sector == "down") vs.down.push_back(std::move(b));
        else throw std::invalid_argument("VariationalState: bad sector " + sector);
    }
    if (vs.up.size() != vs.down.size())
        throw std::invalid_argument("VariationalState: unequal sector sizes");
    return vs;
}

} // namespace sbvar
