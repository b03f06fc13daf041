#include "sbvar/crab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sbvar {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, double simplex_scale,
                             int budget, double ftol) {
    const int d = static_cast<int>(x0.size());
    if (d < 1) throw std::invalid_argument("nelder_mead: empty parameter vector");
    if (budget < d + 2) throw std::invalid_argument("nelder_mead: budget too small");

    NelderMeadResult res;
    res.evaluations = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        const double f = objective(x);
        ++res.evaluations;
        res.history.emplace_back(x, f);
        return f;
    };

    std::vector<Eigen::VectorXd> xs(d + 1);
    std::vector<double> fs(d + 1);
    xs[0] = x0;
    fs[0] = eval(x0);
    for (int i = 0; i < d; ++i) {
        xs[i + 1] = x0;
        xs[i + 1][i] += simplex_scale;
        fs[i + 1] = eval(xs[i + 1]);
    }

    auto order = [&]() {
        std::vector<int> idx(d + 1);
        for (int i = 0; i <= d; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> xs2(d + 1);
        std::vector<double> fs2(d + 1);
        for (int i = 0; i <= d; ++i) { xs2[i] = xs[idx[i]]; fs2[i] = fs[idx[i]]; }
        xs = std::move(xs2);
        fs = std::move(fs2);
    };

    order();
    while (res.evaluations < budget && fs[d] - fs[0] > ftol) {
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < d; ++i) centroid += xs[i];
        centroid /= d;

        const Eigen::VectorXd xr = centroid + (centroid - xs[d]); // reflection
        const double fr = eval(xr);
        if (fr < fs[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[d]);
            const double fe = eval(xe);
            if (fe < fr) { xs[d] = xe; fs[d] = fe; }
            else { xs[d] = xr; fs[d] = fr; }
        } else if (fr < fs[d - 1]) {
            xs[d] = xr; fs[d] = fr;
        } else {
            const bool outside = fr < fs[d];
            const Eigen::VectorXd xc =
                outside ? centroid + 0.5 * (xr - centroid)
                        : centroid + 0.5 * (xs[d] - centroid);
            const double fc = eval(xc);
            if (fc < std::min(fr, fs[d])) {
                xs[d] = xc; fs[d] = fc;
            } else {
                for (int i = 1; i <= d; ++i) {
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = eval(xs[i]);
                    if (res.evaluations >= budget) break;
                }
            }
        }
        order();
    }
    res.best_x = xs[0];
    res.best_f = fs[0];
    return res;
}

void CrabProblem::freeze_random_bits() {
    if (!r.empty()) {
        if (static_cast<int>(r.size()) != n_harmonics)
            throw std::invalid_argument("CrabProblem: r length != n_harmonics");
        return;
    }
    std::mt19937_64 rng(seed ^ 0xc2ab5eedULL);
    std::uniform_int_distribution<int> bit(0, 1);
    r.resize(n_harmonics);
    for (int& b : r) b = bit(rng);
}

VariationalState CrabProblem::seeded_initial() const {
    // plus/minus product states get the parity-exact mirrored seeding
    if (initial_spin == SpinInit::plus || initial_spin == SpinInit::minus)
        return seed_symmetric(n_polarons, params.n_modes(), initial_spin, seed);
    return seed_random(n_polarons, params.n_modes(), initial_spin, seed);
}

RampProtocol CrabProblem::make_protocol(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != 2 * n_harmonics)
        throw std::invalid_argument("CrabProblem: coefficient layout is [A_1..M, B_1..M]");
    if (static_cast<int>(r.size()) != n_harmonics)
        throw std::logic_error("CrabProblem: call freeze_random_bits() first");
    return RampProtocol::crab(t_f, coeffs.head(n_harmonics), coeffs.tail(n_harmonics), r);
}

double crab_objective(const CrabProblem& problem, const Eigen::VectorXd& coeffs,
                      CrabEvalStats* stats) {
    try {
        const RampProtocol protocol = problem.make_protocol(coeffs);
        TdvpConfig cfg = problem.tdvp_cfg;
        cfg.mode = TdvpMode::real;
        cfg.max_restart_attempts = 0;
        const EvolutionTrace trace =
            evolve(problem.seeded_initial(), problem.params, &protocol, cfg, {});
        const double f = fidelity(trace.states.back(), problem.target);
        return std::clamp(1.0 - f, 0.0, 1.0);
    } catch (const TdvpInstabilityError&) {
        if (stats) ++stats->aborted_evals;
        return 1.0;
    } catch (const std::invalid_argument&) {
        // degenerate coefficient sets (vanishing normalization) score worst
        if (stats) ++stats->aborted_evals;
        return 1.0;
    }
}

OptimResult optimize_ramp(const CrabProblem& problem, int budget,
                          double simplex_scale, double ftol) {
    CrabProblem p = problem;
    p.freeze_random_bits();

    CrabEvalStats stats;
    auto obj = [&](const Eigen::VectorXd& x) { return crab_objective(p, x, &stats); };
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * p.n_harmonics);
    NelderMeadResult nm = nelder_mead(obj, x0, simplex_scale, budget, ftol);

    return OptimResult{nm.best_x,        nm.best_f,
                       nm.evaluations,   stats.aborted_evals,
                       std::move(nm.history), p.make_protocol(nm.best_x)};
}

std::vector<ProtocolBenchmarkRow> benchmark_protocols(
    const CrabProblem& problem,
    const std::vector<std::pair<std::string, RampProtocol>>& protocols,
    const std::function<VariationalState(double)>& inst_ground) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<ProtocolBenchmarkRow> rows;
    for (const auto& [name, protocol] : protocols) {
        ProtocolBenchmarkRow row;
        row.protocol = name;
        row.t_f = protocol.t_f();
        row.max_inst_infidelity = nan;
        try {
            TdvpConfig cfg = problem.tdvp_cfg;
            cfg.mode = TdvpMode::real;
            cfg.max_restart_attempts = 0;
            if (cfg.leakage_every <= 0) cfg.leakage_every = 1;
            const EvolutionTrace trace =
                evolve(problem.seeded_initial(), problem.params, &protocol, cfg, {});
            row.infidelity =
                std::clamp(1.0 - fidelity(trace.states.back(), problem.target), 0.0, 1.0);
            double integral = 0.0;
            for (std::size_t i = 1; i < trace.times.size(); ++i) {
                const double a = trace.leakage[i - 1], b = trace.leakage[i];
                if (!std::isnan(a) && !std::isnan(b))
                    integral += 0.5 * (a + b) * (trace.times[i] - trace.times[i - 1]);
            }
            row.leakage_integral = integral;
            if (inst_ground) {
                double worst = 0.0;
                for (std::size_t i = 0; i < trace.times.size(); ++i) {
                    const double s = protocol.scale(std::min(trace.times[i], row.t_f));
                    const VariationalState gs = inst_ground(s);
                    worst = std::max(worst,
                                     1.0 - fidelity(trace.states[i], gs));
                }
                row.max_inst_infidelity = worst;
            }
        } catch (const TdvpInstabilityError&) {
            row.infidelity = 1.0;
            row.leakage_integral = nan;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace sbvar
