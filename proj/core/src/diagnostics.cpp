#include "sbvar/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbvar {

std::vector<double> fidelity_bound(const EvolutionTrace& trace) {
    const std::size_t n = trace.times.size();
    std::vector<double> bound(n, 1.0);
    if (n == 0) return bound;

    // Fill leakage gaps by linear interpolation between sampled points so the
    // trapezoidal accumulation stays well defined.
    std::vector<double> lam(n);
    std::vector<std::size_t> sampled;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isnan(trace.leakage[i])) sampled.push_back(i);
    if (sampled.empty())
        throw std::invalid_argument("fidelity_bound: trace has no leakage samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (i <= sampled.front()) { lam[i] = trace.leakage[sampled.front()]; continue; }
        if (i >= sampled.back()) { lam[i] = trace.leakage[sampled.back()]; continue; }
        auto hi = std::upper_bound(sampled.begin(), sampled.end(), i);
        const std::size_t b = *hi, a = *(hi - 1);
        const double w = (trace.times[i] - trace.times[a]) /
                         (trace.times[b] - trace.times[a]);
        lam[i] = (1.0 - w) * trace.leakage[a] + w * trace.leakage[b];
    }

    double integral = 0.0;
    bound[0] = 1.0;
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t i = 1; i < n; ++i) {
        integral += 0.5 * (lam[i - 1] + lam[i]) * (trace.times[i] - trace.times[i - 1]);
        if (integral >= sqrt2) {
            bound[i] = 0.0;
        } else {
            const double b = 1.0 - 0.5 * integral * integral;
            bound[i] = b * b;
        }
    }
    return bound;
}

ConvergenceReport convergence_criterion(const std::vector<int>& n_polarons,
                                        const std::vector<const EvolutionTrace*>& traces,
                                        const std::string& observable, double horizon) {
    if (n_polarons.size() != traces.size() || traces.size() < 2)
        throw std::invalid_argument("convergence_criterion: need >= 2 matching traces");

    // coarsest common grid
    double dt = 0.0, t_max = horizon;
    for (const auto* tr : traces) {
        if (tr->times.size() < 2)
            throw std::invalid_argument("convergence_criterion: trace too short");
        dt = std::max(dt, tr->times[1] - tr->times[0]);
        t_max = std::min(t_max, tr->times.back());
    }
    const int n_grid = static_cast<int>(std::floor(t_max / dt + 1e-9)) + 1;
    if (n_grid < 2)
        throw std::invalid_argument("convergence_criterion: horizon too short");

    auto resample = [&](const EvolutionTrace& tr) {
        const auto it = tr.observables.find(observable);
        if (it == tr.observables.end())
            throw std::invalid_argument("convergence_criterion: observable '" +
                                        observable + "' not recorded");
        const auto& ys = it->second;
        std::vector<double> out(n_grid);
        std::size_t j = 0;
        for (int i = 0; i < n_grid; ++i) {
            const double t = i * dt;
            while (j + 2 < tr.times.size() && tr.times[j + 1] < t) ++j;
            const double t0 = tr.times[j], t1 = tr.times[j + 1];
            const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
            out[i] = (1.0 - w) * ys[j] + w * ys[j + 1];
        }
        return out;
    };

    // reference = trace with the largest polaron number
    std::size_t ref = 0;
    for (std::size_t i = 1; i < n_polarons.size(); ++i)
        if (n_polarons[i] > n_polarons[ref]) ref = i;
    const std::vector<double> yref = resample(*traces[ref]);

    ConvergenceReport rep;
    rep.observable = observable;
    rep.n_polarons = n_polarons;
    rep.horizon = t_max;
    rep.values.resize(traces.size());
    auto trapz = [&](const std::vector<double>& f) {
        double s = 0.0;
        for (int g = 1; g < n_grid; ++g) s += 0.5 * (f[g - 1] + f[g]) * dt;
        return s;
    };
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const std::vector<double> yi = resample(*traces[i]);
        std::vector<double> dev(n_grid), mag(n_grid);
        for (int g = 0; g < n_grid; ++g) {
            dev[g] = std::abs(yref[g] - yi[g]);
            mag[g] = yi[g];
        }
        const double denom = std::abs(trapz(mag));
        rep.values[i] = (denom > 1e-12 * t_max)
                            ? trapz(dev) / denom
                            : std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

OtocReport otoc_variance(const EvolutionTrace& trace, int mode) {
    OtocReport rep;
    rep.mode = mode;
    rep.times = trace.times;

    const std::string xname = Observable::x_k(mode).name();
    const std::string x2name = Observable::x2_k(mode).name();
    const auto xi = trace.observables.find(xname);
    const auto x2i = trace.observables.find(x2name);
    if (xi == trace.observables.end() || x2i == trace.observables.end())
        throw std::invalid_argument("otoc_variance: trace lacks x/x^2 for mode " +
                                    std::to_string(mode));
    const std::size_t n = trace.times.size();
    rep.var_x.resize(n);
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.var_x[i] = x2i->second[i] - xi->second[i] * xi->second[i];
        vmax = std::max(vmax, std::abs(rep.var_x[i]));
    }

    // first strict local maximum over a 5-point window with relative prominence
    const double prom = 1e-3 * std::max(vmax, 1e-300);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double v = rep.var_x[i];
        bool peak = true;
        double lowest_neighbor = std::numeric_limits<double>::infinity();
        for (int off = -2; off <= 2; ++off) {
            if (off == 0) continue;
            const double u = rep.var_x[i + off];
            if (u >= v) { peak = false; break; }
            lowest_neighbor = std::min(lowest_neighbor, u);
        }
        if (peak && v - lowest_neighbor >= prom) {
            rep.t_star = trace.times[i];
            // occupations are evaluated on the stored checkpoint; <n_k> does
            // not depend on the Hamiltonian parameters
            const VariationalState& vs = trace.states[i];
            SpinBosonParams dummy;
            dummy.eps = Eigen::VectorXd::Ones(vs.n_modes);
            dummy.g = Eigen::VectorXd::Zero(vs.n_modes);
            rep.occupations_at_t_star.resize(vs.n_modes);
            for (int k = 0; k < vs.n_modes; ++k)
                rep.occupations_at_t_star[k] =
                    expect(vs, Observable::n_k(k), dummy).real();
            break;
        }
    }
    return rep;
}

double var_h(const VariationalState& vs, const SpinBosonParams& params,
             double coupling_scale) {
    const double e = expect(vs, Observable::hamiltonian(), params, coupling_scale).real();
    const double h2 =
        expect(vs, Observable::hamiltonian_sq(), params, coupling_scale).real();
    double v = h2 - e * e;
    if (v < 0.0) {
        if (v < -1e-9)
            throw std::runtime_error("var_h: variance significantly negative");
        v = 0.0;
    }
    return v;
}

std::vector<double> magnetization_trace(const EvolutionTrace& trace) {
    const auto it = trace.observables.find(Observable::sigma_z().name());
    if (it == trace.observables.end())
        throw std::invalid_argument("magnetization_trace: sigma_z not recorded");
    return it->second;
}

} // namespace sbvar
