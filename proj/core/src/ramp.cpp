#include "sbvar/ramp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sbvar {

namespace {

// Fritsch-Carlson monotone cubic slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0), h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        del[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    d[0] = ((2.0 * h[0] + h[1]) * del[0] - h[0] * del[1]) / (h[0] + h[1]);
    if (d[0] * del[0] <= 0.0) d[0] = 0.0;
    else if (del[0] * del[1] <= 0.0 && std::abs(d[0]) > 3.0 * std::abs(del[0]))
        d[0] = 3.0 * del[0];
    const std::size_t m = n - 1;
    d[m] = ((2.0 * h[m - 1] + h[m - 2]) * del[m - 1] - h[m - 1] * del[m - 2]) /
           (h[m - 1] + h[m - 2]);
    if (d[m] * del[m - 1] <= 0.0) d[m] = 0.0;
    else if (del[m - 1] * del[m - 2] <= 0.0 && std::abs(d[m]) > 3.0 * std::abs(del[m - 1]))
        d[m] = 3.0 * del[m - 1];
    return d;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& d, double t) {
    const std::size_t n = x.size();
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (x[mid] <= t) lo = mid; else hi = mid;
    }
    const double h = x[hi] - x[lo];
    const double s = (t - x[lo]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * y[lo] + h10 * h * d[lo] + h01 * y[hi] + h11 * h * d[hi];
}

} // namespace

RampProtocol RampProtocol::linear(double t_f) {
    if (t_f <= 0.0) throw std::invalid_argument("RampProtocol: t_f must be positive");
    RampProtocol p;
    p.kind_ = RampKind::linear;
    p.t_f_ = t_f;
    return p;
}

RampProtocol RampProtocol::crab(double t_f, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b, const std::vector<int>& r) {
    if (t_f <= 0.0) throw std::invalid_argument("RampProtocol: t_f must be positive");
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != r.size())
        throw std::invalid_argument("RampProtocol: CRAB coefficient length mismatch");
    RampProtocol p;
    p.kind_ = RampKind::crab;
    p.t_f_ = t_f;
    p.a_ = a;
    p.b_ = b;
    p.r_ = r;
    p.norm_ = 1.0 + b.sum();
    if (p.norm_ == 0.0)
        throw std::invalid_argument("RampProtocol: rejected CRAB coefficients (N = 0)");
    return p;
}

RampProtocol RampProtocol::local_adiabatic(std::vector<double> t, std::vector<double> scale) {
    if (t.size() != scale.size() || t.size() < 2)
        throw std::invalid_argument("RampProtocol: bad LA table");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1] || scale[i] <= scale[i - 1])
            throw std::invalid_argument("RampProtocol: LA table must be strictly monotone");
    RampProtocol p;
    p.kind_ = RampKind::local_adiabatic;
    p.t_f_ = t.back();
    p.tab_d_ = pchip_slopes(t, scale);
    p.tab_t_ = std::move(t);
    p.tab_s_ = std::move(scale);
    return p;
}

double RampProtocol::scale(double t) const {
    if (t < -1e-12 || t > t_f_ * (1.0 + 1e-12))
        throw std::out_of_range("RampProtocol: t outside [0, t_f]");
    t = std::clamp(t, 0.0, t_f_);
    switch (kind_) {
    case RampKind::linear:
        return t / t_f_;
    case RampKind::crab: {
        if (t == t_f_) return 1.0; // exact by the normalization of f
        double f = 1.0;
        for (int j = 0; j < a_.size(); ++j) {
            const double nu = 2.0 * std::numbers::pi * (j + 1) * (1 + r_[j]) / t_f_;
            f += a_[j] * std::sin(nu * t) + b_[j] * std::cos(nu * t);
        }
        return (t / t_f_) * f / norm_;
    }
    case RampKind::local_adiabatic:
        return pchip_eval(tab_t_, tab_s_, tab_d_, t);
    }
    return 0.0;
}

nlohmann::json RampProtocol::to_json() const {
    nlohmann::json j;
    j["t_f"] = t_f_;
    switch (kind_) {
    case RampKind::linear:
        j["kind"] = "linear";
        break;
    case RampKind::crab: {
        j["kind"] = "crab";
        j["A"] = std::vector<double>(a_.data(), a_.data() + a_.size());
        j["B"] = std::vector<double>(b_.data(), b_.data() + b_.size());
        j["r"] = r_;
        break;
    }
    case RampKind::local_adiabatic:
        j["kind"] = "local_adiabatic";
        j["t"] = tab_t_;
        j["scale"] = tab_s_;
        break;
    }
    return j;
}

RampProtocol RampProtocol::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    const double t_f = j.at("t_f");
    if (kind == "linear") return linear(t_f);
    if (kind == "crab") {
        const auto av = j.at("A").get<std::vector<double>>();
        const auto bv = j.at("B").get<std::vector<double>>();
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(av.data(), av.size());
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(bv.data(), bv.size());
        return crab(t_f, a, b, j.at("r").get<std::vector<int>>());
    }
    if (kind == "local_adiabatic")
        return local_adiabatic(j.at("t").get<std::vector<double>>(),
                               j.at("scale").get<std::vector<double>>());
    throw std::invalid_argument("RampProtocol: unknown kind " + kind);
}

RampProtocol local_adiabatic_table(const std::function<double(double)>& gap_fn,
                                   double g_final, double gamma, int grid_points) {
    if (g_final <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("local_adiabatic_table: g_final, gamma must be positive");
    if (grid_points < 3) grid_points = 3;

    // t(g) = gamma * int_0^g dg' / gap(g')^2, composite Simpson per interval.
    const int n = grid_points;
    std::vector<double> g(n), t(n);
    const double dg = g_final / (n - 1);
    std::vector<double> inv2(n);
    for (int i = 0; i < n; ++i) {
        g[i] = i * dg;
        const double gap = gap_fn(g[i]);
        if (!(gap > 0.0))
            throw std::runtime_error("local_adiabatic_table: gap vanishes on the path");
        inv2[i] = 1.0 / (gap * gap);
    }
    t[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double gm = 0.5 * (g[i - 1] + g[i]);
        const double gapm = gap_fn(gm);
        if (!(gapm > 0.0))
            throw std::runtime_error("local_adiabatic_table: gap vanishes on the path");
        t[i] = t[i - 1] +
               gamma * dg / 6.0 * (inv2[i - 1] + 4.0 / (gapm * gapm) + inv2[i]);
    }

    std::vector<double> scale(n);
    for (int i = 0; i < n; ++i) scale[i] = g[i] / g_final;
    scale.back() = 1.0;
    return RampProtocol::local_adiabatic(std::move(t), std::move(scale));
}

} // namespace sbvar
