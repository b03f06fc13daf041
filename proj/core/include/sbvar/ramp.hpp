#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sbvar {

enum class RampKind { linear, local_adiabatic, crab };

/// Time-dependent coupling schedule. Evaluation yields a dimensionless
/// multiplier on the final couplings; scale(0) = 0 for linear/CRAB and
/// scale(t_f) = 1 exactly for all kinds.
class RampProtocol {
public:
    static RampProtocol linear(double t_f);

    /// CRAB-modulated linear carrier: scale(t) = (t/t_f) f(t) with
    ///   f(t) = [1 + sum_j A_j sin(nu_j t) + B_j cos(nu_j t)] / N,
    ///   N = 1 + sum_j B_j,  nu_j = 2 pi j (1 + r_j)/t_f,  r_j in {0,1}.
    static RampProtocol crab(double t_f, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const std::vector<int>& r);

    /// Tabulated monotone schedule (t_i, scale_i); evaluated by monotone
    /// cubic (PCHIP) interpolation. Table must start at scale 0 (or the
    /// initial coupling fraction) and end at exactly 1 at t_f.
    static RampProtocol local_adiabatic(std::vector<double> t, std::vector<double> scale);

    double operator()(double t) const { return scale(t); }
    double scale(double t) const;

    RampKind kind() const { return kind_; }
    double t_f() const { return t_f_; }
    const Eigen::VectorXd& crab_a() const { return a_; }
    const Eigen::VectorXd& crab_b() const { return b_; }
    const std::vector<int>& crab_r() const { return r_; }
    const std::vector<double>& table_t() const { return tab_t_; }
    const std::vector<double>& table_scale() const { return tab_s_; }

    nlohmann::json to_json() const;
    static RampProtocol from_json(const nlohmann::json& j);

private:
    RampProtocol() = default;
    RampKind kind_ = RampKind::linear;
    double t_f_ = 0.0;
    Eigen::VectorXd a_, b_;   // CRAB coefficients
    std::vector<int> r_;      // frozen random bits
    double norm_ = 1.0;       // CRAB normalization 1 + sum B_j
    std::vector<double> tab_t_, tab_s_; // LA table
    std::vector<double> tab_d_;         // PCHIP slopes
};

/// Builds a local-adiabatic schedule by integrating dg/dt = gap(g)^2 / gamma
/// from g = 0 to g_final. Returns the tabulated protocol; its t_f is
/// gamma * int_0^{g_final} dg / gap(g)^2.
RampProtocol local_adiabatic_table(const std::function<double(double)>& gap_fn,
                                   double g_final, double gamma, int grid_points = 1001);

} // namespace sbvar
