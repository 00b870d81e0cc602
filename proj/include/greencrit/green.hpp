#pragma once

#include "greencrit/asymptotics.hpp"
#include "greencrit/profiles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace greencrit {

struct KernelOptions
{
    double quad_rel_tol = 1e-10;
    /// Evaluate R by quadrature even when a closed form exists.
    bool force_quadrature = false;
};

enum class TailMode { AnalyticTail, NumericTailFit };

/// R(rho) = int_rho^inf t / V(t) dt, the radial Green kernel G(x, o) = R(d(x, o)).
class GreenRadialKernel
{
public:
    /// Throws DivergenceError for parabolic profiles and NumericalFailure when
    /// a tabulated tail fit is unstable.
    explicit GreenRadialKernel(VolumeProfile profile, KernelOptions options = {});

    double R(double rho) const;
    /// rho with R(rho) = v, by bisection in ln rho.
    double R_inverse(double v) const;
    /// sup R = lim_{rho -> 0+} R (inf for most profiles; R(r_min) for Tabulated).
    double R_sup() const { return r_sup_; }

    const VolumeProfile& profile() const { return profile_; }
    const KernelOptions& options() const { return options_; }
    TailMode tail_mode() const;
    /// alpha - 2 for the fitted or exact tail exponent alpha.
    double decay_exponent() const { return profile_.tail_exponent() - 2.0; }
    /// Asymptotic form of R; empty for Tabulated.
    std::optional<PowerLaw> tail_signature() const;

private:
    double closed_form(double rho) const;
    double by_quadrature(double rho) const;

    VolumeProfile profile_;
    KernelOptions options_;
    double r_sup_ = 0.0;
};

/// sup over log-uniform samples of R(rho) / R(2 rho).
double check_R_doubling(const GreenRadialKernel& kernel, double rho_min, double rho_max, std::size_t samples);

// ---------------------------------------------------------------------------

enum class MetricKind { InverseR, Snowflake, PowerOfDistance };

/// A quasi-metric on the model manifold written as d~ = phi(d) for an
/// increasing phi; only the radial profile phi is stored.
struct QuasiMetric
{
    MetricKind kind = MetricKind::PowerOfDistance;
    double kappa = 1.0;
    /// Doubling-derived bound sup R(rho/2)/R(rho) (InverseR) or kappa itself.
    double kappa_bound = 1.0;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double gamma = 1.0;       ///< Snowflake: large-distance Green exponent; PowerOfDistance: exponent
    double dimension = 0.0;   ///< Snowflake: n
    double gamma_tilde = 1.0; ///< Snowflake: target exponent
    double delta1 = 1.0;
    double delta2 = 1.0;
    std::optional<GreenRadialKernel> kernel; ///< InverseR only

    double transform(double d) const;
    double inverse(double t) const;
    /// Exponent g with G ~ d~^{-g}: 1 (InverseR), gamma_tilde (Snowflake), gamma (PowerOfDistance).
    double kernel_exponent() const;
    std::string report() const;
};

/// d~ = 1/R(d). kappa is the sampled collinear-triple constant.
QuasiMetric build_quasi_metric_inverse_r(const GreenRadialKernel& kernel, std::size_t samples_per_axis = 64,
                                         double d_min = 1e-3, double d_max = 1e3);
/// d~ = d^{delta1} for d > 1 and d^{delta2} for d <= 1, with delta1 = gamma/gamma_tilde
/// and delta2 = (n - 2)/gamma_tilde. Verifies the triangle inequality on `samples`
/// random triangles.
QuasiMetric build_snowflake_metric(double gamma, double n, double gamma_tilde, std::size_t samples = 10000,
                                   std::uint64_t seed = 1);
/// d~ = d with Green exponent gamma.
QuasiMetric build_power_metric(double gamma);
QuasiMetric parse_metric_spec(const std::string& spec, const GreenRadialKernel* kernel);

/// Idealized two-regime kernel d^-gamma (d >= 1), d^-(n-2) (d < 1).
std::function<double(double)> two_regime_kernel(double gamma, double n);

/// (min, max) over log-uniform d of G(d) * d~(d)^{gamma_tilde}.
std::pair<double, double> check_g_equiv_snowflake(const std::function<double(double)>& green,
                                                  const QuasiMetric& metric, double gamma_tilde,
                                                  std::size_t samples = 2001, double d_min = 1e-3,
                                                  double d_max = 1e3);

/// Least kappa with 1/G(x,y) <= kappa (1/G(x,z) + 1/G(z,y)) over collinear
/// triples with d(x,z) = a, d(z,y) = b and d(x,y) in {a + b, |a - b|}, for a, b
/// on a log-uniform grid of `samples_per_axis` points in [d_min, d_max].
double estimate_3g_constant(const std::function<double(double)>& green, std::size_t samples_per_axis,
                            double d_min = 1e-3, double d_max = 1e3);

// ---------------------------------------------------------------------------

struct GridSpec
{
    double r_min = 1e-3;
    double r_max = 1e6;
    std::size_t n = 1024;
};

/// Finite radial discretization with G_ij = R(max(rho_i, rho_j)).
class DiscreteKernel
{
public:
    DiscreteKernel(GreenRadialKernel kernel, MeasureProfile measure, std::vector<double> radii,
                   std::vector<double> weight_mu, std::vector<double> weight_sigma);

    std::size_t size() const { return radii_.size(); }
    const std::vector<double>& radii() const { return radii_; }
    const std::vector<double>& weight_mu() const { return weight_mu_; }
    const std::vector<double>& weight_sigma() const { return weight_sigma_; }
    /// R(rho_i).
    const std::vector<double>& diagonal() const { return r_values_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const GreenRadialKernel& kernel() const { return kernel_; }
    const MeasureProfile& measure() const { return measure_; }
    double r_min() const { return radii_.front(); }
    double r_max() const { return radii_.back(); }

    /// Dense product G v.
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    /// Same product in O(N) from the shell structure (ignores any corruption
    /// introduced by with_entry).
    Eigen::VectorXd apply_shell(const Eigen::VectorXd& v) const;

    DiscreteKernel with_entry(std::size_t i, std::size_t j, double value) const;
    DiscreteKernel with_sigma_weights(std::vector<double> weight_sigma) const;

    bool is_symmetric() const;
    /// Each row non-increasing in rho_j for rho_j >= rho_i, and positive.
    bool rows_monotone() const;

    /// `rho,weight_mu,weight_sigma` rows, and the matrix as plain CSV rows.
    void write_csv(const std::string& weights_path, const std::string& matrix_path) const;

private:
    GreenRadialKernel kernel_;
    MeasureProfile measure_;
    std::vector<double> radii_;
    std::vector<double> weight_mu_;
    std::vector<double> weight_sigma_;
    std::vector<double> r_values_;
    Eigen::MatrixXd matrix_;
};

/// Log-uniform radii; shell weights by the trapezoid rule in ln rho.
DiscreteKernel discretize(const GreenRadialKernel& kernel, const MeasureProfile& measure, const GridSpec& grid);

} // namespace greencrit
