#pragma once

#include "greencrit/asymptotics.hpp"
#include "greencrit/report.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace greencrit {

enum class VolumeFamily { Power, PowerLog, Euclidean, TwoRegime, Tabulated };

/// Radial volume growth r -> mu(B(o, r)).
///
/// PowerLog(c, alpha, k) is c r^alpha (ln r)^p for k = 1 and
/// c r^alpha (ln r)^p (ln ln r)^p for k = 2, with p = (alpha - 2) / 2. The
/// formula only makes sense above r_s = e (k = 1) or e^e (k = 2); below r_s
/// the profile continues as the power law V(r_s) (r / r_s)^beta whose
/// exponent matches the logarithmic derivative at r_s, so V is C^1.
class VolumeProfile
{
public:
    static VolumeProfile power(double c, double alpha);
    static VolumeProfile power_log(double c, double alpha, int k);
    static VolumeProfile euclidean(int n);
    static VolumeProfile two_regime(double n, double alpha);
    /// Samples (r_i, V_i) with strictly increasing r and V; at least 4 points.
    static VolumeProfile tabulated(std::vector<double> r, std::vector<double> v);
    /// Two-column CSV (r, V); a non-numeric first line is treated as a header.
    static VolumeProfile from_csv(const std::string& path);

    VolumeFamily family() const { return family_; }

    double volume(double r) const;
    double log_volume(double r) const;
    double surface_density(double r) const;
    /// d ln V / d ln r.
    double log_derivative(double r) const;

    double tail_exponent() const { return tail_exponent_; }
    const std::vector<double>& log_powers() const { return log_powers_; }
    /// beta with V(r) ~ r^beta as r -> 0 (fitted head slope for Tabulated).
    double small_r_exponent() const { return small_exponent_; }
    /// Radius below which the small-r power law is exact (closed forms), or
    /// the first grid radius (Tabulated).
    double regular_radius() const { return regular_radius_; }
    /// Whether mu(B(x, r)) is comparable to V(r) uniformly in x.
    bool homogeneous() const;
    /// Comparison constant D with V(r)/D <= mu(B(x,r)) <= D V(r) for homogeneous profiles.
    double homogeneity_constant() const;
    /// Exact asymptotic form of V; empty for Tabulated.
    std::optional<PowerLaw> tail_signature() const;
    /// Tabulated only: drift of the fitted log-log slope between the last two
    /// decades of the table (0 for closed forms).
    double tail_fit_instability() const;

    /// Tabulated grid range; [0, inf) for closed forms.
    double domain_min() const { return domain_min_; }
    double domain_max() const { return domain_max_; }

    double coefficient() const { return c_; }
    double dimension() const { return n_; }
    int log_order() const { return k_; }

    std::string describe() const;

private:
    struct Table;

    VolumeProfile() = default;
    double power_log_core(double log_r) const;

    VolumeFamily family_ = VolumeFamily::Power;
    double c_ = 1.0;
    double alpha_ = 0.0;
    double n_ = 0.0;
    int k_ = 0;
    double tail_exponent_ = 0.0;
    std::vector<double> log_powers_;
    double small_exponent_ = 0.0;
    double regular_radius_ = 1.0;
    double switch_log_volume_ = 0.0;
    double domain_min_ = 0.0;
    double domain_max_ = 0.0;
    std::shared_ptr<const Table> table_;
};

enum class MeasureFamily { Unit, RadialPower, Tabulated };

/// Radial density Phi of sigma with respect to mu.
class MeasureProfile
{
public:
    static MeasureProfile unit();
    /// Phi(r) = c r^m with c >= 0 (c = 0 gives the zero measure).
    static MeasureProfile radial_power(double c, double m);
    /// Piecewise-linear in ln r between samples, constant beyond both ends.
    static MeasureProfile tabulated(std::vector<double> r, std::vector<double> phi);
    static MeasureProfile from_csv(const std::string& path);

    MeasureFamily family() const { return family_; }
    double density(double r) const;
    /// sup of Phi over [lo, hi] (lo may be 0; +inf when unbounded there).
    double max_density(double lo, double hi) const;
    double m_exponent() const { return m_; }
    double coefficient() const { return c_; }
    bool is_zero() const;
    /// Phi ~ r^power as r -> infinity; empty for Tabulated.
    std::optional<PowerLaw> tail_signature() const;
    /// Exponent of Phi as r -> 0 (0 for Unit and Tabulated).
    double small_r_exponent() const;

    /// Rejects densities that are not locally integrable against the volume at
    /// the origin (m <= -beta for RadialPower).
    void validate(const VolumeProfile& volume) const;

    std::string describe() const;

private:
    MeasureProfile() = default;

    MeasureFamily family_ = MeasureFamily::Unit;
    double c_ = 1.0;
    double m_ = 0.0;
    std::shared_ptr<const std::vector<double>> log_r_;
    std::shared_ptr<const std::vector<double>> phi_;
};

/// sigma(B(o, r)) = int_0^r Phi V' ds; closed forms where available.
double sigma_ball(const VolumeProfile& volume, const MeasureProfile& measure, double r);
/// Same quantity, always by adaptive quadrature (independent route).
double sigma_ball_by_quadrature(const VolumeProfile& volume, const MeasureProfile& measure, double r,
                                double rel_tol = 1e-10);
/// Exact asymptotic form of sigma(B(o, r)) when both profiles have one.
std::optional<PowerLaw> sigma_ball_signature(const VolumeProfile& volume, const MeasureProfile& measure);

/// max over log-uniform radii in [r_min, r_max] of V(2r)/V(r).
double check_doubling(const VolumeProfile& profile, double r_min, double r_max, std::size_t samples);

/// Classifies int_{r0}^inf t / V(t) dt.
CriterionReport check_nonparabolic(const VolumeProfile& profile, double r0);

/// Parses "euclidean:3", "power:1,4", "powerlog:1,4,1", "tworegime:3,4",
/// "tabulated:path.csv".
VolumeProfile parse_volume_spec(const std::string& spec);
/// Parses "unit", "radial_power:1,1", "tabulated:path.csv".
MeasureProfile parse_measure_spec(const std::string& spec);

} // namespace greencrit
