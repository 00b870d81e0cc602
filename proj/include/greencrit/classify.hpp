#pragma once

// Numerical classification of improper integrals and suprema.
//
// Integrals at infinity are truncated at kTruncation. The integrand is
// sampled over the top decade and fitted by ln f = c + beta ln r + lambda ln ln r;
// beta is the reported tail slope. The ln ln r column absorbs a single
// logarithmic factor, so that 1/(r ln r) reports beta = -1 instead of its
// local slope (about -1.08 at r = 1e6).

#include "greencrit/asymptotics.hpp"
#include "greencrit/report.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace greencrit {

inline constexpr double kSlopeMargin = 0.05;
inline constexpr double kTruncation = 1e6;
inline constexpr int kPointsPerDecade = 64;
inline constexpr double kGrowthTolerance = 0.01;
inline constexpr int kTailFitSamples = 33;
inline constexpr double kCriteriaRelTol = 1e-9;

struct TailFit
{
    double slope = 0.0;      ///< beta
    double log_slope = 0.0;  ///< lambda
    double local_slope = 0.0; ///< plain two-parameter log-log slope
    bool vanishing = false;  ///< integrand identically zero on the fit window
};

/// Fits ln f over log-uniform samples of [lo, hi].
TailFit fit_tail(const std::function<double(double)>& f, double lo, double hi);

/// Verdict for int^inf f given its fitted tail and, optionally, its exact form.
Verdict classify_at_infinity(const TailFit& fit, const std::optional<PowerLaw>& signature);

/// Verdict for int_0 f given the fitted slope near 0 and, optionally, the
/// exact exponent of f at 0.
Verdict classify_at_zero(double slope, const std::optional<double>& exact_power);

struct IntegralEvaluation
{
    double truncated_value = 0.0;
    TailFit fit;
    Verdict verdict = Verdict::Inconclusive;
    bool partial = false; ///< quadrature returned a partial estimate
};

/// int_{r0}^{r_top} f plus tail classification on [r_top / 10, r_top].
IntegralEvaluation evaluate_integral_at_infinity(const std::function<double(double)>& f, double r0,
                                                 const std::optional<PowerLaw>& signature,
                                                 double r_top = kTruncation);

/// Log-uniform grid over [lo, hi] with `per_decade` points per decade,
/// always including both ends.
std::vector<double> log_grid(double lo, double hi, int per_decade = kPointsPerDecade);

struct SupClassification
{
    Verdict verdict = Verdict::Inconclusive;
    Bracket bracket = Bracket::Exact;
    double upper_max = 0.0;
    double lower_max = 0.0;
    double slope = 0.0;
    double upper_growth_last = 0.0;
    double upper_growth_prev = 0.0;
    double lower_growth_last = 0.0;
    double lower_growth_prev = 0.0;
};

/// Stabilization test on running maxima over the top two decades of `r`.
/// `upper` may be empty when only a lower bound is available.
SupClassification classify_sup(const std::vector<double>& r, const std::vector<double>& lower,
                               const std::vector<double>& upper);

} // namespace greencrit
