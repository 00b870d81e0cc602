#pragma once

// Existence criteria for positive solutions of Delta u + sigma u^q <= 0 on
// model manifolds, evaluated numerically.
//
// Integral criteria are truncated at kTruncation and classified by the tail
// fit in classify.hpp. Sup criteria are sampled on a log grid and classified
// by running-max stabilization; off-center balls are bracketed (exact lower
// bound at the pole, annulus upper bound for homogeneous profiles).

#include "greencrit/classify.hpp"
#include "greencrit/green.hpp"
#include "greencrit/profiles.hpp"
#include "greencrit/report.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace greencrit {

/// int_{r0}^inf R^{q-1} sigma(B(o,r)) / V(r) r dr.
CriterionReport eval_cond_int1(const VolumeProfile& volume, const MeasureProfile& measure, double q, double r0,
                               const KernelOptions& options = {});

/// sup_x int_0^r sigma(B(x,s)) / mu(B(x,s)) s ds * R(r)^{q-1} over r >= r0.
CriterionReport eval_cond_int2(const VolumeProfile& volume, const MeasureProfile& measure, double q, double r0,
                               std::size_t center_samples = 8, const KernelOptions& options = {});

/// int_{r0}^inf r^{2q-1} / V(r)^{q-1} dr.
CriterionReport eval_cond_int1b(const VolumeProfile& volume, double q, double r0);

/// int_{r0}^inf sigma(B~(o,t)) / t^{g q + 1} dt with g = metric.kernel_exponent().
CriterionReport eval_cond1(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric,
                           double q, double r0);

/// sup_x int_0^r sigma(B~(x,s)) / s^{g+1} ds / r^{g (q-1)} over r >= r0.
CriterionReport eval_cond2(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric,
                           double q, double r0, std::size_t center_samples = 8);

/// int_0^1 sigma(B~(o,s)) / s^{g+1} ds, the small-s part of cond-2 at the pole.
double cond2_small_s_integral(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric);

/// 1 / R(r0).
double default_a(const GreenRadialKernel& kernel, double r0);

/// sum_i min(R_i, 1/a)^q w_sigma_i plus the tail int_{r_max}^inf R^q Phi V'.
CriterionReport eval_last1(const DiscreteKernel& dk, double q, double a);

/// Log grid over (a, 1/R(r_max)] with kPointsPerDecade points per decade.
std::vector<double> last2_default_grid(const DiscreteKernel& dk, double a);

/// sup_x sum_{j in A(o,r)} G_xj w_sigma_j / r^{q-1}; empty r_grid uses last2_default_grid.
CriterionReport eval_last2(const DiscreteKernel& dk, double q, double a, const std::vector<double>& r_grid = {});

/// C = sup G[m^q sigma] / m with m = min(R, 1/a), including the mass beyond r_max.
CriterionReport eval_cond_m(const DiscreteKernel& dk, double q, double a);

/// int_{r0}^inf R^{alpha/(alpha-2)} V' dr. Open conjecture; reported as exploratory.
CriterionReport conjecture2_integral(const VolumeProfile& volume, double alpha, double r0);

// ---------------------------------------------------------------------------

struct CriterionParams
{
    VolumeProfile volume = VolumeProfile::euclidean(3);
    MeasureProfile measure = MeasureProfile::unit();
    std::optional<QuasiMetric> metric;
    double r0 = 1.0;
    std::size_t center_samples = 8;
    GridSpec grid;
    /// 0 selects default_a(kernel, r0).
    double a = 0.0;
    KernelOptions kernel;
    /// Conjecture exponent; 0 selects the profile tail exponent.
    double alpha = 0.0;
};

CriterionReport evaluate_criterion(CriterionId id, const CriterionParams& params, double q);

/// Finite when both are positive, Divergent when either is negative.
Verdict joint_verdict(Verdict a, Verdict b);

struct JointReport
{
    std::string name;
    CriterionReport first;
    CriterionReport second;
    Verdict verdict = Verdict::Inconclusive;
};

/// "main" = cond-int1 and cond-int2; "thm3" = cond-1 and cond-2.
JointReport evaluate_joint(const std::string& name, const CriterionParams& params, double q);

/// Verdict of a single criterion name ("cond-int1b", ...) or a joint name.
Verdict scan_verdict(const std::string& target, const CriterionParams& params, double q);

struct ExponentScan
{
    double q_lo = 0.0;
    double q_hi = 0.0;
    double q_critical = 0.0;
    /// Uniform grid points followed by bisection midpoints, sorted by q.
    std::vector<std::pair<double, Verdict>> verdict_map;
    std::size_t inconclusive = 0;
};

/// Bisection on q for the verdict switch. The ends must carry different,
/// conclusive verdicts (BracketError otherwise). `grid_points` uniform
/// q-values are evaluated in parallel first (GREENCRIT_THREADS workers).
ExponentScan critical_exponent(const std::function<Verdict(double)>& verdict_of, double q_lo, double q_hi,
                               double tol, std::size_t grid_points = 9);

// ---------------------------------------------------------------------------

/// Non-increasing step function on (0, inf): values[k] on (breaks[k], breaks[k+1]],
/// breaks[0] = 0, then tail_coefficient * t^{-tail_power} beyond breaks.back()
/// (zero when tail_coefficient = 0).
struct StepFunction
{
    std::vector<double> breaks;
    std::vector<double> values;
    double tail_coefficient = 0.0;
    double tail_power = 3.0;

    double operator()(double t) const;
    /// Throws PreconditionError unless non-negative, non-increasing, tail_power > 2.
    void validate() const;
};

/// Random step function with 1..10 steps on log-uniform breaks in [1e-2, 1e2];
/// a third of the draws carry a power tail.
StepFunction random_step_function(std::mt19937_64& rng);

struct HardyResult
{
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    bool holds() const { return lhs <= rhs * (1.0 + 1e-12); }
};

/// s 2^{1-s} max((4/3)^{1-s}, 3^s / (2s)).
double hardy_constant(double s);

/// (int_r^inf phi t dt)^s against C (int_r^inf phi^s t^{2s-1} dt + r^{2s} phi(r)^s).
HardyResult hardy_check(const StepFunction& phi, double s, double r);

} // namespace greencrit
