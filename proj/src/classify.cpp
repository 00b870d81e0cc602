#include "greencrit/classify.hpp"

#include "greencrit/error.hpp"
#include "greencrit/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace greencrit {

TailFit fit_tail(const std::function<double(double)>& f, double lo, double hi)
{
    TailFit out;
    std::vector<double> xs;
    std::vector<double> ys;
    bool saw_infinite = false;
    const double step = std::log(hi / lo) / (kTailFitSamples - 1);
    for (int i = 0; i < kTailFitSamples; ++i) {
        const double x = std::log(lo) + step * i;
        const double v = f(std::exp(x));
        if (std::isinf(v) && v > 0) {
            saw_infinite = true;
            continue;
        }
        if (!(v > 0.0) || !std::isfinite(v))
            continue;
        xs.push_back(x);
        ys.push_back(std::log(v));
    }
    if (saw_infinite) {
        out.slope = out.local_slope = std::numeric_limits<double>::infinity();
        return out;
    }
    if (xs.size() < 4) {
        out.vanishing = true;
        out.slope = out.local_slope = -std::numeric_limits<double>::infinity();
        return out;
    }

    const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), n);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
    const double x_mean = x.mean();

    Eigen::MatrixXd a2(n, 2);
    a2.col(0).setOnes();
    a2.col(1) = x.array() - x_mean;
    out.local_slope = a2.colPivHouseholderQr().solve(y)(1);

    Eigen::VectorXd lx = x.array().log();
    Eigen::MatrixXd a3(n, 3);
    a3.col(0).setOnes();
    a3.col(1) = x.array() - x_mean;
    a3.col(2) = lx.array() - lx.mean();
    const Eigen::Vector3d coef = a3.colPivHouseholderQr().solve(y);
    out.slope = coef(1);
    out.log_slope = coef(2);
    return out;
}

Verdict classify_at_infinity(const TailFit& fit, const std::optional<PowerLaw>& signature)
{
    if (fit.vanishing)
        return Verdict::Finite;
    if (std::isnan(fit.slope))
        return Verdict::Inconclusive;
    if (fit.slope < -1.0 - kSlopeMargin)
        return Verdict::Finite;
    if (fit.slope > -1.0 + kSlopeMargin)
        return Verdict::Divergent;
    if (signature)
        return converges_at_infinity(*signature) ? Verdict::Finite : Verdict::Divergent;
    return Verdict::Inconclusive;
}

Verdict classify_at_zero(double slope, const std::optional<double>& exact_power)
{
    if (std::isnan(slope))
        return Verdict::Inconclusive;
    if (slope > -1.0 + kSlopeMargin)
        return Verdict::Finite;
    if (slope < -1.0 - kSlopeMargin)
        return Verdict::Divergent;
    if (exact_power)
        return converges_at_zero(*exact_power) ? Verdict::Finite : Verdict::Divergent;
    return Verdict::Inconclusive;
}

IntegralEvaluation evaluate_integral_at_infinity(const std::function<double(double)>& f, double r0,
                                                 const std::optional<PowerLaw>& signature,
                                                 double r_top)
{
    IntegralEvaluation out;
    if (r0 < r_top) {
        try {
            out.truncated_value = integrate_log(f, r0, r_top, kCriteriaRelTol);
        } catch (const NumericalFailure& e) {
            out.truncated_value = e.partial_estimate;
            out.partial = true;
        }
    }
    out.fit = fit_tail(f, r_top / 10.0, r_top);
    out.verdict = classify_at_infinity(out.fit, signature);
    return out;
}

std::vector<double> log_grid(double lo, double hi, int per_decade)
{
    if (!(lo > 0.0) || !(hi > lo))
        throw PreconditionError("log_grid: need 0 < lo < hi");
    const double decades = std::log10(hi / lo);
    const auto count = static_cast<std::size_t>(std::max(2.0, std::round(decades * per_decade) + 1.0));
    std::vector<double> out(count);
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo * std::exp(step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

namespace {

std::vector<double> running_max(const std::vector<double>& v)
{
    std::vector<double> out(v.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        m = std::max(m, v[i]);
        out[i] = m;
    }
    return out;
}

std::size_t last_index_at_most(const std::vector<double>& r, double bound)
{
    std::size_t idx = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] <= bound * (1.0 + 1e-12))
            idx = i;
    return idx;
}

double growth(double later, double earlier)
{
    if (std::isinf(later))
        return std::numeric_limits<double>::infinity();
    if (earlier <= 0.0)
        return later <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return later / earlier - 1.0;
}

double top_decade_slope(const std::vector<double>& r, const std::vector<double>& v)
{
    const double top = r.back();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < top / 10.0 * (1.0 - 1e-12))
            continue;
        if (std::isinf(v[i]))
            return std::numeric_limits<double>::infinity();
        if (!(v[i] > 0.0))
            continue;
        const double x = std::log(r[i]);
        const double y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2)
        return -std::numeric_limits<double>::infinity();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

SupClassification classify_sup(const std::vector<double>& r, const std::vector<double>& lower,
                               const std::vector<double>& upper)
{
    SupClassification out;
    if (r.size() < 2 || lower.size() != r.size() || (!upper.empty() && upper.size() != r.size()))
        throw PreconditionError("classify_sup: inconsistent sample sizes");
    const double top = r.back();
    if (r.front() > top / 100.0 * (1.0 + 1e-9))
        throw PreconditionError("classify_sup: r-grid must span at least two decades");
    const std::size_t i1 = last_index_at_most(r, top / 10.0);
    const std::size_t i2 = last_index_at_most(r, top / 100.0);

    const auto lmax = running_max(lower);
    out.lower_max = lmax.back();
    out.lower_growth_last = growth(lmax.back(), lmax[i1]);
    out.lower_growth_prev = growth(lmax[i1], lmax[i2]);
    out.slope = top_decade_slope(r, lower);

    if (!upper.empty()) {
        const auto umax = running_max(upper);
        out.upper_max = umax.back();
        out.upper_growth_last = growth(umax.back(), umax[i1]);
        out.upper_growth_prev = growth(umax[i1], umax[i2]);
        const bool finite = std::all_of(upper.begin(), upper.end(), [](double v) { return std::isfinite(v); });
        if (finite && out.upper_growth_last < kGrowthTolerance && out.upper_growth_prev < kGrowthTolerance) {
            out.verdict = Verdict::Bounded;
            out.bracket = Bracket::UpperBound;
            out.slope = top_decade_slope(r, upper);
            return out;
        }
    }
    const bool lower_infinite = std::any_of(lower.begin(), lower.end(), [](double v) { return std::isinf(v); });
    if (lower_infinite ||
        (out.lower_growth_last > kGrowthTolerance && out.lower_growth_prev > kGrowthTolerance)) {
        out.verdict = Verdict::Unbounded;
        out.bracket = Bracket::LowerBound;
        return out;
    }
    out.verdict = Verdict::Inconclusive;
    out.bracket = upper.empty() ? Bracket::LowerBound : Bracket::UpperBound;
    return out;
}

} // namespace greencrit
