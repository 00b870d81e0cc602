#include "greencrit/criteria.hpp"

#include "greencrit/error.hpp"
#include "greencrit/quadrature.hpp"
#include "greencrit/util.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace greencrit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInnerRelTol = 1e-8;
constexpr int kSamplesPerDecade = 16;

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw PreconditionError(message);
}

void require_q(double q)
{
    require(q > 1.0, "q must be > 1 (got " + format_number(q) + ")");
}

double truncation_for(const VolumeProfile& v)
{
    return std::min(kTruncation, v.domain_max());
}

/// ln V with the fitted power laws continuing a tabulated profile past both ends.
double extended_log_volume(const VolumeProfile& v, double r)
{
    if (v.family() == VolumeFamily::Tabulated) {
        if (r < v.domain_min())
            return v.log_volume(v.domain_min()) + v.small_r_exponent() * std::log(r / v.domain_min());
        if (r > v.domain_max())
            return v.log_volume(v.domain_max()) + v.tail_exponent() * std::log(r / v.domain_max());
    }
    return v.log_volume(r);
}

double extended_log_surface_density(const VolumeProfile& v, double r)
{
    if (v.family() == VolumeFamily::Tabulated && r > v.domain_max())
        return extended_log_volume(v, r) + std::log(v.tail_exponent()) - std::log(r);
    if (v.family() == VolumeFamily::Tabulated && r < v.domain_min())
        return extended_log_volume(v, r) + std::log(v.small_r_exponent()) - std::log(r);
    return v.log_volume(r) + std::log(v.log_derivative(r)) - std::log(r);
}

double sigma_over_volume(const VolumeProfile& v, const MeasureProfile& m, double s)
{
    if (m.family() == MeasureFamily::Unit)
        return 1.0;
    const double sb = sigma_ball(v, m, s);
    if (sb <= 0.0)
        return 0.0;
    return std::exp(std::log(sb) - extended_log_volume(v, s));
}

std::vector<std::pair<double, double>> sample(const std::function<double(double)>& f, double lo, double hi)
{
    std::vector<std::pair<double, double>> out;
    if (!(hi > lo))
        return out;
    for (double r : log_grid(lo, hi, kSamplesPerDecade))
        out.emplace_back(r, f(r));
    return out;
}

CriterionReport integral_report(CriterionId id, const std::function<double(double)>& f, double r0,
                                const std::optional<PowerLaw>& signature, double top)
{
    require(r0 > 0.0, "r0 must be positive");
    require(r0 < top, "r0 must lie below the truncation radius " + format_number(top));
    const auto eval = evaluate_integral_at_infinity(f, r0, signature, top);
    CriterionReport rep;
    rep.criterion_id = id;
    rep.verdict = eval.verdict;
    rep.truncated_value = std::max(0.0, eval.truncated_value);
    rep.tail_slope = eval.fit.slope;
    rep.constant_estimate = rep.truncated_value;
    rep.bracket = Bracket::Exact;
    rep.add("tail_log_slope", eval.fit.log_slope);
    rep.add("tail_local_slope", eval.fit.local_slope);
    rep.add("r0", r0);
    rep.add("truncation", top);
    if (eval.partial)
        rep.add("quadrature", "partial");
    rep.add("signature", signature ? "closed-form" : "none");
    rep.samples = sample(f, r0, top);
    return rep;
}

/// Fills verdict/value fields of a sup-type report from its classification.
void apply_sup(CriterionReport& rep, const SupClassification& sc, bool has_upper)
{
    rep.verdict = sc.verdict;
    rep.bracket = sc.bracket;
    rep.tail_slope = sc.slope;
    const double value = (sc.verdict == Verdict::Unbounded || !has_upper) ? sc.lower_max : sc.upper_max;
    rep.truncated_value = std::max(0.0, value);
    rep.constant_estimate = rep.truncated_value;
    rep.add("lower_max", sc.lower_max);
    rep.add("lower_growth_last_decade", sc.lower_growth_last);
    rep.add("lower_growth_prev_decade", sc.lower_growth_prev);
    if (has_upper) {
        rep.add("upper_max", sc.upper_max);
        rep.add("upper_growth_last_decade", sc.upper_growth_last);
        rep.add("upper_growth_prev_decade", sc.upper_growth_prev);
    }
}

std::vector<double> center_fractions(std::size_t count)
{
    require(count >= 1, "center_samples must be at least 1");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

/// Exponent of phi^{-1}... as d -> 0: d~ = d^{e}. Snowflake and power metrics only.
double metric_small_exponent(const QuasiMetric& metric)
{
    return metric.kind == MetricKind::Snowflake ? metric.delta2 : 1.0;
}

double metric_large_exponent(const QuasiMetric& metric)
{
    return metric.kind == MetricKind::Snowflake ? metric.delta1 : 1.0;
}

void require_explicit_metric(const QuasiMetric& metric, const char* name)
{
    require(metric.kind != MetricKind::InverseR,
            std::string(name) + " needs a snowflake or power-of-distance metric");
}

/// f = R^q Phi V' and its exact tail form, shared by last-1 and cond-m.
struct MassTail
{
    std::function<double(double)> log_f;
    std::optional<PowerLaw> signature;
    TailFit fit;
    Verdict verdict = Verdict::Inconclusive;
};

MassTail mass_tail(const GreenRadialKernel& kernel, const MeasureProfile& measure, double q)
{
    const VolumeProfile& v = kernel.profile();
    MassTail out;
    out.log_f = [&kernel, &measure, &v, q](double log_r) {
        const double r = std::exp(log_r);
        const double phi = measure.density(r);
        if (!(phi > 0.0))
            return -kInf;
        return q * std::log(kernel.R(r)) + std::log(phi) + extended_log_surface_density(v, r);
    };
    const auto rs = kernel.tail_signature();
    const auto ms = measure.tail_signature();
    const auto vs = v.tail_signature();
    if (rs && ms && vs)
        out.signature = rs->pow(q) * *ms * vs->derivative();
    auto f = [&out](double r) { return std::exp(out.log_f(std::log(r))); };
    out.fit = fit_tail(f, kTruncation / 10.0, kTruncation);
    out.verdict = measure.is_zero() ? Verdict::Finite : classify_at_infinity(out.fit, out.signature);
    return out;
}

/// int_{lo}^inf exp(log_f) for a convergent tail; partial estimate on failure.
double tail_integral(const std::function<double(double)>& log_f, double lo, const MassTail& tail, double extra_power,
                     bool& partial)
{
    double decay = tail.signature ? -(tail.signature->power + extra_power + 1.0) : -(tail.fit.slope + extra_power + 1.0);
    decay = std::max(decay, kSlopeMargin);
    try {
        auto log_ft = [&log_f](double x) { return log_f(x) + x; };
        return integrate_to_infinity_log(log_ft, lo, decay, kInnerRelTol);
    } catch (const NumericalFailure& e) {
        partial = true;
        return e.partial_estimate;
    }
}

} // namespace

// ---------------------------------------------------------------------------

CriterionReport eval_cond_int1(const VolumeProfile& volume, const MeasureProfile& measure, double q, double r0,
                               const KernelOptions& options)
{
    require_q(q);
    measure.validate(volume);
    const GreenRadialKernel kernel(volume, options);
    auto f = [&](double r) {
        const double sb = sigma_ball(volume, measure, r);
        if (!(sb > 0.0))
            return 0.0;
        return std::exp((q - 1.0) * std::log(kernel.R(r)) + std::log(sb) - volume.log_volume(r) + std::log(r));
    };
    std::optional<PowerLaw> sig;
    const auto rs = kernel.tail_signature();
    const auto ss = sigma_ball_signature(volume, measure);
    const auto vs = volume.tail_signature();
    if (rs && ss && vs)
        sig = rs->pow(q - 1.0) * *ss / *vs * monomial(1.0);
    auto rep = integral_report(CriterionId::CondInt1, f, r0, sig, truncation_for(volume));
    rep.add("q", q);
    rep.add("profile", volume.describe());
    rep.add("measure", measure.describe());
    return rep;
}

CriterionReport eval_cond_int2(const VolumeProfile& volume, const MeasureProfile& measure, double q, double r0,
                               std::size_t center_samples, const KernelOptions& options)
{
    require_q(q);
    require(r0 > 0.0, "r0 must be positive");
    measure.validate(volume);
    const GreenRadialKernel kernel(volume, options);
    const double top = truncation_for(volume);
    require(top >= 100.0 * r0, "cond-int2 needs at least two decades above r0");
    const auto r = log_grid(r0, top);
    const std::size_t n = r.size();
    std::vector<double> rpow(n);
    for (std::size_t i = 0; i < n; ++i)
        rpow[i] = std::pow(kernel.R(r[i]), q - 1.0);

    // Pole-centered integral, accumulated along the grid.
    const double p0 = measure.small_r_exponent() + 1.0;
    auto centered = [&](double s) { return sigma_over_volume(volume, measure, s) * s; };
    std::vector<double> lower(n);
    double acc = p0 > -1.0 ? integrate_from_zero(centered, r[0], p0, kInnerRelTol) : kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && std::isfinite(acc))
            acc += integrate_log(centered, r[i - 1], r[i], kInnerRelTol);
        lower[i] = acc * rpow[i];
    }
    const bool lower_infinite = !std::isfinite(acc);

    CriterionReport rep;
    rep.criterion_id = CriterionId::CondInt2;
    std::vector<double> upper;
    const bool homogeneous = volume.homogeneous();
    if (homogeneous && !lower_infinite) {
        const double D = volume.homogeneity_constant();
        auto bound = [&](double rho_x, double s) {
            const double lo = std::max(0.0, rho_x - s);
            const double hi = rho_x + s;
            const double ann =
                std::max(0.0, sigma_ball(volume, measure, hi) - (lo > 0.0 ? sigma_ball(volume, measure, lo) : 0.0));
            const double by_mass = D * ann / volume.volume(s);
            return std::min(measure.max_density(lo, hi), by_mass) * s;
        };
        const auto thetas = center_fractions(center_samples);
        upper.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double best = 0.0;
            for (double theta : thetas) {
                const double rho_x = theta * r[i];
                auto g = [&](double s) { return bound(rho_x, s); };
                double j = 0.0;
                if (rho_x == 0.0) {
                    j = integrate_from_zero(g, r[i], p0, kInnerRelTol);
                } else {
                    j = integrate_from_zero(g, rho_x, 1.0, kInnerRelTol);
                    if (r[i] > rho_x)
                        j += integrate_log(g, rho_x, r[i], kInnerRelTol);
                }
                best = std::max(best, j);
            }
            upper[i] = std::max(best * rpow[i], lower[i]);
        }
    }
    const auto sc = classify_sup(r, lower, upper);
    apply_sup(rep, sc, !upper.empty());
    for (std::size_t i = 0; i < n; ++i)
        rep.samples.emplace_back(r[i], upper.empty() ? lower[i] : upper[i]);
    rep.add("q", q);
    rep.add("r0", r0);
    rep.add("homogeneous", homogeneous ? "yes" : "no");
    rep.add("center_samples", static_cast<double>(center_samples));
    if (!homogeneous)
        rep.add("note", "profile not flagged homogeneous; only the pole-centered lower bound is evaluated");
    if (lower_infinite)
        rep.add("note", "pole-centered integral diverges at s -> 0");
    rep.add("profile", volume.describe());
    rep.add("measure", measure.describe());
    return rep;
}

CriterionReport eval_cond_int1b(const VolumeProfile& volume, double q, double r0)
{
    require_q(q);
    const GreenRadialKernel kernel(volume);
    auto f = [&](double r) { return std::exp((2.0 * q - 1.0) * std::log(r) - (q - 1.0) * volume.log_volume(r)); };
    std::optional<PowerLaw> sig;
    if (const auto vs = volume.tail_signature())
        sig = monomial(2.0 * q - 1.0) / vs->pow(q - 1.0);
    auto rep = integral_report(CriterionId::CondInt1b, f, r0, sig, truncation_for(volume));
    rep.add("q", q);
    rep.add("profile", volume.describe());
    return rep;
}

CriterionReport eval_cond1(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric,
                           double q, double r0)
{
    require_q(q);
    require_explicit_metric(metric, "cond-1");
    measure.validate(volume);
    const GreenRadialKernel kernel(volume);
    const double g = metric.kernel_exponent();
    auto f = [&](double t) {
        const double sb = sigma_ball(volume, measure, metric.inverse(t));
        if (!(sb > 0.0))
            return 0.0;
        return std::exp(std::log(sb) - (g * q + 1.0) * std::log(t));
    };
    std::optional<PowerLaw> sig;
    if (const auto ss = sigma_ball_signature(volume, measure))
        sig = ss->compose_power(1.0 / metric_large_exponent(metric)) * monomial(-(g * q + 1.0));
    double top = kTruncation;
    if (volume.family() == VolumeFamily::Tabulated)
        top = std::min(top, metric.transform(volume.domain_max()));
    auto rep = integral_report(CriterionId::Cond1, f, r0, sig, top);
    rep.add("q", q);
    rep.add("gamma", g);
    rep.add("profile", volume.describe());
    rep.add("measure", measure.describe());
    return rep;
}

double cond2_small_s_integral(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric)
{
    require_explicit_metric(metric, "cond-2");
    measure.validate(volume);
    const double g = metric.kernel_exponent();
    const double p = (volume.small_r_exponent() + measure.small_r_exponent()) / metric_small_exponent(metric) - g - 1.0;
    if (!(p > -1.0))
        return kInf;
    auto h = [&](double s) { return sigma_ball(volume, measure, metric.inverse(s)) / std::pow(s, g + 1.0); };
    return integrate_from_zero(h, 1.0, p, kInnerRelTol);
}

CriterionReport eval_cond2(const VolumeProfile& volume, const MeasureProfile& measure, const QuasiMetric& metric,
                           double q, double r0, std::size_t center_samples)
{
    require_q(q);
    require(r0 > 0.0, "r0 must be positive");
    require_explicit_metric(metric, "cond-2");
    measure.validate(volume);
    const GreenRadialKernel kernel(volume);
    const double g = metric.kernel_exponent();
    double top = kTruncation;
    if (volume.family() == VolumeFamily::Tabulated)
        top = std::min(top, metric.transform(volume.domain_max()) / 2.0);
    require(top >= 100.0 * r0, "cond-2 needs at least two decades above r0");
    const auto r = log_grid(r0, top);
    const std::size_t n = r.size();
    std::vector<double> norm(n);
    for (std::size_t i = 0; i < n; ++i)
        norm[i] = std::pow(r[i], g * (q - 1.0));

    const double e2 = metric_small_exponent(metric);
    const double p = (volume.small_r_exponent() + measure.small_r_exponent()) / e2 - g - 1.0;
    auto centered = [&](double s) { return sigma_ball(volume, measure, metric.inverse(s)) / std::pow(s, g + 1.0); };
    std::vector<double> lower(n);
    double acc = p > -1.0 ? integrate_from_zero(centered, r[0], p, kInnerRelTol) : kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && std::isfinite(acc))
            acc += integrate_log(centered, r[i - 1], r[i], kInnerRelTol);
        lower[i] = acc / norm[i];
    }
    const bool lower_infinite = !std::isfinite(acc);

    CriterionReport rep;
    rep.criterion_id = CriterionId::Cond2;
    std::vector<double> upper;
    const bool homogeneous = volume.homogeneous();
    if (homogeneous && !lower_infinite) {
        const double D = volume.homogeneity_constant();
        auto bound = [&](double rho_x, double s) {
            const double rho = metric.inverse(s);
            const double lo = std::max(0.0, rho_x - rho);
            const double hi = rho_x + rho;
            const double ann =
                std::max(0.0, sigma_ball(volume, measure, hi) - (lo > 0.0 ? sigma_ball(volume, measure, lo) : 0.0));
            const double by_density = measure.max_density(lo, hi) * D * volume.volume(rho);
            return std::min(ann, by_density) / std::pow(s, g + 1.0);
        };
        const double p_off = std::max(volume.small_r_exponent(), 1.0) / e2 - g - 1.0;
        const auto thetas = center_fractions(center_samples);
        upper.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double rho_r = metric.inverse(r[i]);
            double best = 0.0;
            for (double theta : thetas) {
                const double rho_x = theta * rho_r;
                auto h = [&](double s) { return bound(rho_x, s); };
                double j = 0.0;
                if (rho_x == 0.0) {
                    j = integrate_from_zero(h, r[i], p, kInnerRelTol);
                } else {
                    const double s_x = std::min(metric.transform(rho_x), r[i]);
                    j = integrate_from_zero(h, s_x, p_off, kInnerRelTol);
                    if (r[i] > s_x)
                        j += integrate_log(h, s_x, r[i], kInnerRelTol);
                }
                best = std::max(best, j);
            }
            upper[i] = std::max(best / norm[i], lower[i]);
        }
    }
    const auto sc = classify_sup(r, lower, upper);
    apply_sup(rep, sc, !upper.empty());
    for (std::size_t i = 0; i < n; ++i)
        rep.samples.emplace_back(r[i], upper.empty() ? lower[i] : upper[i]);
    rep.add("q", q);
    rep.add("gamma", g);
    rep.add("r0", r0);
    rep.add("homogeneous", homogeneous ? "yes" : "no");
    rep.add("center_samples", static_cast<double>(center_samples));
    rep.add("small_s_integral", cond2_small_s_integral(volume, measure, metric));
    if (lower_infinite)
        rep.add("note", "pole-centered integral diverges at s -> 0");
    rep.add("profile", volume.describe());
    rep.add("measure", measure.describe());
    return rep;
}

// ---------------------------------------------------------------------------

double default_a(const GreenRadialKernel& kernel, double r0)
{
    require(r0 > 0.0, "r0 must be positive");
    return 1.0 / kernel.R(r0);
}

CriterionReport eval_last1(const DiscreteKernel& dk, double q, double a)
{
    require_q(q);
    require(a > 0.0, "a must be positive");
    const auto& R = dk.diagonal();
    require(R.back() < 1.0 / a, "grid too short: R(r_max) >= 1/a");
    double sum = 0.0;
    for (std::size_t i = 0; i < dk.size(); ++i)
        sum += std::pow(std::min(R[i], 1.0 / a), q) * dk.weight_sigma()[i];

    const auto tail = mass_tail(dk.kernel(), dk.measure(), q);
    CriterionReport rep;
    rep.criterion_id = CriterionId::Last1;
    rep.verdict = tail.verdict;
    rep.tail_slope = tail.fit.slope;
    rep.bracket = Bracket::Exact;
    bool partial = false;
    double tail_value = 0.0;
    if (dk.measure().is_zero()) {
        tail_value = 0.0;
    } else if (tail.verdict == Verdict::Divergent) {
        tail_value = kInf;
    } else {
        tail_value = tail_integral(tail.log_f, dk.r_max(), tail, 0.0, partial);
    }
    rep.truncated_value = std::isfinite(tail_value) ? sum + tail_value : sum;
    rep.constant_estimate = sum + tail_value;
    rep.add("q", q);
    rep.add("a", a);
    rep.add("grid_sum", sum);
    rep.add("tail", tail_value);
    rep.add("tail_log_slope", tail.fit.log_slope);
    rep.add("tail_local_slope", tail.fit.local_slope);
    if (partial)
        rep.add("quadrature", "partial");
    auto f = [&tail](double r) { return std::exp(tail.log_f(std::log(r))); };
    rep.samples = sample(f, dk.r_min(), kTruncation);
    return rep;
}

std::vector<double> last2_default_grid(const DiscreteKernel& dk, double a)
{
    require(a > 0.0, "a must be positive");
    const double top = 1.0 / dk.diagonal().back();
    require(top > a, "grid too short: R(r_max) >= 1/a");
    auto grid = log_grid(a, top);
    grid.erase(grid.begin());
    return grid;
}

CriterionReport eval_last2(const DiscreteKernel& dk, double q, double a, const std::vector<double>& r_grid)
{
    require_q(q);
    require(a > 0.0, "a must be positive");
    const auto rs = r_grid.empty() ? last2_default_grid(dk, a) : r_grid;
    for (double r : rs)
        require(r > a, "last-2 needs r > a (got r = " + format_number(r) + ")");
    const auto& R = dk.diagonal();
    const std::size_t n = dk.size();
    std::vector<double> ratio(rs.size());
    std::size_t far_maximizers = 0;
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const double level = 1.0 / rs[k];
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const bool inside = R[j] >= level;
            v(static_cast<Eigen::Index>(j)) = inside ? dk.weight_sigma()[j] : 0.0;
            if (inside)
                radius = dk.radii()[j];
        }
        const Eigen::VectorXd pot = dk.apply_shell(v);
        Eigen::Index arg = 0;
        const double sup = pot.maxCoeff(&arg);
        if (dk.radii()[static_cast<std::size_t>(arg)] > 2.0 * radius)
            ++far_maximizers;
        ratio[k] = sup / std::pow(rs[k], q - 1.0);
    }
    CriterionReport rep;
    rep.criterion_id = CriterionId::Last2;
    const auto sc = classify_sup(rs, ratio, ratio);
    apply_sup(rep, sc, true);
    rep.bracket = Bracket::Exact;
    for (std::size_t k = 0; k < rs.size(); ++k)
        rep.samples.emplace_back(rs[k], ratio[k]);
    rep.add("q", q);
    rep.add("a", a);
    rep.add("maximizers_beyond_twice_level_radius", static_cast<double>(far_maximizers));
    return rep;
}

CriterionReport eval_cond_m(const DiscreteKernel& dk, double q, double a)
{
    require_q(q);
    require(a > 0.0, "a must be positive");
    const auto& R = dk.diagonal();
    require(R.back() < 1.0 / a, "grid too short: R(r_max) >= 1/a");
    const std::size_t n = dk.size();
    Eigen::VectorXd m(static_cast<Eigen::Index>(n));
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        m(k) = std::min(R[i], 1.0 / a);
        x(k) = std::pow(m(k), q) * dk.weight_sigma()[i];
    }
    const Eigen::VectorXd t = dk.apply_shell(x);
    double grid_constant = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i)
        grid_constant = std::max(grid_constant, t(i) / m(i));

    CriterionReport rep;
    rep.criterion_id = CriterionId::CondM;
    rep.bracket = Bracket::Exact;
    rep.truncated_value = grid_constant;
    const auto tail = mass_tail(dk.kernel(), dk.measure(), q);
    rep.tail_slope = tail.fit.slope;
    rep.add("q", q);
    rep.add("a", a);
    rep.add("grid_constant", grid_constant);
    if (tail.verdict == Verdict::Divergent) {
        rep.verdict = Verdict::Unbounded;
        rep.constant_estimate = kInf;
        rep.add("tail_mass", kInf);
        return rep;
    }
    bool partial = false;
    double tail_mass = 0.0;
    double tail_potential = 0.0;
    if (!dk.measure().is_zero()) {
        tail_mass = tail_integral(tail.log_f, dk.r_max(), tail, 0.0, partial);
        const GreenRadialKernel& kernel = dk.kernel();
        std::function<double(double)> log_f1 = [&](double log_r) {
            return tail.log_f(log_r) + std::log(kernel.R(std::exp(log_r)));
        };
        const double extra = kernel.tail_signature() ? kernel.tail_signature()->power : -kernel.decay_exponent();
        tail_potential = tail_integral(log_f1, dk.r_max(), tail, extra, partial);
    }
    double c = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i)
        c = std::max(c, (t(i) + tail_potential) / m(i));
    // Centers beyond r_max see at most the whole mass plus the tail once more.
    c = std::max(c, x.sum() + 2.0 * tail_mass);
    rep.constant_estimate = c;
    rep.verdict = tail.verdict == Verdict::Finite ? Verdict::Bounded : Verdict::Inconclusive;
    rep.add("tail_mass", tail_mass);
    rep.add("tail_potential", tail_potential);
    if (partial)
        rep.add("quadrature", "partial");
    return rep;
}

CriterionReport conjecture2_integral(const VolumeProfile& volume, double alpha, double r0)
{
    require(alpha > 2.0, "conjecture-2 needs alpha > 2");
    const GreenRadialKernel kernel(volume);
    const double e = alpha / (alpha - 2.0);
    auto f = [&](double r) { return std::exp(e * std::log(kernel.R(r)) + extended_log_surface_density(volume, r)); };
    std::optional<PowerLaw> sig;
    const auto rs = kernel.tail_signature();
    const auto vs = volume.tail_signature();
    if (rs && vs)
        sig = rs->pow(e) * vs->derivative();
    auto rep = integral_report(CriterionId::Conjecture2, f, r0, sig, truncation_for(volume));
    rep.add("alpha", alpha);
    rep.add("status", "EXPLORATORY");
    rep.add("profile", volume.describe());
    return rep;
}

// ---------------------------------------------------------------------------

CriterionReport evaluate_criterion(CriterionId id, const CriterionParams& p, double q)
{
    auto metric = [&]() -> const QuasiMetric& {
        if (!p.metric)
            throw ConfigError("criterion " + to_string(id) + " needs a metric");
        return *p.metric;
    };
    switch (id) {
    case CriterionId::CondInt1: return eval_cond_int1(p.volume, p.measure, q, p.r0, p.kernel);
    case CriterionId::CondInt2: return eval_cond_int2(p.volume, p.measure, q, p.r0, p.center_samples, p.kernel);
    case CriterionId::CondInt1b: return eval_cond_int1b(p.volume, q, p.r0);
    case CriterionId::Cond1: return eval_cond1(p.volume, p.measure, metric(), q, p.r0);
    case CriterionId::Cond2: return eval_cond2(p.volume, p.measure, metric(), q, p.r0, p.center_samples);
    case CriterionId::Last1:
    case CriterionId::Last2:
    case CriterionId::CondM: {
        const GreenRadialKernel kernel(p.volume, p.kernel);
        const auto dk = discretize(kernel, p.measure, p.grid);
        const double a = p.a > 0.0 ? p.a : default_a(kernel, p.r0);
        if (id == CriterionId::Last1)
            return eval_last1(dk, q, a);
        if (id == CriterionId::Last2)
            return eval_last2(dk, q, a);
        return eval_cond_m(dk, q, a);
    }
    case CriterionId::Cond0: return check_nonparabolic(p.volume, p.r0);
    case CriterionId::Conjecture2:
        return conjecture2_integral(p.volume, p.alpha > 0.0 ? p.alpha : p.volume.tail_exponent(), p.r0);
    }
    throw PreconditionError("unknown criterion");
}

Verdict joint_verdict(Verdict a, Verdict b)
{
    if (is_negative(a) || is_negative(b))
        return Verdict::Divergent;
    if (is_positive(a) && is_positive(b))
        return Verdict::Finite;
    return Verdict::Inconclusive;
}

JointReport evaluate_joint(const std::string& name, const CriterionParams& params, double q)
{
    JointReport out;
    out.name = name;
    if (name == "main") {
        out.first = evaluate_criterion(CriterionId::CondInt1, params, q);
        out.second = evaluate_criterion(CriterionId::CondInt2, params, q);
    } else if (name == "thm3") {
        out.first = evaluate_criterion(CriterionId::Cond1, params, q);
        out.second = evaluate_criterion(CriterionId::Cond2, params, q);
    } else {
        throw ConfigError("unknown joint criterion '" + name + "'");
    }
    out.verdict = joint_verdict(out.first.verdict, out.second.verdict);
    return out;
}

Verdict scan_verdict(const std::string& target, const CriterionParams& params, double q)
{
    if (target == "main" || target == "thm3")
        return evaluate_joint(target, params, q).verdict;
    return evaluate_criterion(parse_criterion_id(target), params, q).verdict;
}

namespace {

int verdict_sign(Verdict v)
{
    if (is_positive(v))
        return 1;
    if (is_negative(v))
        return -1;
    return 0;
}

} // namespace

ExponentScan critical_exponent(const std::function<Verdict(double)>& verdict_of, double q_lo, double q_hi, double tol,
                               std::size_t grid_points)
{
    require(q_hi > q_lo, "scan needs q_lo < q_hi");
    require(tol > 0.0, "scan tolerance must be positive");
    require(grid_points >= 2, "scan needs at least 2 grid points");
    ExponentScan out;
    out.q_lo = q_lo;
    out.q_hi = q_hi;

    std::vector<double> qs(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
        qs[i] = q_lo + (q_hi - q_lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    std::vector<Verdict> vs(grid_points, Verdict::Inconclusive);
    std::vector<std::exception_ptr> errors(grid_points);
    const std::size_t workers = std::min<std::size_t>(thread_count(), grid_points);
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < grid_points; i += workers) {
            try {
                vs[i] = verdict_of(qs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    for (std::size_t i = 0; i < grid_points; ++i)
        out.verdict_map.emplace_back(qs[i], vs[i]);

    const int s_lo = verdict_sign(vs.front());
    const int s_hi = verdict_sign(vs.back());
    if (s_lo == 0 || s_hi == 0 || s_lo == s_hi)
        throw BracketError("scan bracket [" + format_number(q_lo) + ", " + format_number(q_hi) +
                           "] has verdicts " + to_string(vs.front()) + " and " + to_string(vs.back()));

    std::size_t j = 0;
    while (verdict_sign(vs[j]) != s_hi)
        ++j;
    std::size_t i = j - 1;
    while (verdict_sign(vs[i]) != s_lo)
        --i;
    double lo = qs[i];
    double hi = qs[j];
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const Verdict v = verdict_of(mid);
        out.verdict_map.emplace_back(mid, v);
        const int s = verdict_sign(v);
        if (s == 0)
            ++out.inconclusive;
        if (s == s_lo || (s == 0 && s_lo > 0))
            lo = mid;
        else
            hi = mid;
    }
    out.q_critical = 0.5 * (lo + hi);
    std::sort(out.verdict_map.begin(), out.verdict_map.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    out.inconclusive += static_cast<std::size_t>(
        std::count(vs.begin(), vs.end(), Verdict::Inconclusive));
    return out;
}

// ---------------------------------------------------------------------------

double StepFunction::operator()(double t) const
{
    if (t <= breaks.back()) {
        const auto it = std::lower_bound(breaks.begin() + 1, breaks.end(), t);
        return values[static_cast<std::size_t>(it - breaks.begin()) - 1];
    }
    return tail_coefficient > 0.0 ? tail_coefficient * std::pow(t, -tail_power) : 0.0;
}

void StepFunction::validate() const
{
    require(!values.empty() && breaks.size() == values.size() + 1, "step function: need breaks = values + 1");
    require(breaks.front() == 0.0, "step function: first break must be 0");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        require(breaks[i] > breaks[i - 1], "step function: breaks must increase");
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i] >= 0.0, "step function: values must be non-negative");
        if (i > 0)
            require(values[i] <= values[i - 1], "step function must be non-increasing");
    }
    require(tail_coefficient >= 0.0, "step function: tail coefficient must be non-negative");
    if (tail_coefficient > 0.0) {
        require(tail_power > 2.0, "step function: tail power must exceed 2");
        require(tail_coefficient * std::pow(breaks.back(), -tail_power) <= values.back() * (1.0 + 1e-12),
                "step function must be non-increasing at the tail");
    }
}

StepFunction random_step_function(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> steps(1, 10);
    std::uniform_real_distribution<double> log_break(std::log(1e-2), std::log(1e2));
    std::uniform_real_distribution<double> log_value(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StepFunction phi;
    const int k = steps(rng);
    std::vector<double> b;
    while (static_cast<int>(b.size()) < k) {
        const double x = std::exp(log_break(rng));
        if (std::find(b.begin(), b.end(), x) == b.end())
            b.push_back(x);
    }
    std::sort(b.begin(), b.end());
    phi.breaks.push_back(0.0);
    phi.breaks.insert(phi.breaks.end(), b.begin(), b.end());
    for (int i = 0; i < k; ++i)
        phi.values.push_back(std::exp(log_value(rng)));
    std::sort(phi.values.begin(), phi.values.end(), std::greater<>());
    if (unit(rng) < 1.0 / 3.0) {
        phi.tail_power = 2.2 + 3.8 * unit(rng);
        phi.tail_coefficient = phi.values.back() * std::pow(phi.breaks.back(), phi.tail_power) * (0.05 + 0.95 * unit(rng));
    }
    return phi;
}

double hardy_constant(double s)
{
    require(s > 0.0 && s < 1.0, "hardy: s must lie in (0, 1)");
    return s * std::pow(2.0, 1.0 - s) * std::max(std::pow(4.0 / 3.0, 1.0 - s), std::pow(3.0, s) / (2.0 * s));
}

HardyResult hardy_check(const StepFunction& phi, double s, double r)
{
    require(r > 0.0, "hardy: r must be positive");
    phi.validate();
    HardyResult out;
    out.constant = hardy_constant(s);
    constexpr double tol = 1e-12;
    double mass = 0.0;
    double weighted = 0.0;
    for (std::size_t k = 0; k < phi.values.size(); ++k) {
        const double lo = std::max(r, phi.breaks[k]);
        const double hi = phi.breaks[k + 1];
        const double v = phi.values[k];
        if (hi <= lo || v == 0.0)
            continue;
        mass += 0.5 * v * (hi - lo) * (hi + lo);
        weighted += std::pow(v, s) * (std::pow(hi, 2.0 * s) - std::pow(lo, 2.0 * s)) / (2.0 * s);
    }
    if (phi.tail_coefficient > 0.0) {
        const double lo = std::max(r, phi.breaks.back());
        const double c = phi.tail_coefficient;
        const double p = phi.tail_power;
        const double log_c = std::log(c);
        mass += integrate_to_infinity_log([=](double x) { return log_c + (2.0 - p) * x; }, lo, p - 2.0, tol);
        weighted += integrate_to_infinity_log([=](double x) { return s * log_c + s * (2.0 - p) * x; }, lo,
                                              s * (p - 2.0), tol);
    }
    out.lhs = std::pow(mass, s);
    out.rhs = out.constant * (weighted + std::pow(r, 2.0 * s) * std::pow(phi(r), s));
    return out;
}

} // namespace greencrit
