#include "greencrit/green.hpp"

#include "greencrit/error.hpp"
#include "greencrit/quadrature.hpp"
#include "greencrit/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace greencrit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailInstabilityLimit = 0.05;

bool has_closed_form(const VolumeProfile& p)
{
    return p.family() == VolumeFamily::Power || p.family() == VolumeFamily::Euclidean ||
           p.family() == VolumeFamily::TwoRegime;
}

} // namespace

GreenRadialKernel::GreenRadialKernel(VolumeProfile profile, KernelOptions options)
    : profile_(std::move(profile)), options_(options)
{
    if (!(options_.quad_rel_tol > 0.0))
        throw PreconditionError("kernel: quad_rel_tol must be positive");
    if (profile_.family() == VolumeFamily::Tabulated) {
        if (!(profile_.tail_exponent() > 2.0))
            throw DivergenceError("kernel: fitted tail exponent " + format_number(profile_.tail_exponent()) +
                                  " <= 2, int^inf t/V(t) dt diverges (parabolic profile)");
        if (profile_.tail_fit_instability() > kTailInstabilityLimit)
            throw NumericalFailure("kernel: tabulated tail slope unstable between the last two decades (drift " +
                                       format_number(profile_.tail_fit_instability()) + ")",
                                   profile_.tail_exponent());
        r_sup_ = R(profile_.domain_min());
        return;
    }
    const PowerLaw integrand = monomial(1.0) / *profile_.tail_signature();
    if (!converges_at_infinity(integrand))
        throw DivergenceError("kernel: int^inf t/V(t) dt diverges for " + profile_.describe() +
                              " (parabolic profile)");
    const double beta = profile_.small_r_exponent();
    if (beta > 2.0) {
        r_sup_ = kInf;
    } else if (profile_.family() == VolumeFamily::TwoRegime && beta < 2.0) {
        r_sup_ = 1.0 / (2.0 - beta) + 1.0 / decay_exponent();
    } else {
        r_sup_ = kInf;
    }
}

TailMode GreenRadialKernel::tail_mode() const
{
    return profile_.family() == VolumeFamily::Tabulated ? TailMode::NumericTailFit : TailMode::AnalyticTail;
}

std::optional<PowerLaw> GreenRadialKernel::tail_signature() const
{
    const auto vs = profile_.tail_signature();
    if (!vs)
        return std::nullopt;
    // int_rho^inf t / V(t) dt keeps the log factors of t / V and gains one power.
    PowerLaw out = monomial(1.0) / *vs;
    out.power += 1.0;
    return out;
}

double GreenRadialKernel::closed_form(double rho) const
{
    const double a = profile_.tail_exponent();
    switch (profile_.family()) {
    case VolumeFamily::Power:
    case VolumeFamily::Euclidean:
        return std::pow(rho, 2.0 - a) / (profile_.coefficient() * (a - 2.0));
    case VolumeFamily::TwoRegime: {
        if (rho >= 1.0)
            return std::pow(rho, 2.0 - a) / (a - 2.0);
        const double n = profile_.dimension();
        const double inner = n == 2.0 ? -std::log(rho) : (std::pow(rho, 2.0 - n) - 1.0) / (n - 2.0);
        return inner + 1.0 / (a - 2.0);
    }
    default: break;
    }
    throw PreconditionError("kernel: no closed form");
}

double GreenRadialKernel::by_quadrature(double rho) const
{
    const double tol = options_.quad_rel_tol;
    auto log_ft = [this](double log_t) { return 2.0 * log_t - profile_.log_volume(std::exp(log_t)); };
    auto g = [&](double x) { return std::exp(log_ft(x)); };

    if (profile_.family() == VolumeFamily::Tabulated) {
        const double top = profile_.domain_max();
        const double a = profile_.tail_exponent();
        const double log_vtop = profile_.log_volume(top);
        if (rho >= top) {
            // Fitted power-law continuation V(t) = V(top) (t/top)^a.
            const double log_v = log_vtop + a * std::log(rho / top);
            return std::exp(2.0 * std::log(rho) - log_v) / (a - 2.0);
        }
        const double tail = std::exp(2.0 * std::log(top) - log_vtop) / (a - 2.0);
        return integrate(g, std::log(rho), std::log(top), tol) + tail;
    }

    const double split = std::max(10.0 * rho, 1e3 * profile_.regular_radius());
    const double head = integrate(g, std::log(rho), std::log(split), tol);
    const double tail = integrate_to_infinity_log(log_ft, split, decay_exponent(), tol);
    return head + tail;
}

double GreenRadialKernel::R(double rho) const
{
    if (!(rho > 0.0))
        throw PreconditionError("R: radius must be positive");
    if (profile_.family() == VolumeFamily::Tabulated && rho < profile_.domain_min() * (1.0 - 1e-12))
        throw OutOfRangeError("R: radius below the tabulated range");
    if (has_closed_form(profile_) && !options_.force_quadrature)
        return closed_form(rho);
    return by_quadrature(rho);
}

double GreenRadialKernel::R_inverse(double v) const
{
    if (!(v > 0.0) || !(v < r_sup_) || !std::isfinite(v))
        throw OutOfRangeError("R_inverse: value " + format_number(v) + " outside the range (0, " +
                              format_number(r_sup_) + ") of R");
    double lo = 1.0;
    double hi = 1.0;
    if (profile_.family() == VolumeFamily::Tabulated)
        lo = hi = profile_.domain_min();
    int guard = 0;
    while (R(hi) > v) {
        hi *= 2.0;
        if (++guard > 4000)
            throw OutOfRangeError("R_inverse: could not bracket value " + format_number(v));
    }
    while (R(lo) < v) {
        lo /= 2.0;
        if (++guard > 4000)
            throw OutOfRangeError("R_inverse: could not bracket value " + format_number(v));
    }
    if (profile_.family() == VolumeFamily::Tabulated)
        lo = std::max(lo, profile_.domain_min());
    // R(lo) >= v >= R(hi).
    while (hi / lo - 1.0 > 1e-14) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi)
            break;
        if (R(mid) >= v)
            lo = mid;
        else
            hi = mid;
    }
    const double rl = R(lo);
    const double rh = R(hi);
    return std::abs(rl - v) <= std::abs(rh - v) ? lo : hi;
}

double check_R_doubling(const GreenRadialKernel& kernel, double rho_min, double rho_max, std::size_t samples)
{
    if (!(rho_min > 0.0) || !(rho_max > rho_min) || samples < 2)
        throw PreconditionError("check_R_doubling: need 0 < rho_min < rho_max and samples >= 2");
    double out = 0.0;
    const double step = std::log(rho_max / rho_min) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double rho = rho_min * std::exp(step * static_cast<double>(i));
        out = std::max(out, kernel.R(rho) / kernel.R(2.0 * rho));
    }
    return out;
}

// ---------------------------------------------------------------------------

double QuasiMetric::transform(double d) const
{
    if (d < 0.0)
        throw PreconditionError("quasi-metric: negative distance");
    if (d == 0.0)
        return 0.0;
    switch (kind) {
    case MetricKind::InverseR: return 1.0 / kernel->R(d);
    case MetricKind::Snowflake: return d > 1.0 ? std::pow(d, delta1) : std::pow(d, delta2);
    case MetricKind::PowerOfDistance: return d;
    }
    return d;
}

double QuasiMetric::inverse(double t) const
{
    if (t < 0.0)
        throw PreconditionError("quasi-metric: negative value");
    if (t == 0.0)
        return 0.0;
    switch (kind) {
    case MetricKind::InverseR: return kernel->R_inverse(1.0 / t);
    case MetricKind::Snowflake: return t > 1.0 ? std::pow(t, 1.0 / delta1) : std::pow(t, 1.0 / delta2);
    case MetricKind::PowerOfDistance: return t;
    }
    return t;
}

double QuasiMetric::kernel_exponent() const
{
    switch (kind) {
    case MetricKind::InverseR: return 1.0;
    case MetricKind::Snowflake: return gamma_tilde;
    case MetricKind::PowerOfDistance: return gamma;
    }
    return 1.0;
}

std::string QuasiMetric::report() const
{
    std::string out;
    switch (kind) {
    case MetricKind::InverseR:
        out += "kind = InverseR\n";
        out += "profile = " + kernel->profile().describe() + "\n";
        out += "kappa_bound = " + format_number(kappa_bound) + "\n";
        out += "note = kappa sampled on collinear radial triples (extremality assumed, not proved)\n";
        break;
    case MetricKind::Snowflake:
        out += "kind = Snowflake\n";
        out += "gamma = " + format_number(gamma) + "\n";
        out += "n = " + format_number(dimension) + "\n";
        out += "gamma_tilde = " + format_number(gamma_tilde) + "\n";
        out += "delta1 = " + format_number(delta1) + "\n";
        out += "delta2 = " + format_number(delta2) + "\n";
        out += "violations = " + std::to_string(violations) + "\n";
        break;
    case MetricKind::PowerOfDistance:
        out += "kind = PowerOfDistance\n";
        out += "gamma = " + format_number(gamma) + "\n";
        break;
    }
    out += "kappa = " + format_number(kappa) + "\n";
    out += "samples = " + std::to_string(samples) + "\n";
    return out;
}

double estimate_3g_constant(const std::function<double(double)>& green, std::size_t samples_per_axis, double d_min,
                            double d_max)
{
    if (samples_per_axis < 2 || !(d_min > 0.0) || !(d_max > d_min))
        throw PreconditionError("estimate_3g_constant: need samples >= 2 and 0 < d_min < d_max");
    std::vector<double> d(samples_per_axis);
    std::vector<double> inv(samples_per_axis);
    const double step = std::log(d_max / d_min) / static_cast<double>(samples_per_axis - 1);
    for (std::size_t i = 0; i < samples_per_axis; ++i) {
        d[i] = d_min * std::exp(step * static_cast<double>(i));
        inv[i] = 1.0 / green(d[i]);
    }
    double kappa = 0.0;
    for (std::size_t i = 0; i < samples_per_axis; ++i) {
        for (std::size_t j = i; j < samples_per_axis; ++j) {
            const double denom = inv[i] + inv[j];
            kappa = std::max(kappa, (1.0 / green(d[i] + d[j])) / denom);
            const double gap = d[j] - d[i];
            if (gap > 0.0)
                kappa = std::max(kappa, (1.0 / green(gap)) / denom);
        }
    }
    return kappa;
}

QuasiMetric build_quasi_metric_inverse_r(const GreenRadialKernel& kernel, std::size_t samples_per_axis, double d_min,
                                         double d_max)
{
    QuasiMetric m;
    m.kind = MetricKind::InverseR;
    m.kernel = kernel;
    m.kappa = estimate_3g_constant([&](double d) { return kernel.R(d); }, samples_per_axis, d_min, d_max);
    m.samples = samples_per_axis * samples_per_axis;
    double bound = 0.0;
    const double step = std::log(d_max / d_min) / static_cast<double>(samples_per_axis - 1);
    for (std::size_t i = 0; i < samples_per_axis; ++i) {
        const double rho = d_min * std::exp(step * static_cast<double>(i));
        bound = std::max(bound, kernel.R(rho / 2.0) / kernel.R(rho));
    }
    m.kappa_bound = bound;
    return m;
}

QuasiMetric build_snowflake_metric(double gamma, double n, double gamma_tilde, std::size_t samples, std::uint64_t seed)
{
    if (!(gamma > 0.0) || !(n > 2.0))
        throw PreconditionError("snowflake metric needs gamma > 0 and n > 2");
    if (gamma_tilde < std::max(gamma, n - 2.0))
        throw PreconditionError("snowflake metric needs gamma_tilde >= max(gamma, n - 2) = " +
                                format_number(std::max(gamma, n - 2.0)));
    QuasiMetric m;
    m.kind = MetricKind::Snowflake;
    m.gamma = gamma;
    m.dimension = n;
    m.gamma_tilde = gamma_tilde;
    m.delta1 = gamma / gamma_tilde;
    m.delta2 = (n - 2.0) / gamma_tilde;
    m.samples = samples;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_d(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double a = std::exp(log_d(rng));
        const double b = std::exp(log_d(rng));
        const double c = std::abs(a - b) + unit(rng) * (a + b - std::abs(a - b));
        const double ta = m.transform(a);
        const double tb = m.transform(b);
        const double tc = m.transform(c);
        for (const auto& [lhs, rhs] : {std::pair{tc, ta + tb}, std::pair{ta, tb + tc}, std::pair{tb, ta + tc}}) {
            worst = std::max(worst, lhs / rhs);
            if (lhs > rhs * (1.0 + 1e-12))
                ++m.violations;
        }
    }
    m.kappa = m.violations == 0 ? 1.0 : worst;
    m.kappa_bound = m.kappa;
    return m;
}

QuasiMetric build_power_metric(double gamma)
{
    if (!(gamma > 0.0))
        throw PreconditionError("power-of-distance metric needs gamma > 0");
    QuasiMetric m;
    m.kind = MetricKind::PowerOfDistance;
    m.gamma = gamma;
    m.kappa = 1.0;
    m.kappa_bound = 1.0;
    return m;
}

QuasiMetric parse_metric_spec(const std::string& spec, const GreenRadialKernel* kernel)
{
    const auto [name, args] = split_spec(spec);
    if (name == "inverse_r" || name == "inverser") {
        if (!kernel)
            throw ConfigError("metric inverse_r needs a non-parabolic profile");
        return build_quasi_metric_inverse_r(*kernel);
    }
    const auto v = parse_number_list(args);
    if (name == "snowflake") {
        if (v.size() != 3)
            throw ConfigError("metric '" + spec + "': expected gamma,n,gamma_tilde");
        return build_snowflake_metric(v[0], v[1], v[2]);
    }
    if (name == "power") {
        if (v.size() != 1)
            throw ConfigError("metric '" + spec + "': expected gamma");
        return build_power_metric(v[0]);
    }
    throw ConfigError("unknown metric kind '" + name + "'");
}

std::function<double(double)> two_regime_kernel(double gamma, double n)
{
    return [gamma, n](double d) { return d >= 1.0 ? std::pow(d, -gamma) : std::pow(d, -(n - 2.0)); };
}

std::pair<double, double> check_g_equiv_snowflake(const std::function<double(double)>& green, const QuasiMetric& metric,
                                                  double gamma_tilde, std::size_t samples, double d_min, double d_max)
{
    if (samples < 2)
        throw PreconditionError("check_g_equiv_snowflake: need at least 2 samples");
    double lo = kInf;
    double hi = 0.0;
    const double step = std::log(d_max / d_min) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double d = d_min * std::exp(step * static_cast<double>(i));
        const double ratio = green(d) * std::pow(metric.transform(d), gamma_tilde);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------

DiscreteKernel::DiscreteKernel(GreenRadialKernel kernel, MeasureProfile measure, std::vector<double> radii,
                               std::vector<double> weight_mu, std::vector<double> weight_sigma)
    : kernel_(std::move(kernel)), measure_(std::move(measure)), radii_(std::move(radii)),
      weight_mu_(std::move(weight_mu)), weight_sigma_(std::move(weight_sigma))
{
    const std::size_t n = radii_.size();
    if (weight_mu_.size() != n || weight_sigma_.size() != n)
        throw PreconditionError("discrete kernel: weight vectors must match the radii");
    r_values_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r_values_[i] = kernel_.R(radii_[i]);
    matrix_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r_values_[std::max(i, j)];
}

Eigen::VectorXd DiscreteKernel::apply(const Eigen::VectorXd& v) const
{
    return matrix_ * v;
}

Eigen::VectorXd DiscreteKernel::apply_shell(const Eigen::VectorXd& v) const
{
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::VectorXd out(n);
    // (Gv)_i = R_i sum_{j <= i} v_j + sum_{j > i} R_j v_j.
    std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
    for (Eigen::Index j = n - 1; j >= 0; --j)
        suffix[static_cast<std::size_t>(j)] = suffix[static_cast<std::size_t>(j) + 1] + r_values_[static_cast<std::size_t>(j)] * v(j);
    double prefix = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        prefix += v(i);
        out(i) = r_values_[static_cast<std::size_t>(i)] * prefix + suffix[static_cast<std::size_t>(i) + 1];
    }
    return out;
}

DiscreteKernel DiscreteKernel::with_entry(std::size_t i, std::size_t j, double value) const
{
    DiscreteKernel out = *this;
    out.matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    return out;
}

DiscreteKernel DiscreteKernel::with_sigma_weights(std::vector<double> weight_sigma) const
{
    if (weight_sigma.size() != size())
        throw PreconditionError("discrete kernel: weight vector size mismatch");
    DiscreteKernel out = *this;
    out.weight_sigma_ = std::move(weight_sigma);
    return out;
}

bool DiscreteKernel::is_symmetric() const
{
    const auto n = matrix_.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (matrix_(i, j) != matrix_(j, i))
                return false;
    return true;
}

bool DiscreteKernel::rows_monotone() const
{
    const auto n = matrix_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (!(matrix_(i, j) > 0.0))
                return false;
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (matrix_(i, j) > matrix_(i, j - 1))
                return false;
    }
    return true;
}

void DiscreteKernel::write_csv(const std::string& weights_path, const std::string& matrix_path) const
{
    std::ofstream w(weights_path, std::ios::binary);
    if (!w)
        throw Error("cannot write '" + weights_path + "'");
    w << "rho,weight_mu,weight_sigma\n";
    for (std::size_t i = 0; i < size(); ++i)
        w << format_number(radii_[i]) << ',' << format_number(weight_mu_[i]) << ','
          << format_number(weight_sigma_[i]) << '\n';
    std::ofstream m(matrix_path, std::ios::binary);
    if (!m)
        throw Error("cannot write '" + matrix_path + "'");
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
            if (j > 0)
                m << ',';
            m << format_number(matrix_(i, j));
        }
        m << '\n';
    }
}

DiscreteKernel discretize(const GreenRadialKernel& kernel, const MeasureProfile& measure, const GridSpec& grid)
{
    if (grid.n < 8)
        throw PreconditionError("discretize: need at least 8 grid nodes");
    if (!(grid.r_min > 0.0) || !(grid.r_max > grid.r_min))
        throw PreconditionError("discretize: need 0 < r_min < r_max");
    measure.validate(kernel.profile());
    const std::size_t n = grid.n;
    const double dx = std::log(grid.r_max / grid.r_min) / static_cast<double>(n - 1);
    std::vector<double> radii(n);
    std::vector<double> wmu(n);
    std::vector<double> wsig(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = i + 1 == n ? grid.r_max : grid.r_min * std::exp(dx * static_cast<double>(i));
        radii[i] = rho;
        double w = kernel.profile().surface_density(rho) * rho * dx;
        if (i == 0 || i + 1 == n)
            w *= 0.5;
        wmu[i] = w;
        wsig[i] = w * measure.density(rho);
    }
    return DiscreteKernel(kernel, measure, std::move(radii), std::move(wmu), std::move(wsig));
}

} // namespace greencrit
