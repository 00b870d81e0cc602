#include "greencrit/profiles.hpp"

#include "greencrit/classify.hpp"
#include "greencrit/error.hpp"
#include "greencrit/quadrature.hpp"
#include "greencrit/util.hpp"

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace greencrit {

struct VolumeProfile::Table
{
    std::vector<double> log_r;
    std::vector<double> log_v;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline;
    double tail_instability = 0.0;
};

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo,
                           std::size_t hi)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw PreconditionError(message);
}

} // namespace

VolumeProfile VolumeProfile::power(double c, double alpha)
{
    require(c > 0.0 && alpha > 0.0, "power profile needs c > 0 and alpha > 0");
    VolumeProfile p;
    p.family_ = VolumeFamily::Power;
    p.c_ = c;
    p.alpha_ = alpha;
    p.tail_exponent_ = alpha;
    p.small_exponent_ = alpha;
    p.regular_radius_ = 1.0;
    p.domain_max_ = std::numeric_limits<double>::infinity();
    return p;
}

VolumeProfile VolumeProfile::power_log(double c, double alpha, int k)
{
    require(c > 0.0 && alpha > 0.0, "powerlog profile needs c > 0 and alpha > 0");
    require(k == 1 || k == 2, "powerlog profile supports k = 1 and k = 2 only (use a tabulated profile for k > 2)");
    VolumeProfile p;
    p.family_ = VolumeFamily::PowerLog;
    p.c_ = c;
    p.alpha_ = alpha;
    p.k_ = k;
    const double lp = (alpha - 2.0) / 2.0;
    p.tail_exponent_ = alpha;
    p.log_powers_.assign(static_cast<std::size_t>(k), lp);
    if (k == 1) {
        p.regular_radius_ = std::numbers::e;
        p.small_exponent_ = alpha + lp;
        p.switch_log_volume_ = std::log(c) + alpha;
    } else {
        p.regular_radius_ = std::exp(std::numbers::e);
        p.small_exponent_ = alpha + 2.0 * lp / std::numbers::e;
        p.switch_log_volume_ = std::log(c) + alpha * std::numbers::e + lp;
    }
    p.domain_max_ = std::numeric_limits<double>::infinity();
    return p;
}

VolumeProfile VolumeProfile::euclidean(int n)
{
    require(n >= 1, "euclidean profile needs n >= 1");
    VolumeProfile p;
    p.family_ = VolumeFamily::Euclidean;
    p.n_ = n;
    p.c_ = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
    p.alpha_ = n;
    p.tail_exponent_ = n;
    p.small_exponent_ = n;
    p.regular_radius_ = 1.0;
    p.domain_max_ = std::numeric_limits<double>::infinity();
    return p;
}

VolumeProfile VolumeProfile::two_regime(double n, double alpha)
{
    require(n > 0.0 && alpha > 0.0, "two-regime profile needs n > 0 and alpha > 0");
    VolumeProfile p;
    p.family_ = VolumeFamily::TwoRegime;
    p.n_ = n;
    p.alpha_ = alpha;
    p.tail_exponent_ = alpha;
    p.small_exponent_ = n;
    p.regular_radius_ = 1.0;
    p.domain_max_ = std::numeric_limits<double>::infinity();
    return p;
}

VolumeProfile VolumeProfile::tabulated(std::vector<double> r, std::vector<double> v)
{
    require(r.size() == v.size(), "tabulated profile: column lengths differ");
    require(r.size() >= 4, "tabulated profile needs at least 4 samples");
    for (std::size_t i = 0; i < r.size(); ++i) {
        require(r[i] > 0.0 && v[i] > 0.0, "tabulated profile: radii and volumes must be positive");
        if (i > 0) {
            require(r[i] > r[i - 1], "tabulated profile: radii must be strictly increasing");
            require(v[i] > v[i - 1], "tabulated profile: volumes must be strictly increasing");
        }
    }
    auto table = std::make_shared<Table>();
    for (std::size_t i = 0; i < r.size(); ++i) {
        table->log_r.push_back(std::log(r[i]));
        table->log_v.push_back(std::log(v[i]));
    }
    const std::size_t n = r.size();
    const double top = table->log_r.back();
    const double bottom = table->log_r.front();

    // Tail: last two decades (or the whole table if shorter).
    std::size_t lo2 = 0;
    while (lo2 + 2 < n && table->log_r[lo2] < top - 2.0 * std::log(10.0))
        ++lo2;
    std::size_t lo1 = lo2;
    while (lo1 + 2 < n && table->log_r[lo1] < top - std::log(10.0))
        ++lo1;
    VolumeProfile p;
    p.family_ = VolumeFamily::Tabulated;
    p.tail_exponent_ = least_squares_slope(table->log_r, table->log_v, lo2, n);
    if (lo1 > lo2 + 1) {
        const double last = least_squares_slope(table->log_r, table->log_v, lo1, n);
        const double prev = least_squares_slope(table->log_r, table->log_v, lo2, lo1 + 1);
        table->tail_instability = std::abs(last - prev);
    }

    std::size_t hi = 2;
    while (hi < n && table->log_r[hi] <= bottom + std::log(10.0))
        ++hi;
    p.small_exponent_ = least_squares_slope(table->log_r, table->log_v, 0, hi);

    table->spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
        std::vector<double>(table->log_r), std::vector<double>(table->log_v));
    p.regular_radius_ = r.front();
    p.domain_min_ = r.front();
    p.domain_max_ = r.back();
    p.table_ = std::move(table);
    return p;
}

VolumeProfile VolumeProfile::from_csv(const std::string& path)
{
    auto columns = read_numeric_csv(path, 2);
    return tabulated(std::move(columns[0]), std::move(columns[1]));
}

double VolumeProfile::power_log_core(double log_r) const
{
    // ln V for r >= regular radius.
    const double lp = (alpha_ - 2.0) / 2.0;
    const double ll = std::log(log_r);
    double out = std::log(c_) + alpha_ * log_r + lp * ll;
    if (k_ == 2)
        out += lp * std::log(ll);
    return out;
}

double VolumeProfile::log_volume(double r) const
{
    if (r < 0.0)
        throw PreconditionError("volume: negative radius");
    if (r == 0.0)
        return -std::numeric_limits<double>::infinity();
    const double lr = std::log(r);
    switch (family_) {
    case VolumeFamily::Power:
    case VolumeFamily::Euclidean:
        return std::log(c_) + alpha_ * lr;
    case VolumeFamily::TwoRegime:
        return lr <= 0.0 ? n_ * lr : alpha_ * lr;
    case VolumeFamily::PowerLog:
        if (r >= regular_radius_)
            return power_log_core(lr);
        return switch_log_volume_ + small_exponent_ * (lr - std::log(regular_radius_));
    case VolumeFamily::Tabulated: {
        if (r < domain_min_ * (1.0 - 1e-12) || r > domain_max_ * (1.0 + 1e-12))
            throw OutOfRangeError("volume: radius " + std::to_string(r) + " outside tabulated range [" +
                                  std::to_string(domain_min_) + ", " + std::to_string(domain_max_) + "]");
        const double x = std::clamp(lr, table_->log_r.front(), table_->log_r.back());
        return (*table_->spline)(x);
    }
    }
    return 0.0;
}

double VolumeProfile::volume(double r) const
{
    if (r == 0.0)
        return 0.0;
    if (family_ == VolumeFamily::Power || family_ == VolumeFamily::Euclidean) {
        if (r < 0.0)
            throw PreconditionError("volume: negative radius");
        return c_ * std::pow(r, alpha_);
    }
    if (family_ == VolumeFamily::TwoRegime) {
        if (r < 0.0)
            throw PreconditionError("volume: negative radius");
        return r <= 1.0 ? std::pow(r, n_) : std::pow(r, alpha_);
    }
    return std::exp(log_volume(r));
}

double VolumeProfile::log_derivative(double r) const
{
    if (!(r > 0.0))
        throw PreconditionError("log_derivative: radius must be positive");
    switch (family_) {
    case VolumeFamily::Power:
    case VolumeFamily::Euclidean:
        return alpha_;
    case VolumeFamily::TwoRegime:
        return r < 1.0 ? n_ : alpha_;
    case VolumeFamily::PowerLog: {
        if (r < regular_radius_)
            return small_exponent_;
        const double lp = (alpha_ - 2.0) / 2.0;
        const double lr = std::log(r);
        double out = alpha_ + lp / lr;
        if (k_ == 2)
            out += lp / (lr * std::log(lr));
        return out;
    }
    case VolumeFamily::Tabulated:
        return surface_density(r) * r / volume(r);
    }
    return 0.0;
}

double VolumeProfile::surface_density(double r) const
{
    if (!(r > 0.0))
        throw PreconditionError("surface_density: radius must be positive");
    switch (family_) {
    case VolumeFamily::Power:
    case VolumeFamily::Euclidean:
        return c_ * alpha_ * std::pow(r, alpha_ - 1.0);
    case VolumeFamily::TwoRegime:
        return r < 1.0 ? n_ * std::pow(r, n_ - 1.0) : alpha_ * std::pow(r, alpha_ - 1.0);
    case VolumeFamily::PowerLog:
        return volume(r) * log_derivative(r) / r;
    case VolumeFamily::Tabulated: {
        if (r < domain_min_ * (1.0 - 1e-12) || r > domain_max_ * (1.0 + 1e-12))
            throw OutOfRangeError("surface_density: radius outside tabulated range");
        const double h = 1e-6 * r;
        const double lo = std::max(domain_min_, r - h);
        const double hi = std::min(domain_max_, r + h);
        return (volume(hi) - volume(lo)) / (hi - lo);
    }
    }
    return 0.0;
}

bool VolumeProfile::homogeneous() const
{
    return family_ == VolumeFamily::Euclidean || family_ == VolumeFamily::TwoRegime;
}

double VolumeProfile::homogeneity_constant() const
{
    if (family_ == VolumeFamily::Euclidean)
        return 1.0;
    if (family_ == VolumeFamily::TwoRegime)
        return std::pow(2.0, std::max(n_, alpha_));
    throw PreconditionError("homogeneity_constant: profile is not flagged homogeneous");
}

std::optional<PowerLaw> VolumeProfile::tail_signature() const
{
    if (family_ == VolumeFamily::Tabulated)
        return std::nullopt;
    return PowerLaw{tail_exponent_, log_powers_};
}

std::string VolumeProfile::describe() const
{
    switch (family_) {
    case VolumeFamily::Power: return "power(c=" + format_number(c_) + ", alpha=" + format_number(alpha_) + ")";
    case VolumeFamily::PowerLog:
        return "powerlog(c=" + format_number(c_) + ", alpha=" + format_number(alpha_) +
               ", k=" + std::to_string(k_) + ")";
    case VolumeFamily::Euclidean: return "euclidean(n=" + format_number(n_) + ")";
    case VolumeFamily::TwoRegime:
        return "tworegime(n=" + format_number(n_) + ", alpha=" + format_number(alpha_) + ")";
    case VolumeFamily::Tabulated:
        return "tabulated(" + std::to_string(table_->log_r.size()) + " points, [" + format_number(domain_min_) +
               ", " + format_number(domain_max_) + "], tail_exponent=" + format_number(tail_exponent_) + ")";
    }
    return "unknown";
}

double VolumeProfile::tail_fit_instability() const
{
    return table_ ? table_->tail_instability : 0.0;
}

// ---------------------------------------------------------------------------

MeasureProfile MeasureProfile::unit()
{
    return MeasureProfile{};
}

MeasureProfile MeasureProfile::radial_power(double c, double m)
{
    require(c >= 0.0 && std::isfinite(c), "radial_power measure needs c >= 0");
    require(std::isfinite(m), "radial_power measure needs a finite exponent");
    MeasureProfile p;
    p.family_ = MeasureFamily::RadialPower;
    p.c_ = c;
    p.m_ = m;
    return p;
}

MeasureProfile MeasureProfile::tabulated(std::vector<double> r, std::vector<double> phi)
{
    require(r.size() == phi.size() && r.size() >= 2, "tabulated measure needs at least 2 samples");
    auto lr = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < r.size(); ++i) {
        require(r[i] > 0.0, "tabulated measure: radii must be positive");
        require(phi[i] >= 0.0, "tabulated measure: density must be non-negative");
        if (i > 0)
            require(r[i] > r[i - 1], "tabulated measure: radii must be strictly increasing");
        lr->push_back(std::log(r[i]));
    }
    MeasureProfile p;
    p.family_ = MeasureFamily::Tabulated;
    p.log_r_ = std::move(lr);
    p.phi_ = std::make_shared<std::vector<double>>(std::move(phi));
    return p;
}

MeasureProfile MeasureProfile::from_csv(const std::string& path)
{
    auto columns = read_numeric_csv(path, 2);
    return tabulated(std::move(columns[0]), std::move(columns[1]));
}

double MeasureProfile::density(double r) const
{
    switch (family_) {
    case MeasureFamily::Unit: return 1.0;
    case MeasureFamily::RadialPower:
        if (c_ == 0.0)
            return 0.0;
        return c_ * std::pow(r, m_);
    case MeasureFamily::Tabulated: {
        const auto& x = *log_r_;
        const auto& y = *phi_;
        const double lr = std::log(r);
        if (lr <= x.front())
            return y.front();
        if (lr >= x.back())
            return y.back();
        const auto it = std::upper_bound(x.begin(), x.end(), lr);
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        const double t = (lr - x[i - 1]) / (x[i] - x[i - 1]);
        return y[i - 1] + t * (y[i] - y[i - 1]);
    }
    }
    return 0.0;
}

double MeasureProfile::max_density(double lo, double hi) const
{
    switch (family_) {
    case MeasureFamily::Unit: return 1.0;
    case MeasureFamily::RadialPower:
        if (c_ == 0.0)
            return 0.0;
        if (m_ >= 0.0)
            return c_ * std::pow(hi, m_);
        if (lo <= 0.0)
            return std::numeric_limits<double>::infinity();
        return c_ * std::pow(lo, m_);
    case MeasureFamily::Tabulated: {
        double out = std::max(density(std::max(lo, 1e-300)), density(hi));
        const auto& x = *log_r_;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = std::exp(x[i]);
            if (r >= lo && r <= hi)
                out = std::max(out, (*phi_)[i]);
        }
        if (lo <= 0.0)
            out = std::max(out, phi_->front());
        return out;
    }
    }
    return 0.0;
}

bool MeasureProfile::is_zero() const
{
    if (family_ == MeasureFamily::RadialPower)
        return c_ == 0.0;
    if (family_ == MeasureFamily::Tabulated)
        return std::all_of(phi_->begin(), phi_->end(), [](double v) { return v == 0.0; });
    return false;
}

std::optional<PowerLaw> MeasureProfile::tail_signature() const
{
    switch (family_) {
    case MeasureFamily::Unit: return monomial(0.0);
    case MeasureFamily::RadialPower: return monomial(m_);
    case MeasureFamily::Tabulated: return std::nullopt;
    }
    return std::nullopt;
}

double MeasureProfile::small_r_exponent() const
{
    return family_ == MeasureFamily::RadialPower ? m_ : 0.0;
}

void MeasureProfile::validate(const VolumeProfile& volume) const
{
    if (family_ == MeasureFamily::RadialPower && c_ > 0.0 && m_ <= -volume.small_r_exponent())
        throw PreconditionError("radial_power measure with m = " + format_number(m_) +
                                " is not locally integrable at the origin (need m > " +
                                format_number(-volume.small_r_exponent()) + ")");
}

std::string MeasureProfile::describe() const
{
    switch (family_) {
    case MeasureFamily::Unit: return "unit";
    case MeasureFamily::RadialPower: return "radial_power(c=" + format_number(c_) + ", m=" + format_number(m_) + ")";
    case MeasureFamily::Tabulated: return "tabulated(" + std::to_string(phi_->size()) + " points)";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

/// c_m A beta int_a^b s^{beta + m - 1} ds.
double power_piece(double cm, double m, double a_coef, double beta, double a, double b)
{
    if (b <= a)
        return 0.0;
    const double e = beta + m;
    if (std::abs(e) < 1e-14)
        return cm * a_coef * beta * std::log(b / a);
    const double lower = a > 0.0 ? std::pow(a, e) : 0.0;
    return cm * a_coef * beta * (std::pow(b, e) - lower) / e;
}

/// V' below the regular radius, extended by the small-r power law for
/// tabulated profiles.
double extended_surface_density(const VolumeProfile& v, double s)
{
    if (v.family() == VolumeFamily::Tabulated && s < v.domain_min()) {
        const double beta = v.small_r_exponent();
        return v.volume(v.domain_min()) * beta / s * std::pow(s / v.domain_min(), beta);
    }
    return v.surface_density(s);
}

} // namespace

double sigma_ball(const VolumeProfile& volume, const MeasureProfile& measure, double r)
{
    if (r < 0.0)
        throw PreconditionError("sigma_ball: negative radius");
    measure.validate(volume);
    if (r == 0.0 || measure.is_zero())
        return 0.0;
    if (measure.family() == MeasureFamily::Unit)
        return volume.volume(r);

    if (measure.family() == MeasureFamily::RadialPower) {
        const double cm = measure.coefficient();
        const double m = measure.m_exponent();
        switch (volume.family()) {
        case VolumeFamily::Power:
        case VolumeFamily::Euclidean:
            return power_piece(cm, m, volume.coefficient(), volume.tail_exponent(), 0.0, r);
        case VolumeFamily::TwoRegime:
            return power_piece(cm, m, 1.0, volume.dimension(), 0.0, std::min(r, 1.0)) +
                   power_piece(cm, m, 1.0, volume.tail_exponent(), 1.0, r);
        default: break;
        }
    }

    // Power-law head on (0, r_s], quadrature above.
    const double rs = volume.regular_radius();
    const double beta = volume.small_r_exponent();
    const double head_end = std::min(r, rs);
    const double vs = volume.family() == VolumeFamily::Tabulated ? volume.volume(volume.domain_min())
                                                                   : volume.volume(rs);
    double head = 0.0;
    if (measure.family() == MeasureFamily::RadialPower) {
        head = power_piece(measure.coefficient(), measure.m_exponent(), vs / std::pow(rs, beta), beta, 0.0, head_end);
    } else {
        auto f = [&](double s) { return measure.density(s) * extended_surface_density(volume, s); };
        head = integrate_from_zero(f, head_end, beta - 1.0 + measure.small_r_exponent(), 1e-10);
    }
    if (r <= rs)
        return head;
    auto g = [&](double s) { return measure.density(s) * volume.surface_density(s); };
    return head + integrate_log(g, rs, r, 1e-10);
}

double sigma_ball_by_quadrature(const VolumeProfile& volume, const MeasureProfile& measure, double r, double rel_tol)
{
    if (r < 0.0)
        throw PreconditionError("sigma_ball: negative radius");
    measure.validate(volume);
    if (r == 0.0)
        return 0.0;
    auto f = [&](double s) { return measure.density(s) * extended_surface_density(volume, s); };
    const double p = volume.small_r_exponent() - 1.0 + measure.small_r_exponent();
    const double rs = volume.regular_radius();
    if (r <= rs)
        return integrate_from_zero(f, r, p, rel_tol);
    return integrate_from_zero(f, rs, p, rel_tol) + integrate_log(f, rs, r, rel_tol);
}

std::optional<PowerLaw> sigma_ball_signature(const VolumeProfile& volume, const MeasureProfile& measure)
{
    const auto vs = volume.tail_signature();
    const auto ms = measure.tail_signature();
    if (!vs || !ms || measure.is_zero())
        return std::nullopt;
    PowerLaw s = *vs * *ms;
    if (s.power > 1e-12)
        return s;
    if (s.power < -1e-12)
        return monomial(0.0);
    const double p = s.log_powers.empty() ? 0.0 : s.log_powers.front();
    if (p > -1.0)
        return PowerLaw{0.0, {p + 1.0}};
    return monomial(0.0);
}

double check_doubling(const VolumeProfile& profile, double r_min, double r_max, std::size_t samples)
{
    require(r_min > 0.0 && r_max > r_min, "check_doubling: need 0 < r_min < r_max");
    require(samples >= 2, "check_doubling: need at least 2 samples");
    double out = 0.0;
    const double step = std::log(r_max / r_min) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = r_min * std::exp(step * static_cast<double>(i));
        out = std::max(out, profile.volume(2.0 * r) / profile.volume(r));
    }
    return out;
}

CriterionReport check_nonparabolic(const VolumeProfile& profile, double r0)
{
    require(r0 > 0.0, "check_nonparabolic: r0 must be positive");
    auto f = [&](double t) { return t / profile.volume(t); };
    std::optional<PowerLaw> sig;
    if (auto vs = profile.tail_signature())
        sig = monomial(1.0) / *vs;
    const double top = std::min(kTruncation, profile.domain_max());
    const auto eval = evaluate_integral_at_infinity(f, r0, sig, top);
    CriterionReport rep;
    rep.criterion_id = CriterionId::Cond0;
    rep.verdict = eval.verdict;
    rep.truncated_value = eval.truncated_value;
    rep.tail_slope = eval.fit.slope;
    rep.constant_estimate = eval.truncated_value;
    rep.bracket = Bracket::Exact;
    rep.add("tail_log_slope", eval.fit.log_slope);
    rep.add("tail_local_slope", eval.fit.local_slope);
    rep.add("profile", profile.describe());
    rep.add("r0", r0);
    rep.add("truncation", top);
    return rep;
}

// ---------------------------------------------------------------------------

VolumeProfile parse_volume_spec(const std::string& spec)
{
    const auto [name, args] = split_spec(spec);
    auto nums = [&](std::size_t count) {
        auto v = parse_number_list(args);
        if (v.size() != count)
            throw ConfigError("profile '" + spec + "': expected " + std::to_string(count) + " parameters");
        return v;
    };
    if (name == "euclidean") {
        const double n = nums(1)[0];
        if (n != std::floor(n))
            throw ConfigError("profile '" + spec + "': dimension must be an integer");
        return VolumeProfile::euclidean(static_cast<int>(n));
    }
    if (name == "power") {
        const auto v = nums(2);
        return VolumeProfile::power(v[0], v[1]);
    }
    if (name == "powerlog") {
        const auto v = nums(3);
        return VolumeProfile::power_log(v[0], v[1], static_cast<int>(v[2]));
    }
    if (name == "tworegime") {
        const auto v = nums(2);
        return VolumeProfile::two_regime(v[0], v[1]);
    }
    if (name == "tabulated")
        return VolumeProfile::from_csv(args);
    throw ConfigError("unknown profile family '" + name + "'");
}

MeasureProfile parse_measure_spec(const std::string& spec)
{
    const auto [name, args] = split_spec(spec);
    if (name == "unit")
        return MeasureProfile::unit();
    if (name == "radial_power" || name == "radialpower") {
        const auto v = parse_number_list(args);
        if (v.size() != 2)
            throw ConfigError("measure '" + spec + "': expected c,m");
        return MeasureProfile::radial_power(v[0], v[1]);
    }
    if (name == "tabulated")
        return MeasureProfile::from_csv(args);
    throw ConfigError("unknown measure family '" + name + "'");
}

} // namespace greencrit
