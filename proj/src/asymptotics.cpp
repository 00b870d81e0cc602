#include "greencrit/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace greencrit {

namespace {

constexpr double kExponentTie = 1e-12;

std::vector<double> combine(const std::vector<double>& a, const std::vector<double>& b, double sign)
{
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i)
        out[i] += sign * b[i];
    return out;
}

} // namespace

PowerLaw PowerLaw::operator*(const PowerLaw& other) const
{
    return {power + other.power, combine(log_powers, other.log_powers, 1.0)};
}

PowerLaw PowerLaw::operator/(const PowerLaw& other) const
{
    return {power - other.power, combine(log_powers, other.log_powers, -1.0)};
}

PowerLaw PowerLaw::pow(double exponent) const
{
    PowerLaw out{power * exponent, log_powers};
    for (double& p : out.log_powers)
        p *= exponent;
    return out;
}

PowerLaw PowerLaw::compose_power(double scale) const
{
    // ln(t^c) = c ln t and ln ln(t^c) ~ ln ln t, so only the power scales.
    return {power * scale, log_powers};
}

PowerLaw PowerLaw::derivative() const
{
    return {power - 1.0, log_powers};
}

PowerLaw monomial(double power)
{
    return {power, {}};
}

bool converges_at_infinity(const PowerLaw& signature)
{
    if (signature.power < -1.0 - kExponentTie)
        return true;
    if (signature.power > -1.0 + kExponentTie)
        return false;
    // r^-1 times iterated logs: the first log power that differs from -1 decides.
    for (double p : signature.log_powers) {
        if (p < -1.0 - kExponentTie)
            return true;
        if (p > -1.0 + kExponentTie)
            return false;
    }
    return false;
}

bool converges_at_zero(double power)
{
    return power > -1.0 + kExponentTie;
}

} // namespace greencrit
