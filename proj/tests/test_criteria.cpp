#include "greencrit/criteria.hpp"
#include "greencrit/error.hpp"
#include "greencrit/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace greencrit;

namespace {

const VolumeProfile kE3 = VolumeProfile::euclidean(3);
const MeasureProfile kUnit = MeasureProfile::unit();

double extra(const CriterionReport& rep, const std::string& key)
{
    return std::stod(rep.extra(key));
}

/// Both sides of the Hardy-type inequality by piecewise quadrature and exact tails.
std::pair<double, double> hardy_oracle(const StepFunction& phi, double s, double r)
{
    double mass = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < phi.values.size(); ++k) {
        const double lo = std::max(r, phi.breaks[k]), hi = phi.breaks[k + 1], v = phi.values[k];
        if (hi <= lo)
            continue;
        mass += integrate([v](double t) { return v * t; }, lo, hi, 1e-10);
        weighted += integrate([v, s](double t) { return std::pow(v, s) * std::pow(t, 2.0 * s - 1.0); }, lo, hi, 1e-10);
    }
    if (phi.tail_coefficient > 0.0) {
        const double lo = std::max(r, phi.breaks.back()), c = phi.tail_coefficient, p = phi.tail_power;
        mass += c * std::pow(lo, 2.0 - p) / (p - 2.0);
        weighted += std::pow(c, s) * std::pow(lo, s * (2.0 - p)) / (s * (p - 2.0));
    }
    return {std::pow(mass, s), hardy_constant(s) * (weighted + std::pow(r, 2.0 * s) * std::pow(phi(r), s))};
}

} // namespace

TEST_CASE("cond-int1 examples")
{
    auto rep = eval_cond_int1(kE3, kUnit, 4.0, 1.0);
    CHECK(rep.verdict == Verdict::Finite);
    CHECK(rep.tail_slope == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(rep.bracket == Bracket::Exact);
    // Integrand (3/4pi)^3 r^-2 on [1, 1e6].
    CHECK(rep.truncated_value == doctest::Approx(std::pow(3.0 / (4.0 * M_PI), 3) * (1.0 - 1e-6)).epsilon(1e-8));

    rep = eval_cond_int1(kE3, kUnit, 2.0, 1.0);
    CHECK(rep.verdict == Verdict::Divergent);
    CHECK(rep.tail_slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

    const auto m1 = MeasureProfile::radial_power(1.0, 1.0);
    CHECK(eval_cond_int1(kE3, m1, 4.0, 1.0).verdict == Verdict::Divergent);
    CHECK(eval_cond_int1(kE3, m1, 4.1, 1.0).verdict == Verdict::Finite);
}

TEST_CASE("cond-int2 examples")
{
    const auto rep = eval_cond_int2(kE3, kUnit, 4.0, 1.0);
    CHECK(rep.verdict == Verdict::Bounded);
    CHECK(eval_cond_int2(kE3, kUnit, 2.0, 1.0).verdict == Verdict::Unbounded);
}

TEST_CASE("property: sigma = mu implication and bracket soundness")
{
    for (const auto& p : {kE3, VolumeProfile::euclidean(4), VolumeProfile::two_regime(3.0, 4.0)}) {
        for (double q : {1.5, 2.5, 3.5, 5.0}) {
            const auto one = eval_cond_int1(p, kUnit, q, 1.0);
            const auto two = eval_cond_int2(p, kUnit, q, 1.0);
            if (one.verdict == Verdict::Finite)
                CHECK(two.verdict == Verdict::Bounded);
            if (!two.extra("upper_max").empty())
                CHECK(extra(two, "lower_max") <= extra(two, "upper_max") * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("cond-int1b examples")
{
    for (int n : {3, 4, 5, 6}) {
        const double qs = n / (n - 2.0);
        CHECK(eval_cond_int1b(VolumeProfile::euclidean(n), qs * 1.05, 1.0).verdict == Verdict::Finite);
        CHECK(eval_cond_int1b(VolumeProfile::euclidean(n), qs * 0.95, 1.0).verdict == Verdict::Divergent);
    }
    const auto pl = eval_cond_int1b(VolumeProfile::power_log(1.0, 4.0, 1), 2.0, 1.0);
    CHECK(pl.verdict == Verdict::Divergent);
    CHECK(pl.tail_slope >= -1.05);
    CHECK(pl.tail_slope <= -0.95);
    CHECK(eval_cond_int1b(VolumeProfile::power_log(1.0, 4.0, 1), 2.1, 1.0).verdict == Verdict::Finite);
    const auto p4 = eval_cond_int1b(VolumeProfile::power(1.0, 4.0), 3.0, 1.0);
    CHECK(p4.verdict == Verdict::Finite);
    CHECK(p4.tail_slope == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("cond-1 examples")
{
    const auto tr = VolumeProfile::two_regime(3.0, 4.0);
    const auto snow = build_snowflake_metric(1.0, 3.0, 2.0);
    CHECK(eval_cond1(tr, kUnit, snow, 4.2, 1.0).verdict == Verdict::Finite);
    CHECK(eval_cond1(tr, kUnit, snow, 3.8, 1.0).verdict == Verdict::Divergent);

    // Euclidean(3) with the power metric of exponent 1 reduces to cond-int1b.
    const auto pm = build_power_metric(1.0);
    for (double q : {1.5, 2.5, 2.9, 3.2, 5.0})
        CHECK(eval_cond1(kE3, kUnit, pm, q, 1.0).verdict == eval_cond_int1b(kE3, q, 1.0).verdict);

    CHECK(eval_cond1(VolumeProfile::power(1.0, 4.0), kUnit, build_power_metric(2.0), 50.0, 1.0).verdict ==
          Verdict::Finite);
}

TEST_CASE("cond-2 examples")
{
    const auto tr = VolumeProfile::two_regime(3.0, 4.0);
    const auto snow = build_snowflake_metric(1.0, 3.0, 2.0);
    const auto at = eval_cond2(tr, kUnit, snow, 4.0, 1.0);
    CHECK(at.verdict == Verdict::Bounded);
    CHECK(std::isfinite(at.constant_estimate));
    CHECK(eval_cond2(tr, kUnit, snow, 3.9, 1.0).verdict == Verdict::Unbounded);
    CHECK(eval_cond2(tr, kUnit, snow, 3.0, 1.0).verdict == Verdict::Unbounded);

    // Small-s part: int_0^1 V(s^{1/d2}) s^{-g-1} ds, midpoint-rule oracle.
    const double small = cond2_small_s_integral(tr, kUnit, snow);
    double oracle = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double s = (i + 0.5) / n;
        oracle += tr.volume(std::pow(s, 1.0 / snow.delta2)) / std::pow(s, snow.gamma_tilde + 1.0) / n;
    }
    CHECK(small == doctest::Approx(oracle).epsilon(1e-6));
    // In the variable tau = s^{1/d2} this is int_0^1 tau^n / tau^{n-2} dtau / tau = 1/2.
    CHECK(small / snow.delta2 >= 0.5 - 1e-9);
    CHECK(small / snow.delta2 <= 2.0);
}

TEST_CASE("last-1 and last-2 agree with cond-int1 and cond-int2")
{
    const GreenRadialKernel k(kE3);
    const auto dk = discretize(k, kUnit, {1e-3, 1e6, 1024});
    const double a = default_a(k, 1.0);
    CHECK(a == doctest::Approx(4.0 * M_PI / 3.0));
    for (double q : {2.0, 2.5, 3.5, 4.0}) {
        const auto l1 = eval_last1(dk, q, a).verdict;
        const auto c1 = eval_cond_int1(kE3, kUnit, q, 1.0).verdict;
        const auto l2 = eval_last2(dk, q, a).verdict;
        const auto c2 = eval_cond_int2(kE3, kUnit, q, 1.0).verdict;
        CHECK(l1 == c1);
        CHECK(l2 == c2);
    }
    CHECK(eval_last1(dk, 4.0, 1.0).verdict == Verdict::Finite);
    CHECK(eval_last1(dk, 2.0, 1.0).verdict == Verdict::Divergent);
    CHECK_THROWS_AS(eval_last2(dk, 4.0, a, {a}), PreconditionError);
}

TEST_CASE("cond-m")
{
    const GreenRadialKernel k(kE3);
    const auto dk = discretize(k, kUnit, {1e-3, 1e6, 1024});
    const auto bounded = eval_cond_m(dk, 4.0, 1.0);
    CHECK(bounded.verdict == Verdict::Bounded);
    CHECK(std::isfinite(bounded.constant_estimate));
    CHECK(eval_cond_m(dk, 2.0, 1.0).verdict == Verdict::Unbounded);

    // Linearity in sigma.
    const auto one = discretize(k, MeasureProfile::radial_power(1.0, 0.0), {1e-3, 1e6, 512});
    const auto two = discretize(k, MeasureProfile::radial_power(2.0, 0.0), {1e-3, 1e6, 512});
    CHECK(eval_cond_m(two, 4.0, 1.0).constant_estimate ==
          doctest::Approx(2.0 * eval_cond_m(one, 4.0, 1.0).constant_estimate).epsilon(1e-9));
}

TEST_CASE("critical exponent scans")
{
    CriterionParams p;
    p.volume = kE3;
    const auto scan = critical_exponent([&](double q) { return scan_verdict("cond-int1b", p, q); }, 2.0, 5.0, 1e-3);
    CHECK(std::abs(scan.q_critical - 3.0) <= 1e-3);

    p.measure = MeasureProfile::radial_power(1.0, 1.0);
    const auto weighted = critical_exponent([&](double q) { return scan_verdict("cond-int1", p, q); }, 2.0, 6.0, 1e-3);
    CHECK(std::abs(weighted.q_critical - 4.0) <= 1e-3);

    CHECK_THROWS_AS(critical_exponent([&](double q) { return scan_verdict("cond-int1b", p, q); }, 4.0, 5.0, 1e-3),
                    BracketError);
}

TEST_CASE("property: verdicts switch at most once along q")
{
    CriterionParams p;
    p.volume = VolumeProfile::euclidean(4);
    for (const std::string target : {"cond-int1b", "cond-int1", "main"}) {
        int switches = 0;
        Verdict prev = Verdict::Inconclusive;
        for (double q = 1.1; q <= 4.0; q += 0.1) {
            const Verdict v = scan_verdict(target, p, q);
            if (v == Verdict::Inconclusive)
                continue;
            if (prev != Verdict::Inconclusive && is_positive(v) != is_positive(prev))
                ++switches;
            prev = v;
        }
        CHECK(switches <= 1);
    }
}

TEST_CASE("joint verdicts")
{
    CHECK(joint_verdict(Verdict::Finite, Verdict::Bounded) == Verdict::Finite);
    CHECK(joint_verdict(Verdict::Finite, Verdict::Unbounded) == Verdict::Divergent);
    CHECK(joint_verdict(Verdict::Inconclusive, Verdict::Divergent) == Verdict::Divergent);
    CHECK(joint_verdict(Verdict::Inconclusive, Verdict::Bounded) == Verdict::Inconclusive);
}

TEST_CASE("Hardy closed forms")
{
    StepFunction ind;
    ind.breaks = {0.0, 2.0};
    ind.values = {1.0};
    const auto h = hardy_check(ind, 0.5, 1.0);
    CHECK(h.lhs == doctest::Approx(std::sqrt(1.5)));
    // int_1^2 t^0 dt = 1, plus r phi(r)^{1/2} = 1.
    CHECK(h.rhs == doctest::Approx(hardy_constant(0.5) * 2.0));
    CHECK(h.holds());

    StepFunction cube;
    cube.breaks = {0.0, 1.0};
    cube.values = {1.0};
    cube.tail_coefficient = 1.0;
    cube.tail_power = 3.0;
    const auto c = hardy_check(cube, 0.5, 1.0);
    CHECK(c.lhs == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.rhs == doctest::Approx(hardy_constant(0.5) * 3.0).epsilon(1e-10));
    CHECK(hardy_constant(0.5) == doctest::Approx(0.5 * std::sqrt(2.0) * std::sqrt(3.0)));

    StepFunction up;
    up.breaks = {0.0, 1.0, 2.0};
    up.values = {1.0, 2.0};
    CHECK_THROWS_AS(hardy_check(up, 0.5, 1.0), PreconditionError);
}

TEST_CASE("property: Hardy inequality on random step functions")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> lr(std::log(1e-2), std::log(1e2));
    std::size_t violations = 0;
    for (double s : {0.25, 0.5, 0.75}) {
        for (int i = 0; i < 200; ++i) {
            const auto phi = random_step_function(rng);
            const double r = std::exp(lr(rng));
            const auto h = hardy_check(phi, s, r);
            const auto [lhs, rhs] = hardy_oracle(phi, s, r);
            CHECK(h.lhs == doctest::Approx(lhs).epsilon(1e-8));
            CHECK(h.rhs == doctest::Approx(rhs).epsilon(1e-8));
            if (!h.holds() || lhs > rhs)
                ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("conjecture-2 integral")
{
    CHECK(conjecture2_integral(kE3, 3.0, 1.0).verdict == Verdict::Divergent);
    CHECK(conjecture2_integral(VolumeProfile::power(1.0, 4.0), 4.0, 1.0).verdict == Verdict::Divergent);
    const auto pl = conjecture2_integral(VolumeProfile::power_log(1.0, 4.0, 1), 4.0, 1.0);
    CHECK(pl.extra("status") == "EXPLORATORY");
}

TEST_CASE("report text has fixed leading keys")
{
    const auto text = eval_cond_int1b(kE3, 4.0, 1.0).to_text();
    CHECK(text.rfind("criterion_id = ", 0) == 0);
    const auto v = text.find("verdict = ");
    const auto t = text.find("truncated_value = ");
    const auto b = text.find("bracket = ");
    CHECK(v < t);
    CHECK(t < b);
}
