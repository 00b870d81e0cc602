#include "greencrit/criteria.hpp"
#include "greencrit/error.hpp"
#include "greencrit/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace greencrit;

namespace {

const DiscreteKernel& e3_kernel()
{
    static const DiscreteKernel dk =
        discretize(GreenRadialKernel(VolumeProfile::euclidean(3)), MeasureProfile::unit(), {1e-3, 1e6, 1024});
    return dk;
}

const DiscreteKernel& two_regime_kernel()
{
    static const DiscreteKernel dk =
        discretize(GreenRadialKernel(VolumeProfile::two_regime(3.0, 4.0)), MeasureProfile::unit(), {1e-3, 1e6, 1024});
    return dk;
}

Eigen::VectorXd sigma_of(const DiscreteKernel& dk)
{
    return Eigen::Map<const Eigen::VectorXd>(dk.weight_sigma().data(), static_cast<Eigen::Index>(dk.size()));
}

Eigen::VectorXd unit_mass(std::size_t n, std::size_t k, double w = 1.0)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(k)) = w;
    return v;
}

/// ||A||_{p->p} for a positive matrix by the nonlinear power method.
double p_norm(const Eigen::MatrixXd& a, double p)
{
    const double pp = p / (p - 1.0);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(a.cols());
    double value = 0.0;
    for (int it = 0; it < 20000; ++it) {
        x /= std::pow(x.array().pow(p).sum(), 1.0 / p);
        const Eigen::VectorXd y = a * x;
        const double next = std::pow(y.array().pow(p).sum(), 1.0 / p);
        x = (a.transpose() * Eigen::VectorXd(y.array().pow(p - 1.0))).array().pow(pp - 1.0);
        if (std::abs(next - value) <= 1e-15 * next)
            return next;
        value = next;
    }
    return value;
}

} // namespace

TEST_CASE("build_m")
{
    const auto& dk = e3_kernel();
    const auto m = build_m(dk, 4.0 * M_PI / 3.0).values;
    for (std::size_t i = 0; i < dk.size(); i += 37) {
        const double rho = dk.radii()[i];
        CHECK(m(i) == doctest::Approx(std::min(3.0 / (4.0 * M_PI * rho), 3.0 / (4.0 * M_PI))));
    }
    const auto uncapped = build_m(dk, 1e-300).values;
    for (std::size_t i = 0; i < dk.size(); ++i)
        CHECK(uncapped(i) == doctest::Approx(dk.diagonal()[i]));
}

TEST_CASE("property: m is non-increasing")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alpha(2.2, 8.0), c(0.1, 10.0), a(1e-2, 1e2);
    for (int t = 0; t < 20; ++t) {
        const auto dk = discretize(GreenRadialKernel(VolumeProfile::power(c(rng), alpha(rng))), MeasureProfile::unit(),
                                   {1e-2, 1e4, 64});
        const auto m = build_m(dk, a(rng)).values;
        for (Eigen::Index i = 1; i < m.size(); ++i)
            CHECK(m(i) <= m(i - 1));
    }
}

TEST_CASE("epsilon from constant")
{
    CHECK(epsilon_from_constant(4.0, 2.0) == doctest::Approx(0.25));
    CHECK(epsilon_from_constant(8.0, 4.0) == doctest::Approx(0.5));
    CHECK(epsilon_from_constant(0.0, 3.0) == 1.0);
}

TEST_CASE("epsilon solution on Euclidean(3)")
{
    const auto dk =
        discretize(GreenRadialKernel(VolumeProfile::euclidean(3)), MeasureProfile::unit(), {1e-3, 1e6, 2048});
    const auto sol = epsilon_solution(dk, 4.0, 1.0);
    CHECK(sol.certified);
    CHECK(sol.field.kind == FieldKind::EpsilonM);
    CHECK((sol.field.values.array() > 0.0).all());
    CHECK(sol.residual >= -1e-8 * sol.field.values.maxCoeff());
    CHECK(check_supersolution(dk, sol.field.values, 4.0) == doctest::Approx(sol.residual));
    CHECK(sol.epsilon == doctest::Approx(epsilon_from_constant(sol.constant, 4.0)));

    CHECK_THROWS_AS(epsilon_solution(e3_kernel(), 2.0, 1.0), ConstructionRefused);
}

TEST_CASE("supersolution detector")
{
    const auto& dk = e3_kernel();
    const auto sol = epsilon_solution(dk, 4.0, 1.0);
    CHECK(check_supersolution(dk, sol.field.values, 4.0) >= 0.0);

    // All sigma mass on one shell, heavy enough that u = 1 fails there.
    const std::size_t k = dk.size() / 2;
    std::vector<double> w(dk.size(), 0.0);
    w[k] = 10.0 / dk.diagonal()[k];
    const auto heavy = dk.with_sigma_weights(w);
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dk.size()));
    CHECK(check_supersolution(heavy, u, 2.0) == doctest::Approx(1.0 - 10.0));
    // Halving u where the mass sits only makes it worse.
    Eigen::VectorXd halved = u;
    halved(static_cast<Eigen::Index>(k)) = 0.5;
    CHECK(check_supersolution(heavy, halved, 2.0) < 0.0);
}

TEST_CASE("Picard iteration")
{
    const auto& dk = e3_kernel();
    SUBCASE("zero sigma is a fixed point")
    {
        const auto flat = dk.with_sigma_weights(std::vector<double>(dk.size(), 0.0));
        const Eigen::VectorXd h = build_m(flat, 1.0).values;
        const auto r = picard_iterate(flat, 4.0, h);
        CHECK(r.status == PicardStatus::Converged);
        CHECK(r.iterations == 1);
        CHECK((r.u.values - r.datum).cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.delta == doctest::Approx(std::pow(0.75, 4.0 / 3.0)));
    }
    SUBCASE("Euclidean(3), q = 4")
    {
        const Eigen::VectorXd h = picard_datum(dk, 4.0, 1.0).values;
        const auto r = picard_iterate(dk, 4.0, h);
        CHECK(r.status == PicardStatus::Converged);
        CHECK(r.iterations < 10000);
        CHECK(r.monotonicity_violations == 0);
        CHECK(((r.u.values - r.datum).array() >= 0.0).all());
        // u - G(u^q sigma) = datum at the fixed point.
        CHECK(check_supersolution(dk, r.u.values, 4.0) == doctest::Approx(r.datum.minCoeff()).epsilon(1e-6));
        // Comparison with the supersolution eps m, which dominates the datum.
        const auto sol = epsilon_solution(dk, 4.0, 1.0);
        CHECK(((r.datum - sol.field.values).array() <= 0.0).all());
        CHECK(r.trace.iter.size() == r.iterations);
    }
    SUBCASE("safe regime precondition and divergence")
    {
        const Eigen::VectorXd big = 1e3 * build_m(dk, 1.0).values;
        CHECK_THROWS_AS(picard_iterate(dk, 4.0, big), PreconditionError);
        PicardOptions raw;
        raw.safe_regime = false;
        const auto r = picard_iterate(dk, 4.0, big, raw);
        CHECK(r.status == PicardStatus::Diverged);
    }
    SUBCASE("iteration cap")
    {
        PicardOptions opts;
        opts.max_iters = 2;
        opts.tol = 1e-300;
        CHECK_THROWS_AS(picard_iterate(dk, 4.0, picard_datum(dk, 4.0, 1.0).values, opts), PicardNonConvergence);
    }
}

TEST_CASE("Harnack lower bound")
{
    const auto& dk = e3_kernel();
    const double a = 1.0;
    const auto m = build_m(dk, a).values;
    for (std::size_t k : {std::size_t{0}, dk.size() / 3, dk.size() - 1}) {
        const auto omega = unit_mass(dk.size(), k);
        double oracle = INFINITY;
        for (std::size_t i = 0; i < dk.size(); ++i)
            oracle = std::min(oracle, dk.diagonal()[std::max(i, k)] / m(i));
        const double c = harnack_check(dk, omega, a);
        CHECK(c == doctest::Approx(oracle));
        CHECK(c > 0.0);
        CHECK(c >= std::min(1.0, dk.diagonal()[k] * a) * (1.0 - 1e-12));
        CHECK(harnack_check(dk, 2.0 * omega, a) == doctest::Approx(2.0 * c).epsilon(1e-14));
    }
    CHECK_THROWS_AS(harnack_check(dk, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dk.size())), a),
                    PreconditionError);
}

TEST_CASE("lem-r")
{
    const auto& dk = e3_kernel();
    const std::size_t k = 300;
    const double w = 2.5;
    for (double s : {1.5, 2.0, 3.0}) {
        const auto r = lem_r_check(dk, s, unit_mass(dk.size(), k, w));
        double oracle = INFINITY;
        const double rkk = dk.diagonal()[k];
        for (std::size_t i = 0; i < dk.size(); ++i) {
            const double rik = dk.diagonal()[std::max(i, k)];
            oracle = std::min(oracle, std::pow(w, s) * rik * (s * std::pow(rkk, s - 1.0) - std::pow(rik, s - 1.0)));
        }
        CHECK(r.worst_slack == doctest::Approx(oracle));
        CHECK(r.worst_slack > 0.0);
    }
    for (const auto* kernel : {&e3_kernel(), &two_regime_kernel()})
        for (double s : {1.5, 2.0, 3.0})
            CHECK(lem_r_check(*kernel, s, sigma_of(*kernel)).holds());
    CHECK_THROWS_AS(lem_r_check(dk, 1.0, sigma_of(dk)), PreconditionError);
}

TEST_CASE("weighted norm inequalities")
{
    SUBCASE("rank one")
    {
        const auto& base = e3_kernel();
        const std::size_t k = 400;
        const double w = 0.3;
        std::vector<double> ws(base.size(), 0.0);
        ws[k] = w;
        const auto dk = base.with_sigma_weights(ws);
        const auto res = weighted_norm_check(dk, 3.0, unit_mass(dk.size(), k, w), 50, 1);
        const double rkk = dk.diagonal()[k];
        CHECK(res.hypothesis_constant == doctest::Approx(std::pow(rkk * w, 3.0)));
        CHECK(res.norm_bound == doctest::Approx(1.5 * rkk * w));
        CHECK(res.worst_ratio_sigma == doctest::Approx(rkk * w));
        CHECK(res.worst_ratio_omega == doctest::Approx(rkk * w));
        CHECK(res.violations == 0);
    }
    SUBCASE("omega = m^q sigma on acceptance kernels")
    {
        for (const auto* kernel : {&e3_kernel(), &two_regime_kernel()}) {
            const Eigen::VectorXd omega = build_m(*kernel, 1.0).values.array().pow(4.0) * sigma_of(*kernel).array();
            const auto res = weighted_norm_check(*kernel, 4.0, omega, 500, 42);
            CHECK(res.trials == 500);
            CHECK(res.violations == 0);
            CHECK(res.worst_ratio_sigma <= res.norm_bound);
            CHECK(res.worst_ratio_omega <= res.norm_bound);
        }
    }
    SUBCASE("duality of the two inequalities")
    {
        const auto dk =
            discretize(GreenRadialKernel(VolumeProfile::euclidean(3)), MeasureProfile::unit(), {1e-1, 1e1, 8});
        const double q = 4.0, s = q / (q - 1.0);
        const Eigen::VectorXd sigma = sigma_of(dk);
        const Eigen::VectorXd omega = build_m(dk, 1.0).values.array().pow(q) * sigma.array();
        // f -> G(f sigma) on L^s(sigma) -> L^s(omega), rescaled to unweighted l^s.
        const Eigen::MatrixXd a =
            omega.array().pow(1.0 / s).matrix().asDiagonal() * dk.matrix() * sigma.array().pow(1.0 / q).matrix().asDiagonal();
        const double forward = p_norm(a, s);
        const double backward = p_norm(a.transpose(), q);
        CHECK(forward == doctest::Approx(backward).epsilon(1e-6));
        const auto res = weighted_norm_check(dk, q, omega, 2000, 3);
        CHECK(res.worst_ratio_sigma <= forward * (1.0 + 1e-9));
        CHECK(res.worst_ratio_omega <= backward * (1.0 + 1e-9));
        CHECK(forward <= res.norm_bound);
    }
}

TEST_CASE("Moser constants")
{
    const auto two = moser_constants(2.0, 60);
    CHECK(two.lower_bound == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-12));
    CHECK(std::abs(two.lower_bound - 0.353553) < 1e-6);
    double series = 0.0;
    for (int k = 1; k < 60; ++k)
        series += std::pow(2.0, -1.0 - k) * std::log(std::pow(2.0, k + 1.0) - 1.0);
    CHECK(two.limit_estimate == doctest::Approx(std::exp(-series)).epsilon(1e-12));
    CHECK(two.limit_estimate > 0.353553);
    CHECK(two.limit_estimate < 1.0);

    for (double q : {1.5, 2.0, 3.0}) {
        const auto m = moser_constants(q, 60);
        CHECK(m.partial.size() == 60);
        CHECK(std::abs(m.partial[59] - m.partial[58]) < 1e-8);
    }
    for (double q : {2.0, 3.0}) {
        const auto m = moser_constants(q, 60);
        for (std::size_t j = 40; j < 60; ++j)
            CHECK(std::abs(m.partial[j] - m.partial[j - 1]) < 1e-8);
    }
    CHECK_THROWS_AS(moser_constants(2.0, 1), PreconditionError);
}

TEST_CASE("property: Moser partials decrease and stay above the bound")
{
    for (double q : {1.1, 1.5, 2.0, 3.0, 5.0}) {
        const auto m = moser_constants(q, 600);
        for (std::size_t j = 1; j < m.partial.size(); ++j) {
            CHECK(m.partial[j] > 0.0);
            CHECK(m.partial[j] <= m.partial[j - 1]);
        }
        CHECK(m.limit_estimate <= 1.0);
        CHECK(m.limit_estimate >= m.lower_bound - 1e-12);
    }
}

TEST_CASE("level-set bounds")
{
    const auto& dk = e3_kernel();
    const auto ls = level_set_bound_check(dk, 4.0, 1.0, {2.0, 10.0, 100.0});
    CHECK(ls.gp_violations == 0);
    CHECK(ls.ap_violations == 0);
    CHECK(ls.lem_r_violations == 0);
    CHECK(std::isfinite(ls.observed_c));
    CHECK(ls.observed_c <= ls.predicted_c);

    const auto smallest = level_set_bound_check(dk, 4.0, 1.0, {1.0});
    CHECK(smallest.gp_violations + smallest.ap_violations == 0);

    const auto tr = level_set_bound_check(two_regime_kernel(), 4.0, 1.0, {2.0, 10.0, 100.0});
    CHECK(tr.gp_violations + tr.ap_violations + tr.lem_r_violations == 0);

    // Here C < 1, so the constant C / c(q)^{q-1} matters.
    const auto tr2 = level_set_bound_check(two_regime_kernel(), 4.0, 2.0, {2.0, 10.0, 100.0});
    CHECK(tr2.constant < 1.0);
    CHECK(tr2.gp_violations + tr2.ap_violations + tr2.lem_r_violations == 0);
    CHECK(tr2.predicted_c == doctest::Approx(tr2.constant / std::pow(moser_constants(4.0, 200).limit_estimate, 3.0)));

    CHECK_THROWS_AS(level_set_bound_check(dk, 2.0, 1.0, {2.0}), PreconditionError);
}

TEST_CASE("property: linearity")
{
    const auto& dk = e3_kernel();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd omega(static_cast<Eigen::Index>(dk.size()));
    for (Eigen::Index i = 0; i < omega.size(); ++i)
        omega(i) = u(rng);
    const Eigen::VectorXd once = dk.apply(omega);
    const Eigen::VectorXd thrice = dk.apply(3.0 * omega);
    CHECK((thrice - 3.0 * once).cwiseAbs().maxCoeff() <= 1e-12 * thrice.cwiseAbs().maxCoeff());

    // Scale sigma through the measure so the analytic mass beyond r_max scales too.
    const GreenRadialKernel k(VolumeProfile::euclidean(3));
    const auto one = discretize(k, MeasureProfile::radial_power(1.0, 0.0), {1e-3, 1e6, 512});
    const auto two = discretize(k, MeasureProfile::radial_power(2.0, 0.0), {1e-3, 1e6, 512});
    CHECK(eval_cond_m(two, 4.0, 1.0).constant_estimate ==
          doctest::Approx(2.0 * eval_cond_m(one, 4.0, 1.0).constant_estimate).epsilon(1e-9));
}

TEST_CASE("CSV output")
{
    const auto dir = std::filesystem::temp_directory_path() / "greencrit_solver_test";
    std::filesystem::create_directories(dir);
    const auto m = moser_constants(2.0, 5);
    m.write_csv((dir / "moser.csv").string());
    std::ifstream in(dir / "moser.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "j,partial");
    std::getline(in, line);
    CHECK(line == "1,1");

    const auto r = picard_iterate(e3_kernel(), 4.0, picard_datum(e3_kernel(), 4.0, 1.0).values);
    r.trace.write_csv((dir / "trace.csv").string());
    std::ifstream tin(dir / "trace.csv");
    std::getline(tin, line);
    CHECK(line == "iter,sup_change,max_u");
    std::size_t rows = 0;
    while (std::getline(tin, line))
        ++rows;
    CHECK(rows == r.iterations);
    std::filesystem::remove_all(dir);
}
