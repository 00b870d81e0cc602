#include "greencrit/solver.hpp"

#include "greencrit/criteria.hpp"
#include "greencrit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace greencrit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceFactor = 1e12;
constexpr double kMonotoneSlack = 1e-14;

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw PreconditionError(message);
}

Eigen::VectorXd sigma_vector(const DiscreteKernel& dk)
{
    return Eigen::Map<const Eigen::VectorXd>(dk.weight_sigma().data(), static_cast<Eigen::Index>(dk.size()));
}

std::ofstream open_csv(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path + "'");
    return out;
}

} // namespace

std::string to_string(FieldKind kind)
{
    switch (kind) {
    case FieldKind::EpsilonM: return "EpsilonM";
    case FieldKind::PicardLimit: return "PicardLimit";
    case FieldKind::Supersolution: return "Supersolution";
    case FieldKind::Datum: return "Datum";
    }
    return "Unknown";
}

SolutionField build_m(const DiscreteKernel& dk, double a)
{
    require(a > 0.0, "build_m: a must be positive");
    SolutionField m;
    m.kind = FieldKind::Datum;
    m.values.resize(static_cast<Eigen::Index>(dk.size()));
    for (std::size_t i = 0; i < dk.size(); ++i)
        m.values(static_cast<Eigen::Index>(i)) = std::min(dk.diagonal()[i], 1.0 / a);
    return m;
}

double epsilon_from_constant(double c, double q)
{
    require(q > 1.0, "q must be > 1");
    require(c >= 0.0 && std::isfinite(c), "epsilon: constant must be finite and non-negative");
    return c == 0.0 ? 1.0 : std::pow(c, -1.0 / (q - 1.0));
}

double check_supersolution(const DiscreteKernel& dk, const Eigen::VectorXd& u, double q)
{
    require(u.size() == static_cast<Eigen::Index>(dk.size()), "check_supersolution: size mismatch");
    require((u.array() > 0.0).all(), "check_supersolution: u must be positive");
    const Eigen::VectorXd load = u.array().pow(q) * sigma_vector(dk).array();
    return (u - dk.apply(load)).minCoeff();
}

double supersolution_tolerance(const Eigen::VectorXd& u)
{
    return 1e-8 * u.maxCoeff();
}

EpsilonSolution epsilon_solution(const DiscreteKernel& dk, double q, double a)
{
    const auto rep = eval_cond_m(dk, q, a);
    if (rep.verdict != Verdict::Bounded)
        throw ConstructionRefused("cond-m is " + to_string(rep.verdict) + " for q = " + format_number(q) +
                                  "; no eps m solution");
    EpsilonSolution out;
    out.constant = rep.constant_estimate;
    out.epsilon = epsilon_from_constant(out.constant, q);
    out.field.kind = FieldKind::EpsilonM;
    out.field.values = out.epsilon * build_m(dk, a).values;
    out.residual = check_supersolution(dk, out.field.values, q);
    out.certified = out.residual >= -supersolution_tolerance(out.field.values);
    return out;
}

SolutionField picard_datum(const DiscreteKernel& dk, double q, double a)
{
    const auto rep = eval_cond_m(dk, q, a);
    if (rep.verdict != Verdict::Bounded)
        throw ConstructionRefused("cond-m is " + to_string(rep.verdict) + " for q = " + format_number(q));
    const double c = rep.constant_estimate;
    const double eps = c == 0.0 ? 1.0 : std::pow(c * (q - 1.0), -1.0 / (q - 1.0));
    SolutionField h;
    h.kind = FieldKind::Datum;
    h.values = eps * build_m(dk, a).values;
    return h;
}

void IterationTrace::write_csv(const std::string& path) const
{
    auto out = open_csv(path);
    out << "iter,sup_change,max_u\n";
    for (std::size_t k = 0; k < iter.size(); ++k)
        out << iter[k] << ',' << format_number(sup_change[k]) << ',' << format_number(max_u[k]) << '\n';
}

PicardResult picard_iterate(const DiscreteKernel& dk, double q, const Eigen::VectorXd& h, const PicardOptions& options)
{
    require(q > 1.0, "q must be > 1");
    require(h.size() == static_cast<Eigen::Index>(dk.size()), "picard: datum size mismatch");
    require((h.array() > 0.0).all(), "picard: datum must be positive");
    require(options.tol > 0.0 && options.max_iters > 0, "picard: need tol > 0 and max_iters > 0");
    const Eigen::VectorXd sigma = sigma_vector(dk);

    PicardResult out;
    out.datum = h;
    if (options.safe_regime) {
        const Eigen::VectorXd gh = dk.apply(Eigen::VectorXd(h.array().pow(q) * sigma.array()));
        const Eigen::ArrayXd bound = h.array() / (q - 1.0);
        if ((gh.array() > bound * (1.0 + 1e-12)).any())
            throw PreconditionError("picard: datum violates G(h^q sigma) <= h/(q-1)");
        out.delta = std::pow((q - 1.0) / q, q / (q - 1.0));
        out.datum = out.delta * h;
    }
    const double blowup = kDivergenceFactor * h.maxCoeff();

    Eigen::VectorXd u = out.datum;
    for (std::size_t k = 1; k <= options.max_iters; ++k) {
        const Eigen::VectorXd next = dk.apply(Eigen::VectorXd(u.array().pow(q) * sigma.array())) + out.datum;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (next(i) < u(i) - kMonotoneSlack * std::abs(u(i)))
                ++out.monotonicity_violations;
        const double max_u = next.maxCoeff();
        const double change = (next - u).cwiseAbs().maxCoeff() / max_u;
        out.trace.iter.push_back(k);
        out.trace.sup_change.push_back(change);
        out.trace.max_u.push_back(max_u);
        u = next;
        out.iterations = k;
        if (!std::isfinite(max_u) || max_u > blowup) {
            out.status = PicardStatus::Diverged;
            out.u.values = u;
            out.u.kind = FieldKind::Supersolution;
            return out;
        }
        if (change < options.tol) {
            out.status = PicardStatus::Converged;
            out.u.values = u;
            out.u.kind = FieldKind::PicardLimit;
            return out;
        }
    }
    throw PicardNonConvergence("picard: no convergence after " + std::to_string(options.max_iters) + " iterations",
                               u.maxCoeff(), out.trace);
}

double harnack_check(const DiscreteKernel& dk, const Eigen::VectorXd& omega, double a)
{
    require(omega.size() == static_cast<Eigen::Index>(dk.size()), "harnack: size mismatch");
    require((omega.array() >= 0.0).all(), "harnack: omega must be non-negative");
    require((omega.array() > 0.0).any(), "harnack: omega must be non-zero");
    const Eigen::VectorXd g = dk.apply(omega);
    const Eigen::VectorXd m = build_m(dk, a).values;
    return (g.array() / m.array()).minCoeff();
}

LemRResult lem_r_check(const DiscreteKernel& dk, double s, const Eigen::VectorXd& sigma_weights)
{
    require(s > 1.0, "lem_r_check: s must be > 1");
    require(sigma_weights.size() == static_cast<Eigen::Index>(dk.size()), "lem_r_check: size mismatch");
    require((sigma_weights.array() >= 0.0).all(), "lem_r_check: weights must be non-negative");
    const Eigen::VectorXd g = dk.apply(sigma_weights);
    const Eigen::VectorXd inner = dk.apply(Eigen::VectorXd(g.array().pow(s - 1.0) * sigma_weights.array()));
    const Eigen::ArrayXd lhs = g.array().pow(s);
    LemRResult out;
    out.worst_slack = (s * inner.array() - lhs).minCoeff();
    out.scale = lhs.maxCoeff();
    return out;
}

WeightedNormResult weighted_norm_check(const DiscreteKernel& dk, double q, const Eigen::VectorXd& omega,
                                       std::size_t trials, std::uint64_t seed)
{
    require(q > 1.0, "q must be > 1");
    require(omega.size() == static_cast<Eigen::Index>(dk.size()), "weighted_norm_check: size mismatch");
    require((omega.array() >= 0.0).all() && (omega.array() > 0.0).any(),
            "weighted_norm_check: omega must be non-negative and non-zero");
    const Eigen::VectorXd sigma = sigma_vector(dk);
    const double s = q / (q - 1.0);

    WeightedNormResult out;
    const Eigen::VectorXd gw = dk.apply(omega);
    const Eigen::VectorXd lhs = dk.apply(Eigen::VectorXd(gw.array().pow(q) * sigma.array()));
    out.hypothesis_constant = (lhs.array() / gw.array()).maxCoeff();
    if (!std::isfinite(out.hypothesis_constant))
        throw PreconditionError("weighted_norm_check: G[(G omega)^q sigma] <= c G omega fails for every finite c");
    out.norm_bound = s * std::pow(out.hypothesis_constant, (s - 1.0) / s);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_entry(std::log(1e-6), std::log(1e6));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double densities[] = {1.0, 0.1, 0.01};
    const auto n = static_cast<Eigen::Index>(dk.size());
    auto draw = [&]() {
        const double keep = densities[static_cast<std::size_t>(unit(rng) * 3.0) % 3];
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (unit(rng) < keep)
                v(i) = std::exp(log_entry(rng));
        if (!(v.array() > 0.0).any())
            v(static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n)) % n) = 1.0;
        return v;
    };
    auto norm = [](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double p) {
        return std::pow((f.array().pow(p) * w.array()).sum(), 1.0 / p);
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const Eigen::VectorXd f = draw();
        const double fs = norm(f, sigma, s);
        if (fs > 0.0) {
            const double r = norm(dk.apply(Eigen::VectorXd(f.array() * sigma.array())), omega, s) / fs;
            out.worst_ratio_sigma = std::max(out.worst_ratio_sigma, r);
            if (r > out.norm_bound * (1.0 + 1e-8))
                ++out.violations;
        }
        const Eigen::VectorXd g = draw();
        const double gq = norm(g, omega, q);
        if (gq > 0.0) {
            const double r = norm(dk.apply(Eigen::VectorXd(g.array() * omega.array())), sigma, q) / gq;
            out.worst_ratio_omega = std::max(out.worst_ratio_omega, r);
            if (r > out.norm_bound * (1.0 + 1e-8))
                ++out.violations;
        }
        ++out.trials;
    }
    return out;
}

void MoserConstants::write_csv(const std::string& path) const
{
    auto out = open_csv(path);
    out << "j,partial\n";
    for (std::size_t j = 0; j < partial.size(); ++j)
        out << j + 1 << ',' << format_number(partial[j]) << '\n';
}

MoserConstants moser_constants(double q, std::size_t j_max)
{
    require(q > 1.0, "moser: q must be > 1");
    require(j_max >= 2, "moser: j_max must be at least 2");
    MoserConstants out;
    out.q = q;
    out.j_max = j_max;
    const double lq = std::log(q);
    double log_partial = 0.0;
    out.partial.push_back(1.0);
    for (std::size_t j = 2; j <= j_max; ++j) {
        const auto k = static_cast<double>(j - 1);
        // ln(1 + q + ... + q^k) = (k+1) ln q + ln(1 - q^{-(k+1)}) - ln(q - 1)
        const double log_sum = (k + 1.0) * lq + std::log1p(-std::exp(-(k + 1.0) * lq)) - std::log(q - 1.0);
        log_partial -= std::exp(-(1.0 + k) * lq) * log_sum;
        out.partial.push_back(std::exp(log_partial));
    }
    out.limit_estimate = out.partial.back();
    const double log_bound = lq / ((q - 1.0) * (q - 1.0)) + std::log(q / (q - 1.0)) / (q * (q - 1.0));
    out.lower_bound = std::exp(-log_bound);
    return out;
}

LevelSetBoundResult level_set_bound_check(const DiscreteKernel& dk, double q, double a,
                                          const std::vector<double>& r_grid)
{
    const auto rep = eval_cond_m(dk, q, a);
    if (rep.verdict != Verdict::Bounded)
        throw PreconditionError("level_set_bound_check: cond-m is " + to_string(rep.verdict));
    LevelSetBoundResult out;
    out.constant = rep.constant_estimate;
    const double cq = moser_constants(q, 200).limit_estimate;
    // Iterating (G sigma_A)^{1+q+..+q^{j-1}} <= C^{1+q+..+q^{j-1}} r^{q^j} m / c(j,q) and taking
    // q^-j-th roots gives G sigma_A <= C r^{q-1} / c(q)^{q-1}.
    out.predicted_c = out.constant / std::pow(cq, q - 1.0);

    const Eigen::VectorXd m = build_m(dk, a).values;
    const auto n = static_cast<Eigen::Index>(dk.size());
    for (double r : r_grid) {
        require(r >= a, "level_set_bound_check: need r >= a");
        Eigen::VectorXd sa = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j)
            if (dk.diagonal()[static_cast<std::size_t>(j)] >= 1.0 / r)
                sa(j) = dk.weight_sigma()[static_cast<std::size_t>(j)];
        const Eigen::VectorXd p = dk.apply(sa);
        const double gp = out.constant * std::pow(r, q);
        const double rq1 = std::pow(r, q - 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p(i) > gp * m(i) * (1.0 + 1e-10))
                ++out.gp_violations;
            if (p(i) > out.predicted_c * rq1 * (1.0 + 1e-10))
                ++out.ap_violations;
        }
        out.observed_c = std::max(out.observed_c, p.maxCoeff() / rq1);
        if (!lem_r_check(dk, 1.0 + q, sa).holds())
            ++out.lem_r_violations;
    }
    if (!std::isfinite(out.observed_c))
        out.observed_c = kInf;
    return out;
}

} // namespace greencrit
