#include "greencrit/cli.hpp"

#include "greencrit/error.hpp"
#include "greencrit/solver.hpp"
#include "greencrit/util.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace greencrit {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::string output_path(const RunConfig& c, const std::string& suffix)
{
    std::filesystem::create_directories(c.output_dir);
    return (std::filesystem::path(c.output_dir) / (c.prefix + suffix)).string();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write '" + path + "'");
    f << text;
}

std::string samples_csv(const std::vector<std::pair<std::string, const CriterionReport*>>& reports)
{
    std::ostringstream os;
    os << "criterion,r,value\n";
    for (const auto& [name, rep] : reports)
        for (const auto& [r, v] : rep->samples)
            os << csv_field(name) << ',' << format_number(r) << ',' << format_number(v) << '\n';
    return os.str();
}

bool selected(const RunConfig& c, const std::string& name)
{
    for (const auto& s : c.suite)
        if (s == "full" || s == name)
            return true;
    return false;
}

std::string num(double x) { return format_number(x); }

double resolve_a(const RunConfig& c, const GreenRadialKernel& kernel)
{
    return c.a > 0.0 ? c.a : default_a(kernel, c.r0);
}

} // namespace

int exit_code(Verdict v)
{
    if (is_positive(v))
        return kExitPositive;
    if (is_negative(v))
        return kExitNegative;
    return kExitInconclusive;
}

int cmd_report(const RunConfig& c, std::ostream& out)
{
    const auto params = c.criterion_params();
    std::ostringstream text;
    Verdict verdict = Verdict::Inconclusive;
    if (c.criterion == "main" || c.criterion == "thm3") {
        const auto joint = evaluate_joint(c.criterion, params, c.q);
        verdict = joint.verdict;
        text << "joint = " << joint.name << "\nverdict = " << to_string(joint.verdict) << "\n\n"
             << joint.first.to_text() << '\n'
             << joint.second.to_text();
        write_file(output_path(c, "_integrand.csv"),
                   samples_csv({{to_string(joint.first.criterion_id), &joint.first},
                                {to_string(joint.second.criterion_id), &joint.second}}));
    } else {
        const auto rep = evaluate_criterion(parse_criterion_id(c.criterion), params, c.q);
        verdict = rep.verdict;
        text << rep.to_text();
        write_file(output_path(c, "_integrand.csv"), samples_csv({{to_string(rep.criterion_id), &rep}}));
    }
    write_file(output_path(c, "_report.txt"), text.str() + "\n[config]\n" + c.to_text());
    out << text.str();
    return exit_code(verdict);
}

int cmd_scan(const RunConfig& c, std::ostream& out)
{
    const auto params = c.criterion_params();
    const auto scan = critical_exponent([&](double q) { return scan_verdict(c.criterion, params, q); }, c.q_lo,
                                        c.q_hi, c.tol, c.scan_points);
    std::ostringstream csv;
    csv << "q,verdict\n";
    for (const auto& [q, v] : scan.verdict_map)
        csv << format_number(q) << ',' << to_string(v) << '\n';
    write_file(output_path(c, "_scan.csv"), csv.str());
    std::ostringstream text;
    text << "criterion = " << c.criterion << "\nq_lo = " << num(scan.q_lo) << "\nq_hi = " << num(scan.q_hi)
         << "\nq_critical = " << num(scan.q_critical) << "\nevaluations = " << scan.verdict_map.size()
         << "\ninconclusive = " << scan.inconclusive << '\n';
    write_file(output_path(c, "_scan.txt"), text.str() + "\n[config]\n" + c.to_text());
    out << text.str();
    return kExitPositive;
}

int cmd_solve(const RunConfig& c, std::ostream& out)
{
    const auto params = c.criterion_params();
    const GreenRadialKernel kernel(params.volume, params.kernel);
    const auto dk = discretize(kernel, params.measure, c.grid);
    const double a = resolve_a(c, kernel);
    EpsilonSolution eps;
    try {
        eps = epsilon_solution(dk, c.q, a);
    } catch (const ConstructionRefused& e) {
        out << "construction refused: " << e.what() << '\n';
        return kExitNegative;
    }
    const auto h = picard_datum(dk, c.q, a);
    PicardOptions options;
    options.max_iters = c.max_iters;
    options.tol = c.picard_tol;
    PicardResult pr;
    try {
        pr = picard_iterate(dk, c.q, h.values, options);
    } catch (const PicardNonConvergence& e) {
        e.trace.write_csv(output_path(c, "_trace.csv"));
        out << e.what() << '\n';
        return kExitPicardDiverged;
    }
    pr.trace.write_csv(output_path(c, "_trace.csv"));
    if (pr.status == PicardStatus::Diverged) {
        out << "picard iteration diverged after " << pr.iterations << " iterations\n";
        return kExitPicardDiverged;
    }
    const Eigen::VectorXd& u = pr.u.values;
    const double residual = check_supersolution(dk, u, c.q);
    const double tol = supersolution_tolerance(u);

    std::ostringstream csv;
    csv << "rho,u,u_epsilon\n";
    for (std::size_t i = 0; i < dk.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        csv << format_number(dk.radii()[i]) << ',' << format_number(u(k)) << ','
            << format_number(eps.field.values(k)) << '\n';
    }
    write_file(output_path(c, "_solution.csv"), csv.str());

    std::ostringstream text;
    text << "a = " << num(a) << "\ncond_m_constant = " << num(eps.constant) << "\nepsilon = " << num(eps.epsilon)
         << "\nepsilon_residual = " << num(eps.residual) << "\nepsilon_certified = " << (eps.certified ? 1 : 0)
         << "\npicard_delta = " << num(pr.delta) << "\npicard_iterations = " << pr.iterations
         << "\nmonotonicity_violations = " << pr.monotonicity_violations << "\nresidual = " << num(residual)
         << "\ntolerance = " << num(tol) << "\nmax_u = " << num(u.maxCoeff()) << "\nmin_u = " << num(u.minCoeff())
         << '\n';
    write_file(output_path(c, "_solve.txt"), text.str() + "\n[config]\n" + c.to_text());
    out << text.str();
    return residual >= -tol ? kExitPositive : kExitNegative;
}

std::vector<CheckLine> run_verify_suite(const RunConfig& c)
{
    std::vector<CheckLine> lines;
    auto guarded = [&lines](const std::string& name, const std::function<CheckLine()>& fn) {
        try {
            lines.push_back(fn());
        } catch (const Error& e) {
            lines.push_back({name, false, e.what()});
        }
    };

    const auto params = c.criterion_params();
    const GreenRadialKernel kernel(params.volume, params.kernel);
    auto dk = discretize(kernel, params.measure, c.grid);
    if (c.corrupt == "symmetry")
        dk = dk.with_entry(1, 0, 1.5 * dk.matrix()(1, 0));
    const double a = resolve_a(c, kernel);
    const Eigen::VectorXd sw = Eigen::Map<const Eigen::VectorXd>(dk.weight_sigma().data(),
                                                                 static_cast<Eigen::Index>(dk.size()));

    if (selected(c, "kernel")) {
        lines.push_back({"symmetry", dk.is_symmetric(), "N = " + std::to_string(dk.size())});
        lines.push_back({"row-monotonicity", dk.rows_monotone(), ""});
    }
    if (selected(c, "lem-r")) {
        for (double s : c.lem_r_s)
            guarded("lem-r s=" + num(s), [&] {
                const auto r = lem_r_check(dk, s, sw);
                return CheckLine{"lem-r s=" + num(s), r.holds(),
                                 "worst_slack = " + num(r.worst_slack) + ", scale = " + num(r.scale)};
            });
    }
    if (selected(c, "weighted-norm")) {
        guarded("weighted-norm", [&] {
            const Eigen::VectorXd omega = build_m(dk, a).values.array().pow(c.q) * sw.array();
            const auto w = weighted_norm_check(dk, c.q, omega, c.trials, c.seed);
            return CheckLine{"weighted-norm", w.violations == 0,
                             "trials = " + std::to_string(w.trials) + ", violations = " + std::to_string(w.violations) +
                                 ", worst_ratio = " + num(std::max(w.worst_ratio_sigma, w.worst_ratio_omega)) +
                                 ", bound = " + num(w.norm_bound)};
        });
    }
    if (selected(c, "harnack")) {
        guarded("harnack", [&] {
            std::size_t shell = c.harnack_shell;
            if (shell == 0) {
                double best = kInfinity;
                for (std::size_t i = 0; i < dk.size(); ++i) {
                    const double d = std::abs(std::log(dk.radii()[i] / c.r0));
                    if (d < best) {
                        best = d;
                        shell = i;
                    }
                }
            }
            if (shell >= dk.size())
                throw PreconditionError("harnack shell index out of range");
            Eigen::VectorXd omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dk.size()));
            omega(static_cast<Eigen::Index>(shell)) = 1.0;
            const double low = harnack_check(dk, omega, a);
            return CheckLine{"harnack", low > 0.0 && std::isfinite(low),
                             "shell = " + std::to_string(shell) + ", c_low = " + num(low)};
        });
    }
    if (selected(c, "level-set")) {
        guarded("level-set", [&] {
            std::vector<double> radii;
            for (double r : c.level_radii)
                if (r >= a)
                    radii.push_back(r);
            if (radii.empty())
                throw PreconditionError("no level radius r >= a = " + num(a));
            const auto ls = level_set_bound_check(dk, c.q, a, radii);
            const std::size_t bad = ls.gp_violations + ls.ap_violations + ls.lem_r_violations;
            return CheckLine{"level-set", bad == 0,
                             "radii = " + std::to_string(radii.size()) + ", C = " + num(ls.constant) +
                                 ", observed_c = " + num(ls.observed_c) + ", predicted_c = " + num(ls.predicted_c) +
                                 ", violations = " + std::to_string(bad)};
        });
    }
    if (selected(c, "moser")) {
        for (double q : c.moser_q)
            guarded("moser q=" + num(q), [&] {
                const auto m = moser_constants(q, c.moser_j);
                const double step = std::abs(m.partial[c.moser_j - 1] - m.partial[c.moser_j - 2]);
                return CheckLine{"moser q=" + num(q), step < 1e-8 && m.limit_estimate >= m.lower_bound,
                                 "limit_estimate = " + num(m.limit_estimate) +
                                     ", lower_bound = " + num(m.lower_bound) + ", last_step = " + num(step)};
            });
    }
    if (selected(c, "hardy")) {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> log_r(std::log(1e-2), std::log(1e2));
        for (double s : c.hardy_s)
            guarded("hardy s=" + num(s), [&] {
                std::size_t bad = 0;
                double worst = 0.0;
                for (std::size_t t = 0; t < c.hardy_trials; ++t) {
                    const auto phi = random_step_function(rng);
                    const auto h = hardy_check(phi, s, std::exp(log_r(rng)));
                    if (!h.holds())
                        ++bad;
                    if (h.rhs > 0.0)
                        worst = std::max(worst, h.lhs / h.rhs);
                }
                return CheckLine{"hardy s=" + num(s), bad == 0,
                                 "trials = " + std::to_string(c.hardy_trials) + ", violations = " +
                                     std::to_string(bad) + ", worst_ratio = " + num(worst) +
                                     ", C = " + num(hardy_constant(s))};
            });
    }
    if (selected(c, "3g")) {
        guarded("3g inverse_r", [&] {
            const auto m = build_quasi_metric_inverse_r(kernel);
            return CheckLine{"3g inverse_r", std::isfinite(m.kappa) && m.kappa <= m.kappa_bound * (1.0 + 1e-12),
                             "kappa = " + num(m.kappa) + ", doubling_bound = " + num(m.kappa_bound)};
        });
        if (params.metric && params.metric->kind == MetricKind::Snowflake)
            lines.push_back({"3g snowflake", params.metric->violations == 0,
                             "samples = " + std::to_string(params.metric->samples) +
                                 ", violations = " + std::to_string(params.metric->violations)});
    }
    return lines;
}

int cmd_verify(const RunConfig& c, std::ostream& out)
{
    const auto lines = run_verify_suite(c);
    std::ostringstream text;
    bool all = true;
    for (const auto& l : lines) {
        all = all && l.pass;
        text << (l.pass ? "PASS " : "FAIL ") << l.name;
        if (!l.detail.empty())
            text << ": " << l.detail;
        text << '\n';
    }
    write_file(output_path(c, "_verify.txt"), text.str() + "\n[config]\n" + c.to_text());
    out << text.str();
    return all ? kExitPositive : kExitNegative;
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        if (command == "report")
            return cmd_report(config, out);
        if (command == "scan")
            return cmd_scan(config, out);
        if (command == "solve")
            return cmd_solve(config, out);
        if (command == "verify")
            return cmd_verify(config, out);
        err << "unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const BracketError& e) {
        err << "bracket error: " << e.what() << '\n';
        return kExitBracket;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace greencrit
