#pragma once

// Explicit solutions of u >= G(u^q sigma) on radial discrete kernels, and
// numerical checks of the constructive lemmas behind them.

#include "greencrit/error.hpp"
#include "greencrit/green.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace greencrit {

enum class FieldKind { EpsilonM, PicardLimit, Supersolution, Datum };

std::string to_string(FieldKind kind);

struct SolutionField
{
    Eigen::VectorXd values;
    FieldKind kind = FieldKind::Supersolution;
};

/// m_i = min(R(rho_i), 1/a).
SolutionField build_m(const DiscreteKernel& dk, double a);

/// C^{-1/(q-1)}, or 1 when C = 0.
double epsilon_from_constant(double c, double q);

/// min_i (u_i - sum_j G_ij u_j^q w_sigma_j), with the dense matrix.
double check_supersolution(const DiscreteKernel& dk, const Eigen::VectorXd& u, double q);

/// Tolerance used to certify a supersolution: 1e-8 max u.
double supersolution_tolerance(const Eigen::VectorXd& u);

struct EpsilonSolution
{
    SolutionField field;
    double epsilon = 0.0;
    double constant = 0.0;
    double residual = 0.0;
    bool certified = false;
};

/// u = eps m with eps = C^{-1/(q-1)} from cond-m. Throws ConstructionRefused
/// unless cond-m is Bounded.
EpsilonSolution epsilon_solution(const DiscreteKernel& dk, double q, double a);

/// h = eps' m with eps' = (C (q-1))^{-1/(q-1)}, so that G(h^q sigma) <= h / (q-1).
SolutionField picard_datum(const DiscreteKernel& dk, double q, double a);

struct IterationTrace
{
    std::vector<std::size_t> iter;
    std::vector<double> sup_change;
    std::vector<double> max_u;

    /// `iter,sup_change,max_u` rows.
    void write_csv(const std::string& path) const;
};

class PicardNonConvergence : public NumericalFailure
{
public:
    PicardNonConvergence(const std::string& what, double partial, IterationTrace trace)
        : NumericalFailure(what, partial), trace(std::move(trace))
    {
    }
    IterationTrace trace;
};

enum class PicardStatus { Converged, Diverged };

struct PicardOptions
{
    std::size_t max_iters = 10000;
    /// Relative sup-norm change that stops the iteration.
    double tol = 1e-12;
    /// Check G(h^q sigma) <= h/(q-1) and iterate with delta h, delta = ((q-1)/q)^{q/(q-1)}.
    bool safe_regime = true;
};

struct PicardResult
{
    SolutionField u;
    Eigen::VectorXd datum; ///< the datum actually added (delta h or h)
    IterationTrace trace;
    PicardStatus status = PicardStatus::Converged;
    std::size_t iterations = 0;
    /// Entries with u_{k+1} < u_k (1e-14 relative slack for rounding).
    std::size_t monotonicity_violations = 0;
    double delta = 1.0;
};

/// u_{k+1} = G(u_k^q sigma) + datum from u_0 = datum. Throws PicardNonConvergence
/// after max_iters; returns Diverged once max u exceeds 1e12 max h.
PicardResult picard_iterate(const DiscreteKernel& dk, double q, const Eigen::VectorXd& h,
                            const PicardOptions& options = {});

/// min_i (G omega)_i / m_i.
double harnack_check(const DiscreteKernel& dk, const Eigen::VectorXd& omega, double a);

struct LemRResult
{
    double worst_slack = 0.0; ///< min_i s G[(G sigma)^{s-1} sigma]_i - (G sigma)_i^s
    double scale = 0.0;       ///< max_i (G sigma)_i^s
    bool holds() const { return worst_slack >= -1e-10 * scale; }
};

LemRResult lem_r_check(const DiscreteKernel& dk, double s, const Eigen::VectorXd& sigma_weights);

struct WeightedNormResult
{
    double hypothesis_constant = 0.0; ///< c with G[(G omega)^q sigma] <= c G omega
    double norm_bound = 0.0;      ///< s c^{(s-1)/s}, s = q/(q-1)
    double worst_ratio_sigma = 0.0;   ///< ||G(f sigma)||_{L^s(omega)} / ||f||_{L^s(sigma)}
    double worst_ratio_omega = 0.0;   ///< ||G(g omega)||_{L^q(sigma)} / ||g||_{L^q(omega)}
    std::size_t trials = 0;
    std::size_t violations = 0;
};

/// Random non-negative f, g: log-uniform entries with random sparse masks.
WeightedNormResult weighted_norm_check(const DiscreteKernel& dk, double q, const Eigen::VectorXd& omega,
                                       std::size_t trials, std::uint64_t seed);

struct MoserConstants
{
    double q = 0.0;
    std::size_t j_max = 0;
    std::vector<double> partial; ///< partial[j-1] = c(j,q)^{q^{-j}}, j = 1..j_max
    double limit_estimate = 0.0;
    double lower_bound = 0.0; ///< 1 / (q^{(q-1)^-2} (q/(q-1))^{1/(q(q-1))})

    /// `j,partial` rows.
    void write_csv(const std::string& path) const;
};

MoserConstants moser_constants(double q, std::size_t j_max);

struct LevelSetBoundResult
{
    double constant = 0.0;           ///< C from cond-m
    double observed_c = 0.0;         ///< max over r, x of G sigma_A / r^{q-1}
    double predicted_c = 0.0;        ///< C / c(q)^{q-1}
    std::size_t gp_violations = 0;   ///< G sigma_A > C r^q m
    std::size_t ap_violations = 0;   ///< G sigma_A > predicted_c r^{q-1}
    std::size_t lem_r_violations = 0;
};

/// Checks G sigma_A <= C r^q m and G sigma_A <= c r^{q-1} on each level set A(o, r).
LevelSetBoundResult level_set_bound_check(const DiscreteKernel& dk, double q, double a,
                                          const std::vector<double>& r_grid);

} // namespace greencrit
