#pragma once

#include "gnep/alcore.hpp"
#include "gnep/model.hpp"
#include "gnep/subsolver.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gnep {

enum class Mode { General, Variational };

/// Inner tolerance eps_k: either constant or start * factor^k, bounded
/// below by floor.
class InnerTolerance {
public:
    static InnerTolerance fixed(double value);
    static InnerTolerance geometric(double start, double factor, double floor);

    double at(int k) const;

private:
    double start_ = 1e-8;
    double factor_ = 1.0;
    double floor_ = 1e-8;
};

enum class Penalization {
    Full,    // h is folded into g and the subproblems are unconstrained
    Partial  // h stays in the subproblem; needs a user-supplied InnerSolver
};

struct OuterConfig {
    double u_max = 1e6;
    double rho0 = 1.0;
    /// Per-player (or one broadcast value). Empty selects 0.1/10 for n <= 100
    /// and 0.5/2 otherwise. Variational mode accepts a single value only.
    std::vector<double> tau;
    std::vector<double> gamma;
    double eps = 1e-8;
    InnerTolerance eps_inner = InnerTolerance::fixed(1e-8);
    int max_outer = 100;
    Mode mode = Mode::General;
    Penalization penalization = Penalization::Full;
    LmConfig lm;
    KinkRule kink_rule = KinkRule::TreatInactive;

    double eps_feas = 1e-6;         // Feasibility-GNEP residual threshold
    double rho_stall = 1e12;        // early infeasibility detection threshold
    int stall_window = 5;           // outer iterations of R_f history inspected
    double stall_rel_decrease = 1e-3;
    double soft_accept_factor = 1e3;  // accept SafeguardStop if ||F|| <= factor * eps_k
};

struct Residuals {
    double feasibility = 0.0;      // R_f
    double optimality = 0.0;       // R_o
    double complementarity = 0.0;  // R_c

    bool all_below(double eps) const {
        return feasibility <= eps && optimality <= eps && complementarity <= eps;
    }
};

struct IterationRecord {
    int k = 0;
    Vector x;
    MultiplierSet multipliers;
    PerPlayer<Vector> u;
    PerPlayer<double> rho;
    int inner_iters = 0;
    int i_total = 0;
    LmStatus inner_status = LmStatus::Converged;
    Residuals residuals;
    PerPlayer<double> vmeasure;
    std::vector<LmIteration> lm_log;  // inner iterations that produced x
};

enum class Status { SolvedKKT, InfeasibleStationary, MaxOuterIterations, SubsolverFailure };

const char* to_string(Status status);

struct TerminationReport {
    Status status = Status::MaxOuterIterations;
    Vector x;
    MultiplierSet multipliers;
    Residuals residuals;
    double rho_max = 0.0;
    int k = 0;
    int i_total = 0;
    bool shared_multipliers = false;
    std::vector<IterationRecord> trace;
};

struct InnerSolveResult {
    Vector x;
    std::vector<Vector> mu;  // per player, length p_nu (empty when p_nu = 0)
    int iterations = 0;
    LmStatus status = LmStatus::MaxIter;
    double residual = 0.0;
    std::vector<LmIteration> log;
};

/// Step (S.2): an approximate KKT point of the penalized game with fixed
/// (u, rho), to tolerance `tol`.
class InnerSolver {
public:
    virtual ~InnerSolver() = default;
    virtual InnerSolveResult solve(const GnepProblem& problem, const Vector& x_start,
                                   const PenaltyState& state, double tol) const = 0;
};

/// Full penalization: Levenberg-Marquardt on the stacked partial gradients.
class LmInnerSolver final : public InnerSolver {
public:
    LmInnerSolver(LmConfig cfg, KinkRule rule) : cfg_(cfg), rule_(rule) {}
    InnerSolveResult solve(const GnepProblem& problem, const Vector& x_start,
                           const PenaltyState& state, double tol) const override;

private:
    LmConfig cfg_;
    KinkRule rule_;
};

/// Least-squares initial multipliers: lambda_i = 0 where g_i(x0) < 0, the
/// rest from NNLS on the stationarity condition; mu = 0. With `shared`, a
/// single lambda is fitted to the stacked stationarity of all players.
MultiplierSet initial_multipliers(const GnepProblem& problem, const Vector& x0,
                                  bool shared = false);

/// lambda^nu = (u^nu + rho_nu g^nu(x))_+ (computed once when the state is shared).
PerPlayer<Vector> update_multipliers(const GnepProblem& problem, const Vector& x_next,
                                     const PenaltyState& state);

/// Per stored entry: keep rho where vmeasure_new <= tau * vmeasure_old,
/// else multiply by gamma. All arguments share one layout (shared or not);
/// tau/gamma are indexed by stored entry.
PerPlayer<double> update_penalty(const PerPlayer<double>& vmeasure_new,
                                 const PerPlayer<double>& vmeasure_old,
                                 const std::vector<double>& tau, const std::vector<double>& gamma,
                                 const PerPlayer<double>& rho);

/// min{lambda, u_max} componentwise.
Vector update_safeguard(const Vector& lambda, double u_max);

/// ||min{-g^nu(x), lambda^nu}||_2 in the layout of `lambda`.
PerPlayer<double> progress_measure(const GnepProblem& problem, const Vector& x,
                                   const PerPlayer<Vector>& lambda);

/// R_f, R_o and R_c as maxima over players. When a player has h, its terms
/// (h_+, grad h * mu, h^T mu) are included alongside those of g.
Residuals stopping_residuals(const GnepProblem& problem, const Vector& x,
                             const MultiplierSet& multipliers);

/// Resolved tau/gamma for a problem (size-dependent defaults, broadcast).
std::vector<double> resolve_tau(const OuterConfig& cfg, const GnepProblem& problem);
std::vector<double> resolve_gamma(const OuterConfig& cfg, const GnepProblem& problem);

/// General augmented Lagrangian method. `inner` may be null for full
/// penalization (the LM solver is used). Throws std::invalid_argument on
/// configuration errors; mathematical failures are reported in the status.
TerminationReport solve(const GnepProblem& problem, const Vector& x0, const OuterConfig& cfg,
                        const InnerSolver* inner = nullptr);

/// Variational-equilibrium variant: one shared (lambda, u, rho) for all
/// players. Requires shared constraints and cfg.mode == Variational.
TerminationReport solve_variational(const GnepProblem& problem, const Vector& x0,
                                    const OuterConfig& cfg, const InnerSolver* inner = nullptr);

}  // namespace gnep
