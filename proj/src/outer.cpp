#include "gnep/outer.hpp"

#include "gnep/diagnostics.hpp"
#include "gnep/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnep {

InnerTolerance InnerTolerance::fixed(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("InnerTolerance: value must be > 0");
    InnerTolerance t;
    t.start_ = value;
    t.factor_ = 1.0;
    t.floor_ = value;
    return t;
}

InnerTolerance InnerTolerance::geometric(double start, double factor, double floor) {
    if (!(start > 0.0 && factor > 0.0 && factor <= 1.0 && floor > 0.0 && floor <= start))
        throw std::invalid_argument("InnerTolerance: need start >= floor > 0 and factor in (0, 1]");
    InnerTolerance t;
    t.start_ = start;
    t.factor_ = factor;
    t.floor_ = floor;
    return t;
}

double InnerTolerance::at(int k) const {
    return std::max(floor_, start_ * std::pow(factor_, static_cast<double>(k)));
}

const char* to_string(Status status) {
    switch (status) {
        case Status::SolvedKKT: return "SolvedKKT";
        case Status::InfeasibleStationary: return "InfeasibleStationary";
        case Status::MaxOuterIterations: return "MaxOuterIterations";
        case Status::SubsolverFailure: return "SubsolverFailure";
    }
    return "?";
}

InnerSolveResult LmInnerSolver::solve(const GnepProblem& problem, const Vector& x_start,
                                      const PenaltyState& state, double tol) const {
    LmConfig cfg = cfg_;
    cfg.eps = tol;
    const KinkRule rule = rule_;
    LmSystem system{
        [&](const Vector& x) { return assemble_F(problem, x, state); },
        [&](const Vector& x) { return generalized_jacobian(problem, x, state, rule); }};
    LmResult lm = lm_solve(system, x_start, cfg);
    InnerSolveResult out;
    out.x = std::move(lm.x);
    out.mu.assign(problem.num_players(), Vector(0));
    out.iterations = lm.iterations;
    out.status = lm.status;
    out.residual = lm.final_residual;
    out.log = std::move(lm.log);
    return out;
}

MultiplierSet initial_multipliers(const GnepProblem& problem, const Vector& x0, bool shared) {
    MultiplierSet out = MultiplierSet::zeros(problem, shared);
    const std::size_t groups = shared ? 1 : problem.num_players();
    for (std::size_t grp = 0; grp < groups; ++grp) {
        const std::size_t m = problem.g_count(grp);
        if (m == 0) continue;
        const Vector gval = problem.g(grp, x0);
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < gval.size(); ++i)
            if (!(gval[i] < 0.0)) active.push_back(i);
        if (active.empty()) continue;

        // Rows: own-block stationarity of this player, or of every player
        // stacked when the multiplier is shared.
        std::vector<std::size_t> players;
        if (shared) {
            for (std::size_t v = 0; v < problem.num_players(); ++v) players.push_back(v);
        } else {
            players.push_back(grp);
        }
        Eigen::Index rows = 0;
        for (std::size_t v : players) rows += static_cast<Eigen::Index>(problem.dim(v));
        Matrix A(rows, static_cast<Eigen::Index>(active.size()));
        Vector b(rows);
        Eigen::Index r = 0;
        for (std::size_t v : players) {
            const auto nv = static_cast<Eigen::Index>(problem.dim(v));
            const Matrix grads = problem.own_rows(v, problem.g_gradients(v, x0));
            for (std::size_t k = 0; k < active.size(); ++k)
                A.block(r, static_cast<Eigen::Index>(k), nv, 1) = grads.col(active[k]);
            b.segment(r, nv) = -problem.grad_theta(v, x0);
            r += nv;
        }
        const Vector fit = nnls(A, b);
        Vector lambda = Vector::Zero(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < active.size(); ++k) lambda[active[k]] = fit[static_cast<Eigen::Index>(k)];
        out.lambda[grp] = lambda;
    }
    return out;
}

PerPlayer<Vector> update_multipliers(const GnepProblem& problem, const Vector& x_next,
                                     const PenaltyState& state) {
    const std::size_t players = problem.num_players();
    if (state.shared()) {
        return PerPlayer<Vector>(players, shifted_multiplier(problem.g(0, x_next), state.u(0), state.rho(0)),
                                 true);
    }
    std::vector<Vector> lambda;
    for (std::size_t v = 0; v < players; ++v)
        lambda.push_back(shifted_multiplier(problem.g(v, x_next), state.u(v), state.rho(v)));
    return PerPlayer<Vector>::separate(std::move(lambda));
}

PerPlayer<double> update_penalty(const PerPlayer<double>& vmeasure_new,
                                 const PerPlayer<double>& vmeasure_old,
                                 const std::vector<double>& tau, const std::vector<double>& gamma,
                                 const PerPlayer<double>& rho) {
    const std::size_t stored = rho.storage().size();
    if (vmeasure_new.storage().size() != stored || vmeasure_old.storage().size() != stored ||
        tau.size() != stored || gamma.size() != stored)
        throw std::invalid_argument("update_penalty: inconsistent layouts");
    std::vector<double> next(stored);
    for (std::size_t i = 0; i < stored; ++i) {
        const bool progress = vmeasure_new.storage()[i] <= tau[i] * vmeasure_old.storage()[i];
        next[i] = progress ? rho.storage()[i] : gamma[i] * rho.storage()[i];
    }
    if (rho.shared()) return PerPlayer<double>(rho.size(), next.front(), true);
    return PerPlayer<double>::separate(std::move(next));
}

Vector update_safeguard(const Vector& lambda, double u_max) {
    return lambda.cwiseMin(u_max).cwiseMax(0.0);
}

PerPlayer<double> progress_measure(const GnepProblem& problem, const Vector& x,
                                   const PerPlayer<Vector>& lambda) {
    auto measure = [&](std::size_t v) {
        if (problem.g_count(v) == 0) return 0.0;
        return (-problem.g(v, x)).cwiseMin(lambda[v]).norm();
    };
    if (lambda.shared()) return PerPlayer<double>(lambda.size(), measure(0), true);
    std::vector<double> out;
    for (std::size_t v = 0; v < lambda.size(); ++v) out.push_back(measure(v));
    return PerPlayer<double>::separate(std::move(out));
}

Residuals stopping_residuals(const GnepProblem& problem, const Vector& x,
                             const MultiplierSet& multipliers) {
    Residuals r;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        const Vector& lambda = multipliers.lambda[v];
        const Vector& mu = multipliers.mu[v];
        Vector stat = problem.grad_theta(v, x);
        if (problem.g_count(v) > 0) {
            const Vector gv = problem.g(v, x);
            stat += problem.own_rows(v, problem.g_gradients(v, x)) * lambda;
            r.feasibility = std::max(r.feasibility, gv.cwiseMax(0.0).maxCoeff());
            double comp = gv.dot(lambda);
            if (problem.h_count(v) > 0) comp += problem.h(v, x).dot(mu);
            r.complementarity = std::max(r.complementarity, std::abs(comp));
        } else if (problem.h_count(v) > 0) {
            r.complementarity = std::max(r.complementarity, std::abs(problem.h(v, x).dot(mu)));
        }
        if (problem.h_count(v) > 0) {
            stat += problem.own_rows(v, problem.h_gradients(v, x)) * mu;
            r.feasibility = std::max(r.feasibility, problem.h(v, x).cwiseMax(0.0).maxCoeff());
        }
        r.optimality = std::max(r.optimality, stat.cwiseAbs().maxCoeff());
    }
    return r;
}

namespace {

std::vector<double> resolve(const std::vector<double>& given, double small, double large,
                            const GnepProblem& problem, Mode mode, const char* what) {
    const std::size_t stored = mode == Mode::Variational ? 1 : problem.num_players();
    if (given.empty()) return std::vector<double>(stored, problem.dim() <= 100 ? small : large);
    if (given.size() == 1) return std::vector<double>(stored, given.front());
    if (mode == Mode::Variational)
        throw std::invalid_argument(std::string(what) + ": variational mode takes a single value");
    if (given.size() != stored)
        throw std::invalid_argument(std::string(what) + ": expected one value per player");
    return given;
}

void validate(const OuterConfig& cfg, const std::vector<double>& tau,
              const std::vector<double>& gamma) {
    if (!(cfg.u_max >= 0.0)) throw std::invalid_argument("OuterConfig: u_max must be >= 0");
    if (!(cfg.rho0 > 0.0)) throw std::invalid_argument("OuterConfig: rho0 must be > 0");
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("OuterConfig: eps must be > 0");
    if (cfg.max_outer < 0) throw std::invalid_argument("OuterConfig: max_outer must be >= 0");
    for (double t : tau)
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("OuterConfig: tau must lie in (0,1)");
    for (double g : gamma)
        if (!(g > 1.0)) throw std::invalid_argument("OuterConfig: gamma must be > 1");
    cfg.lm.validate();
}

// Relative decrease of R_f over the last `window` records is below `rel`.
bool feasibility_stalled(const std::vector<IterationRecord>& trace, int window, double rel) {
    if (window < 1 || trace.size() <= static_cast<std::size_t>(window)) return false;
    const double now = trace.back().residuals.feasibility;
    const double before = trace[trace.size() - 1 - static_cast<std::size_t>(window)].residuals.feasibility;
    if (!(before > 0.0)) return false;
    return (before - now) / before < rel;
}

bool feasibility_stationary(const GnepProblem& problem, const Vector& x,
                            const MultiplierSet& multipliers, double eps_feas) {
    std::vector<Vector> mu_hat;
    for (std::size_t v = 0; v < problem.num_players(); ++v) mu_hat.push_back(multipliers.mu[v]);
    const auto res = feasibility_gnep_residual(problem, x, mu_hat);
    return *std::max_element(res.begin(), res.end()) <= eps_feas;
}

TerminationReport run_alm(const GnepProblem& input, const Vector& x0, const OuterConfig& cfg,
                          const InnerSolver* inner, bool shared) {
    const std::vector<double> tau = resolve(cfg.tau, 0.1, 0.5, input, cfg.mode, "tau");
    const std::vector<double> gamma = resolve(cfg.gamma, 10.0, 2.0, input, cfg.mode, "gamma");
    validate(cfg, tau, gamma);
    if (static_cast<std::size_t>(x0.size()) != input.dim())
        throw std::invalid_argument("solve: x0 length does not match problem dimension");
    if (!x0.allFinite()) throw std::invalid_argument("solve: x0 must be finite");
    if (cfg.penalization == Penalization::Partial && inner == nullptr)
        throw std::invalid_argument(
            "solve: partial penalization needs a constrained subproblem solver");

    const GnepProblem problem =
        (cfg.penalization == Penalization::Full && input.has_h()) ? fold_h_into_g(input) : input;
    const LmInnerSolver default_inner(cfg.lm, cfg.kink_rule);
    const InnerSolver& subsolver = inner != nullptr ? *inner : default_inner;

    const std::size_t stored = shared ? 1 : problem.num_players();
    PenaltyState state(problem, cfg.u_max, cfg.rho0, shared);
    MultiplierSet multipliers = initial_multipliers(problem, x0, shared);
    for (std::size_t grp = 0; grp < stored; ++grp)
        state.set_u(grp, update_safeguard(multipliers.lambda[grp], cfg.u_max));

    Vector x = x0;
    PerPlayer<double> vmeasure = progress_measure(problem, x, multipliers.lambda);

    TerminationReport report;
    report.shared_multipliers = shared;
    int i_total = 0;
    int inner_iters = 0;
    LmStatus inner_status = LmStatus::Converged;
    std::vector<LmIteration> lm_log;

    auto finish = [&](Status status) {
        const IterationRecord& last = report.trace.back();
        report.status = status;
        report.x = last.x;
        report.multipliers = last.multipliers;
        report.residuals = last.residuals;
        report.rho_max = 0.0;
        for (double r : last.rho.storage()) report.rho_max = std::max(report.rho_max, r);
        report.k = last.k;
        report.i_total = last.i_total;
        return report;
    };

    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.x = x;
        rec.multipliers = multipliers;
        rec.u = state.u_all();
        rec.rho = state.rho_all();
        rec.inner_iters = inner_iters;
        rec.i_total = i_total;
        rec.inner_status = inner_status;
        rec.residuals = stopping_residuals(problem, x, multipliers);
        rec.vmeasure = vmeasure;
        rec.lm_log = std::move(lm_log);
        report.trace.push_back(std::move(rec));
        const Residuals& res = report.trace.back().residuals;

        // (S.1)
        if (res.all_below(cfg.eps)) return finish(Status::SolvedKKT);
        const bool infeasible = res.feasibility > cfg.eps;
        if (k >= cfg.max_outer) {
            if (infeasible && feasibility_stationary(problem, x, multipliers, cfg.eps_feas))
                return finish(Status::InfeasibleStationary);
            return finish(Status::MaxOuterIterations);
        }
        if (infeasible && state.rho_max() > cfg.rho_stall &&
            feasibility_stalled(report.trace, cfg.stall_window, cfg.stall_rel_decrease) &&
            feasibility_stationary(problem, x, multipliers, cfg.eps_feas))
            return finish(Status::InfeasibleStationary);

        // (S.2)
        const double tol = cfg.eps_inner.at(k);
        InnerSolveResult sub = subsolver.solve(problem, x, state, tol);
        if (sub.status != LmStatus::Converged && !(sub.residual <= cfg.soft_accept_factor * tol))
            return finish(Status::SubsolverFailure);
        if (!sub.x.allFinite()) return finish(Status::SubsolverFailure);
        i_total += sub.iterations;
        inner_iters = sub.iterations;
        inner_status = sub.status;
        lm_log = std::move(sub.log);
        x = std::move(sub.x);
        if (sub.mu.size() == problem.num_players()) {
            for (std::size_t v = 0; v < problem.num_players(); ++v)
                if (sub.mu[v].size() == multipliers.mu[v].size()) multipliers.mu[v] = sub.mu[v];
        }

        // (S.3)
        multipliers.lambda = update_multipliers(problem, x, state);
        // (S.4)
        PerPlayer<double> vmeasure_next = progress_measure(problem, x, multipliers.lambda);
        const PerPlayer<double> rho_next =
            update_penalty(vmeasure_next, vmeasure, tau, gamma, state.rho_all());
        vmeasure = std::move(vmeasure_next);
        // (S.5)
        for (std::size_t grp = 0; grp < stored; ++grp) {
            state.set_u(grp, update_safeguard(multipliers.lambda[grp], cfg.u_max));
            state.set_rho(grp, rho_next[grp]);
        }
    }
}

}  // namespace

std::vector<double> resolve_tau(const OuterConfig& cfg, const GnepProblem& problem) {
    return resolve(cfg.tau, 0.1, 0.5, problem, cfg.mode, "tau");
}

std::vector<double> resolve_gamma(const OuterConfig& cfg, const GnepProblem& problem) {
    return resolve(cfg.gamma, 10.0, 2.0, problem, cfg.mode, "gamma");
}

TerminationReport solve(const GnepProblem& problem, const Vector& x0, const OuterConfig& cfg,
                        const InnerSolver* inner) {
    if (cfg.mode != Mode::General)
        throw std::invalid_argument("solve: configuration mode must be General");
    return run_alm(problem, x0, cfg, inner, false);
}

TerminationReport solve_variational(const GnepProblem& problem, const Vector& x0,
                                    const OuterConfig& cfg, const InnerSolver* inner) {
    if (!problem.shared_constraints())
        throw std::invalid_argument("solve_variational: problem does not declare shared constraints");
    if (cfg.mode != Mode::Variational)
        throw std::invalid_argument("solve_variational: configuration mode must be Variational");
    return run_alm(problem, x0, cfg, inner, true);
}

}  // namespace gnep
