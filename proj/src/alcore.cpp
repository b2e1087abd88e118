#include "gnep/alcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnep {

PenaltyState::PenaltyState(const GnepProblem& problem, double u_max, double rho0, bool shared)
    : u_max_(u_max) {
    if (!(u_max >= 0.0)) throw std::invalid_argument("PenaltyState: u_max must be >= 0");
    if (!(rho0 > 0.0)) throw std::invalid_argument("PenaltyState: rho0 must be > 0");
    const std::size_t players = problem.num_players();
    if (shared) {
        if (!problem.shared_constraints())
            throw std::invalid_argument("PenaltyState: shared layout needs shared constraints");
        u_ = PerPlayer<Vector>(players, Vector::Zero(problem.g_count(0)), true);
        rho_ = PerPlayer<double>(players, rho0, true);
    } else {
        std::vector<Vector> u;
        for (std::size_t v = 0; v < players; ++v) u.push_back(Vector::Zero(problem.g_count(v)));
        u_ = PerPlayer<Vector>::separate(std::move(u));
        rho_ = PerPlayer<double>(players, rho0, false);
    }
}

void PenaltyState::set_u(std::size_t player, const Vector& u) {
    if (u.size() != u_[player].size()) throw std::invalid_argument("PenaltyState: u length mismatch");
    if (u.size() > 0 && (u.minCoeff() < 0.0 || u.maxCoeff() > u_max_ || !u.allFinite()))
        throw std::invalid_argument("PenaltyState: u must lie in [0, u_max]");
    u_[player] = u;
}

void PenaltyState::set_rho(std::size_t player, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("PenaltyState: rho must be positive and finite");
    rho_[player] = rho;
}

double PenaltyState::rho_max() const {
    double r = 0.0;
    for (double v : rho_.storage()) r = std::max(r, v);
    return r;
}

Vector shifted_multiplier(const Vector& g_val, const Vector& u, double rho) {
    if (g_val.size() != u.size()) throw std::invalid_argument("shifted_multiplier: length mismatch");
    if (!(rho > 0.0)) throw std::invalid_argument("shifted_multiplier: rho must be > 0");
    return (u + rho * g_val).cwiseMax(0.0);
}

double phr_penalty(const Vector& g_val, const Vector& u, double rho) {
    if (g_val.size() != u.size()) throw std::invalid_argument("phr_penalty: length mismatch");
    if (g_val.size() == 0) return 0.0;
    const Vector shifted = (g_val + u / rho).cwiseMax(0.0);
    return 0.5 * rho * shifted.squaredNorm();
}

double al_value(const GnepProblem& problem, std::size_t player, const Vector& x,
                const PenaltyState& state) {
    return problem.theta(player, x) + phr_penalty(problem.g(player, x), state.u(player), state.rho(player));
}

Vector al_gradient_block(const GnepProblem& problem, std::size_t player, const Vector& x,
                         const PenaltyState& state) {
    Vector grad = problem.grad_theta(player, x);
    if (problem.g_count(player) == 0) return grad;
    const Vector lambda = shifted_multiplier(problem.g(player, x), state.u(player), state.rho(player));
    grad += problem.own_rows(player, problem.g_gradients(player, x)) * lambda;
    return grad;
}

namespace {

void require_full_penalization(const GnepProblem& problem, const char* who) {
    if (problem.has_h())
        throw std::invalid_argument(std::string(who) +
                                    ": problem has unpenalized constraints (p_nu > 0); "
                                    "a constrained subproblem solver is required");
}

}  // namespace

Vector assemble_F(const GnepProblem& problem, const Vector& x, const PenaltyState& state) {
    require_full_penalization(problem, "assemble_F");
    Vector F(problem.dim());
    for (std::size_t v = 0; v < problem.num_players(); ++v)
        F.segment(problem.offset(v), problem.dim(v)) = al_gradient_block(problem, v, x, state);
    return F;
}

Matrix generalized_jacobian(const GnepProblem& problem, const Vector& x, const PenaltyState& state,
                            KinkRule rule) {
    require_full_penalization(problem, "generalized_jacobian");
    const auto n = static_cast<Eigen::Index>(problem.dim());
    Matrix V(n, n);
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        const auto off = static_cast<Eigen::Index>(problem.offset(v));
        const auto nv = static_cast<Eigen::Index>(problem.dim(v));
        Matrix block = problem.hess_theta_rows(v, x);
        if (problem.g_count(v) > 0) {
            const Vector gv = problem.g(v, x);
            const Matrix grads = problem.g_gradients(v, x);
            const std::vector<Matrix> hess = problem.g_hessian_rows(v, x);
            const Vector& u = state.u(v);
            const double rho = state.rho(v);
            for (Eigen::Index i = 0; i < gv.size(); ++i) {
                const double shifted = u[i] + rho * gv[i];
                const bool active =
                    shifted > 0.0 || (shifted == 0.0 && rule == KinkRule::TreatActive);
                if (active)
                    block += rho * grads.col(i).segment(off, nv) * grads.col(i).transpose();
                if (shifted > 0.0) block += shifted * hess[static_cast<std::size_t>(i)];
            }
        }
        V.middleRows(off, nv) = block;
    }
    return V;
}

double shared_penalty_term(const GnepProblem& problem, const Vector& x, const PenaltyState& state) {
    if (!problem.shared_constraints())
        throw std::invalid_argument("shared_penalty_term: problem does not declare shared constraints");
    if (!state.shared()) throw std::invalid_argument("shared_penalty_term: penalty state is per-player");
    return phr_penalty(problem.g(0, x), state.u(0), state.rho(0));
}

std::size_t count_kinks(const GnepProblem& problem, const Vector& x, const PenaltyState& state,
                        double rel_tol) {
    std::size_t kinks = 0;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        if (problem.g_count(v) == 0) continue;
        const Vector gv = problem.g(v, x);
        const Vector& u = state.u(v);
        for (Eigen::Index i = 0; i < gv.size(); ++i)
            if (std::abs(u[i] + state.rho(v) * gv[i]) <= rel_tol * (1.0 + std::abs(u[i]))) ++kinks;
    }
    return kinks;
}

}  // namespace gnep
