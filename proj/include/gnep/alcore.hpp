#pragma once

#include "gnep/model.hpp"

namespace gnep {

/// Safeguarded multiplier estimates u and penalty parameters rho.
///
/// Invariants enforced on every mutation: 0 <= u_i <= u_max and rho > 0.
/// In the shared layout (variational equilibria) a single u and rho are
/// aliased for all players.
class PenaltyState {
public:
    PenaltyState(const GnepProblem& problem, double u_max, double rho0, bool shared);

    const Vector& u(std::size_t player) const { return u_[player]; }
    double rho(std::size_t player) const { return rho_[player]; }
    double u_max() const { return u_max_; }
    bool shared() const { return u_.shared(); }
    std::size_t num_players() const { return u_.size(); }

    void set_u(std::size_t player, const Vector& u);
    void set_rho(std::size_t player, double rho);

    const PerPlayer<Vector>& u_all() const { return u_; }
    const PerPlayer<double>& rho_all() const { return rho_; }
    double rho_max() const;

private:
    PerPlayer<Vector> u_;
    PerPlayer<double> rho_;
    double u_max_;
};

/// Subgradient weight used where u_i + rho*g_i(x) is exactly zero.
enum class KinkRule { TreatActive, TreatInactive };

/// (u + rho * g)_+ componentwise.
Vector shifted_multiplier(const Vector& g_val, const Vector& u, double rho);

/// (rho/2) * ||(g + u/rho)_+||^2.
double phr_penalty(const Vector& g_val, const Vector& u, double rho);

/// PHR augmented Lagrangian theta_nu(x) + (rho/2)||(g^nu(x) + u/rho)_+||^2.
double al_value(const GnepProblem& problem, std::size_t player, const Vector& x,
                const PenaltyState& state);

/// Partial gradient of the augmented Lagrangian w.r.t. the player's block.
Vector al_gradient_block(const GnepProblem& problem, std::size_t player, const Vector& x,
                         const PenaltyState& state);

/// Stacked partial gradients F(x). Throws std::invalid_argument if any
/// player has constraints outside the penalty (p_nu > 0).
Vector assemble_F(const GnepProblem& problem, const Vector& x, const PenaltyState& state);

/// An element of the generalized Jacobian of F (n x n, nonsymmetric).
Matrix generalized_jacobian(const GnepProblem& problem, const Vector& x,
                            const PenaltyState& state, KinkRule rule = KinkRule::TreatInactive);

/// The player-independent penalty P(x,u;rho) of a shared-constraint problem.
double shared_penalty_term(const GnepProblem& problem, const Vector& x, const PenaltyState& state);

/// Number of components with |u_i + rho*g_i(x)| <= 1e-12 * (1 + |u_i|).
std::size_t count_kinks(const GnepProblem& problem, const Vector& x, const PenaltyState& state,
                        double rel_tol = 1e-12);

}  // namespace gnep
