#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a callback returns a value whose shape differs from the
/// declared dimensions. The message names the player and the callback.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a callback returns NaN or an infinite value.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Objective of one player. All callbacks take the full joint vector x.
///
/// `gradient` returns the partial gradient with respect to the player's own
/// block (length n_nu). `hessian_rows` returns the n_nu x n row block of the
/// full second derivative, i.e. the Jacobian of `gradient` with respect to
/// the whole x. It may be left empty, in which case forward differences of
/// `gradient` are used.
struct Objective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian_rows;
};

/// A vector-valued constraint block c(x) <= 0 with `count` components.
///
/// `gradients` returns the n x count transposed Jacobian (column i is the
/// gradient of component i with respect to the full x). `hessian_rows`
/// returns, per component, the n_nu x n row block of its second derivative
/// belonging to the owning player; it may be empty (finite-difference
/// fallback).
struct Constraints {
    std::size_t count = 0;
    std::function<Vector(const Vector&)> value;
    std::function<Matrix(const Vector&)> gradients;
    std::function<std::vector<Matrix>(const Vector&)> hessian_rows;
};

struct PlayerSpec {
    std::size_t dim = 0;
    Objective objective;
    Constraints g;  // penalized constraints
    Constraints h;  // constraints kept in the subproblem; count 0 if absent
};

/// An N-player GNEP with block-structured variables and split constraints.
/// Immutable after construction.
class GnepProblem {
public:
    GnepProblem(std::string name, std::vector<PlayerSpec> players,
                bool shared_constraints = false);

    const std::string& name() const { return name_; }
    std::size_t num_players() const { return players_.size(); }
    std::size_t dim() const { return offsets_.back(); }
    std::size_t dim(std::size_t player) const;
    std::size_t offset(std::size_t player) const;
    std::size_t g_count(std::size_t player) const;
    std::size_t h_count(std::size_t player) const;
    std::size_t total_g() const;
    std::size_t total_h() const;
    bool shared_constraints() const { return shared_; }
    bool has_h() const { return total_h() > 0; }
    const PlayerSpec& player(std::size_t player) const;

    // Checked evaluations: every result is verified against the declared
    // shape and for finiteness.
    double theta(std::size_t player, const Vector& x) const;
    Vector grad_theta(std::size_t player, const Vector& x) const;
    Matrix hess_theta_rows(std::size_t player, const Vector& x) const;

    Vector g(std::size_t player, const Vector& x) const;
    Matrix g_gradients(std::size_t player, const Vector& x) const;
    std::vector<Matrix> g_hessian_rows(std::size_t player, const Vector& x) const;

    Vector h(std::size_t player, const Vector& x) const;
    Matrix h_gradients(std::size_t player, const Vector& x) const;
    std::vector<Matrix> h_hessian_rows(std::size_t player, const Vector& x) const;

    /// Rows of `gradients` belonging to the player's own block (n_nu x count).
    Matrix own_rows(std::size_t player, const Matrix& gradients) const;

private:
    void check_player(std::size_t player) const;
    void check_point(const Vector& x) const;
    Vector constraint_value(std::size_t player, const Constraints& c, const char* tag,
                            const Vector& x) const;
    Matrix constraint_gradients(std::size_t player, const Constraints& c, const char* tag,
                                const Vector& x) const;
    std::vector<Matrix> constraint_hessian_rows(std::size_t player, const Constraints& c,
                                                const char* tag, const Vector& x) const;

    std::string name_;
    std::vector<PlayerSpec> players_;
    std::vector<std::size_t> offsets_;
    bool shared_;
};

/// Per-player storage that is either one entry per player or a single entry
/// aliased for every player. In the shared layout `operator[]` returns the
/// same object for all indices, so equality across players is structural.
template <class T>
class PerPlayer {
public:
    PerPlayer() = default;
    PerPlayer(std::size_t players, T init, bool shared)
        : items_(shared ? 1 : players, std::move(init)), players_(players), shared_(shared) {}

    static PerPlayer separate(std::vector<T> items) {
        PerPlayer p;
        p.players_ = items.size();
        p.items_ = std::move(items);
        p.shared_ = false;
        return p;
    }

    T& operator[](std::size_t player) { return items_[index(player)]; }
    const T& operator[](std::size_t player) const { return items_[index(player)]; }

    std::size_t size() const { return players_; }
    bool shared() const { return shared_; }
    /// Distinct stored objects (1 when shared).
    const std::vector<T>& storage() const { return items_; }

private:
    std::size_t index(std::size_t player) const {
        if (player >= players_) throw std::out_of_range("PerPlayer: player index out of range");
        return shared_ ? 0 : player;
    }

    std::vector<T> items_;
    std::size_t players_ = 0;
    bool shared_ = false;
};

/// lambda[nu] has length m_nu (multipliers of g), mu[nu] length p_nu (of h).
/// No sign constraint is enforced: inexact subproblem solves may return
/// negative mu entries.
struct MultiplierSet {
    PerPlayer<Vector> lambda;
    PerPlayer<Vector> mu;

    /// Zero multipliers shaped for `problem`; lambda/mu are shared when
    /// `shared` is set.
    static MultiplierSet zeros(const GnepProblem& problem, bool shared);
};

/// Contiguous slice x^nu of the joint vector (players are 0-based).
Vector block_of(const GnepProblem& problem, const Vector& x, std::size_t player);

/// Returns a copy of `problem` where each player's h is appended to g, so that
/// every constraint is penalized (p_nu = 0 for all players).
GnepProblem fold_h_into_g(const GnepProblem& problem);

struct CallbackCheck {
    std::size_t player = 0;
    std::string callback;  // "theta", "g", "h", "theta_hess", "g_hess", "h_hess"
    double max_rel_error = 0.0;
};

struct ValidationReport {
    std::vector<CallbackCheck> checks;
    double fd_tol = 0.0;
    bool passed() const;
    double worst() const;
};

/// Compares analytic first derivatives (and supplied second derivatives)
/// against central differences with step 1e-6 at each probe point.
/// Relative error is |analytic - fd| / max(1, |fd|), maximized per callback.
ValidationReport validate_problem(const GnepProblem& problem, const std::vector<Vector>& probes,
                                  double fd_tol);

}  // namespace gnep
