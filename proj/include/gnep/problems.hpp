#pragma once

#include "gnep/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gnep {

struct CatalogEntry {
    GnepProblem problem;
    /// Named starting points ("zero", "ones", "tens" and problem-specific ones).
    std::map<std::string, Vector> presets;
};

/// duopoly_shared: theta_1 = (x1-1)^2, theta_2 = (x2-1/2)^2, shared
/// x1 + x2 - 1 <= 0. Equilibria {(a, 1-a) : a in [1/2, 1]}; the variational
/// equilibrium is (3/4, 1/4) with shared multiplier 1/2.
GnepProblem make_duopoly_shared();

/// infeasible_single: min x s.t. x^2 + 1 <= 0.
GnepProblem make_infeasible_single();

/// Constraint-only fixtures with c^1 = x1, c^2 = x1 + x2^2.
GnepProblem make_example24a();

/// Constraint-only fixtures with c^1 = 2x1 - x2^2 - 1, c^2 = 2x2 - x1^2 - 1.
GnepProblem make_example24b();

/// Three players with two variables each; theta_nu = 1/2 x^nu' M_nunu x^nu +
/// x^nu' sum_{mu != nu} M_numu x^mu + q_nu' x^nu with M + M' positive definite
/// (drawn from `seed`), shared constraint sum(x) <= 1.
inline constexpr std::uint64_t kQuad3Seed = 20240917;
GnepProblem make_quad3(std::uint64_t seed = kQuad3Seed);

/// nonshared2: duopoly objectives with g^1 = x1 + x2 - 1, g^2 = x1^2 + x2^2 - 2.
/// Unique equilibrium (1/2, 1/2) with lambda^1 = 1, lambda^2 = 0.
GnepProblem make_nonshared2();

/// Single player, no constraints, theta = (x - 3)^2.
GnepProblem make_unconstrained_single();

/// Every built-in problem with its starting-point presets.
std::vector<CatalogEntry> catalog(std::uint64_t seed = kQuad3Seed);

/// Looks up a catalog entry by name.
std::optional<CatalogEntry> find_in_catalog(const std::string& name,
                                            std::uint64_t seed = kQuad3Seed);

struct OracleConfig {
    std::vector<double> lower;  // per variable (length n)
    std::vector<double> upper;
    int resolution = 401;
    double improve_tol = 1e-6;
    double feas_tol = 1e-9;

    static OracleConfig box(std::size_t n, double lo, double hi);
};

enum class BestResponseStatus { Equilibrium, Improvable, NotApplicable };

const char* to_string(BestResponseStatus status);

struct BestResponseVerdict {
    BestResponseStatus status = BestResponseStatus::Equilibrium;
    std::size_t player = 0;
    Vector better_point;  // full joint point with the improved block
    double gain = 0.0;
};

/// Deterministic grid search over each player's own block (others fixed),
/// restricted to grid points satisfying the player's constraints. A player
/// is Improvable when some feasible grid point lowers theta_nu by more than
/// improve_tol + 10 * cell width. NotApplicable when x violates a player's
/// own constraints. Throws for player blocks larger than 3 variables.
BestResponseVerdict best_response_check(const GnepProblem& problem, const Vector& x,
                                        const OracleConfig& cfg);

}  // namespace gnep
