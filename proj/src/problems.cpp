#include "gnep/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gnep {

namespace {

Matrix zeros(Eigen::Index r, Eigen::Index c) { return Matrix::Zero(r, c); }

// One scalar variable per player, objective (x_own - target)^2.
Objective squared_distance(Eigen::Index own, Eigen::Index n, double target) {
    return {[own, target](const Vector& x) { return (x[own] - target) * (x[own] - target); },
            [own, target](const Vector& x) { return Vector::Constant(1, 2.0 * (x[own] - target)); },
            [own, n](const Vector&) {
                Matrix h = zeros(1, n);
                h(0, own) = 2.0;
                return h;
            }};
}

Objective zero_objective(Eigen::Index n) {
    return {[](const Vector&) { return 0.0; }, [](const Vector&) { return Vector::Zero(1); },
            [n](const Vector&) { return zeros(1, n); }};
}

// x1 + x2 - 1 <= 0 on a two-variable problem.
Constraints sum_le_one_2d() {
    return {1, [](const Vector& x) { return Vector::Constant(1, x[0] + x[1] - 1.0); },
            [](const Vector&) { return Matrix::Ones(2, 1); },
            [](const Vector&) { return std::vector<Matrix>{zeros(1, 2)}; }};
}

// Uniform draw in [lo, hi) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& gen, double lo, double hi) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

}  // namespace

GnepProblem make_duopoly_shared() {
    std::vector<PlayerSpec> players(2);
    players[0] = {1, squared_distance(0, 2, 1.0), sum_le_one_2d(), {}};
    players[1] = {1, squared_distance(1, 2, 0.5), sum_le_one_2d(), {}};
    return GnepProblem("duopoly_shared", std::move(players), true);
}

GnepProblem make_infeasible_single() {
    PlayerSpec p;
    p.dim = 1;
    p.objective = {[](const Vector& x) { return x[0]; }, [](const Vector&) { return Vector::Ones(1); },
                   [](const Vector&) { return zeros(1, 1); }};
    p.g = {1, [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] + 1.0); },
           [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 * x[0]); },
           [](const Vector&) { return std::vector<Matrix>{Matrix::Constant(1, 1, 2.0)}; }};
    return GnepProblem("infeasible_single", {p});
}

GnepProblem make_example24a() {
    std::vector<PlayerSpec> players(2);
    players[0].dim = 1;
    players[0].objective = zero_objective(2);
    players[0].g = {1, [](const Vector& x) { return Vector::Constant(1, x[0]); },
                    [](const Vector&) {
                        Matrix j(2, 1);
                        j << 1.0, 0.0;
                        return j;
                    },
                    [](const Vector&) { return std::vector<Matrix>{zeros(1, 2)}; }};
    players[1].dim = 1;
    players[1].objective = zero_objective(2);
    players[1].g = {1, [](const Vector& x) { return Vector::Constant(1, x[0] + x[1] * x[1]); },
                    [](const Vector& x) {
                        Matrix j(2, 1);
                        j << 1.0, 2.0 * x[1];
                        return j;
                    },
                    [](const Vector&) {
                        Matrix h(1, 2);
                        h << 0.0, 2.0;
                        return std::vector<Matrix>{h};
                    }};
    return GnepProblem("example24a", std::move(players));
}

GnepProblem make_example24b() {
    std::vector<PlayerSpec> players(2);
    players[0].dim = 1;
    players[0].objective = zero_objective(2);
    players[0].g = {1, [](const Vector& x) { return Vector::Constant(1, 2.0 * x[0] - x[1] * x[1] - 1.0); },
                    [](const Vector& x) {
                        Matrix j(2, 1);
                        j << 2.0, -2.0 * x[1];
                        return j;
                    },
                    [](const Vector&) { return std::vector<Matrix>{zeros(1, 2)}; }};
    players[1].dim = 1;
    players[1].objective = zero_objective(2);
    players[1].g = {1, [](const Vector& x) { return Vector::Constant(1, 2.0 * x[1] - x[0] * x[0] - 1.0); },
                    [](const Vector& x) {
                        Matrix j(2, 1);
                        j << -2.0 * x[0], 2.0;
                        return j;
                    },
                    [](const Vector&) { return std::vector<Matrix>{zeros(1, 2)}; }};
    return GnepProblem("example24b", std::move(players));
}

GnepProblem make_quad3(std::uint64_t seed) {
    constexpr Eigen::Index n = 6;
    constexpr Eigen::Index nv = 2;
    std::mt19937_64 gen(seed);
    Matrix A(n, n), B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = uniform(gen, -1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) B(i, j) = uniform(gen, -0.5, 0.5);
    Matrix sym = A * A.transpose() / static_cast<double>(n) + Matrix::Identity(n, n);
    Matrix skew = 0.5 * (B - B.transpose());
    // Own blocks stay symmetric so that grad of 1/2 x'M_vv x is M_vv x.
    for (Eigen::Index v = 0; v < 3; ++v) skew.block(v * nv, v * nv, nv, nv).setZero();
    const Matrix M = sym + skew;
    Vector q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = uniform(gen, -3.0, -1.0);

    std::vector<PlayerSpec> players;
    for (Eigen::Index v = 0; v < 3; ++v) {
        const Eigen::Index off = v * nv;
        const Matrix rows = M.middleRows(off, nv);
        const Vector qv = q.segment(off, nv);
        PlayerSpec p;
        p.dim = nv;
        p.objective.value = [rows, qv, off](const Vector& x) {
            const Vector own = x.segment(off, nv);
            Matrix cross = rows;
            cross.middleCols(off, nv).setZero();
            return 0.5 * own.dot(rows.middleCols(off, nv) * own) + own.dot(cross * x) + qv.dot(own);
        };
        p.objective.gradient = [rows, qv](const Vector& x) -> Vector { return rows * x + qv; };
        p.objective.hessian_rows = [rows](const Vector&) { return rows; };
        p.g = {1, [](const Vector& x) { return Vector::Constant(1, x.sum() - 1.0); },
               [](const Vector&) { return Matrix::Ones(n, 1); },
               [](const Vector&) { return std::vector<Matrix>{zeros(nv, n)}; }};
        players.push_back(std::move(p));
    }
    return GnepProblem("quad3", std::move(players), true);
}

GnepProblem make_nonshared2() {
    std::vector<PlayerSpec> players(2);
    players[0] = {1, squared_distance(0, 2, 1.0), sum_le_one_2d(), {}};
    players[1].dim = 1;
    players[1].objective = squared_distance(1, 2, 0.5);
    players[1].g = {1, [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() - 2.0); },
                    [](const Vector& x) -> Matrix { return 2.0 * x; },
                    [](const Vector&) {
                        Matrix h(1, 2);
                        h << 0.0, 2.0;
                        return std::vector<Matrix>{h};
                    }};
    return GnepProblem("nonshared2", std::move(players));
}

GnepProblem make_unconstrained_single() {
    PlayerSpec p;
    p.dim = 1;
    p.objective = squared_distance(0, 1, 3.0);
    return GnepProblem("unconstrained_single", {p});
}

namespace {

CatalogEntry entry(GnepProblem problem) {
    const auto n = static_cast<Eigen::Index>(problem.dim());
    CatalogEntry e{std::move(problem), {}};
    e.presets["zero"] = Vector::Zero(n);
    e.presets["ones"] = Vector::Ones(n);
    e.presets["tens"] = Vector::Constant(n, 10.0);
    return e;
}

}  // namespace

std::vector<CatalogEntry> catalog(std::uint64_t seed) {
    std::vector<CatalogEntry> out;
    out.push_back(entry(make_duopoly_shared()));
    out.push_back(entry(make_infeasible_single()));
    out.push_back(entry(make_example24a()));
    out.push_back(entry(make_example24b()));
    out.push_back(entry(make_quad3(seed)));
    out.push_back(entry(make_nonshared2()));
    out.push_back(entry(make_unconstrained_single()));
    return out;
}

std::optional<CatalogEntry> find_in_catalog(const std::string& name, std::uint64_t seed) {
    for (auto& e : catalog(seed))
        if (e.problem.name() == name) return std::move(e);
    return std::nullopt;
}

OracleConfig OracleConfig::box(std::size_t n, double lo, double hi) {
    OracleConfig cfg;
    cfg.lower.assign(n, lo);
    cfg.upper.assign(n, hi);
    return cfg;
}

const char* to_string(BestResponseStatus status) {
    switch (status) {
        case BestResponseStatus::Equilibrium: return "Equilibrium";
        case BestResponseStatus::Improvable: return "Improvable";
        case BestResponseStatus::NotApplicable: return "NotApplicable";
    }
    return "?";
}

namespace {

bool own_feasible(const GnepProblem& problem, std::size_t v, const Vector& x, double tol) {
    const Vector g = problem.g(v, x);
    const Vector h = problem.h(v, x);
    return (g.size() == 0 || g.maxCoeff() <= tol) && (h.size() == 0 || h.maxCoeff() <= tol);
}

}  // namespace

BestResponseVerdict best_response_check(const GnepProblem& problem, const Vector& x,
                                        const OracleConfig& cfg) {
    const std::size_t n = problem.dim();
    if (cfg.lower.size() != n || cfg.upper.size() != n)
        throw std::invalid_argument("best_response_check: bounds must have one entry per variable");
    if (cfg.resolution < 3) throw std::invalid_argument("best_response_check: resolution must be >= 3");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(cfg.lower[j]) || !std::isfinite(cfg.upper[j]) || cfg.lower[j] >= cfg.upper[j])
            throw std::invalid_argument("best_response_check: bounds must be finite with lower < upper");
        if (x[static_cast<Eigen::Index>(j)] < cfg.lower[j] || x[static_cast<Eigen::Index>(j)] > cfg.upper[j])
            throw std::invalid_argument("best_response_check: point lies outside the oracle box");
    }
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        if (problem.dim(v) > 3) {
            std::ostringstream os;
            os << "best_response_check: player " << v << " has " << problem.dim(v)
               << " variables; the grid oracle supports at most 3 (skip the oracle)";
            throw std::invalid_argument(os.str());
        }
    }

    BestResponseVerdict verdict;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        if (!own_feasible(problem, v, x, cfg.feas_tol)) {
            verdict.status = BestResponseStatus::NotApplicable;
            verdict.player = v;
            return verdict;
        }
    }

    const auto steps = static_cast<std::size_t>(cfg.resolution);
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        const std::size_t off = problem.offset(v);
        const std::size_t d = problem.dim(v);
        double cell = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            cell = std::max(cell, (cfg.upper[off + j] - cfg.lower[off + j]) /
                                      static_cast<double>(steps - 1));
        const double threshold = cfg.improve_tol + 10.0 * cell;
        const double current = problem.theta(v, x);

        std::size_t total = 1;
        for (std::size_t j = 0; j < d; ++j) total *= steps;
        double best_gain = 0.0;
        Vector best;
        Vector y = x;
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (std::size_t j = 0; j < d; ++j) {
                const std::size_t s = rem % steps;
                rem /= steps;
                const double lo = cfg.lower[off + j];
                const double hi = cfg.upper[off + j];
                y[static_cast<Eigen::Index>(off + j)] =
                    lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps - 1);
            }
            if (!own_feasible(problem, v, y, cfg.feas_tol)) continue;
            const double gain = current - problem.theta(v, y);
            if (gain > best_gain) {
                best_gain = gain;
                best = y;
            }
        }
        if (best_gain > threshold) {
            verdict.status = BestResponseStatus::Improvable;
            verdict.player = v;
            verdict.better_point = best;
            verdict.gain = best_gain;
            return verdict;
        }
    }
    verdict.status = BestResponseStatus::Equilibrium;
    return verdict;
}

}  // namespace gnep
