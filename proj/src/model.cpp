#include "gnep/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gnep {

namespace {

constexpr double kHessianFdStep = 1e-7;
constexpr double kValidationStep = 1e-6;

std::string where(std::size_t player, const char* callback) {
    std::ostringstream os;
    os << "player " << player << ", callback '" << callback << "'";
    return os.str();
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& v, std::size_t player, const char* callback) {
    if (!v.allFinite()) throw NonFiniteError("non-finite output from " + where(player, callback));
}

void require_shape(Eigen::Index rows, Eigen::Index cols, std::size_t want_rows,
                   std::size_t want_cols, std::size_t player, const char* callback) {
    if (rows != static_cast<Eigen::Index>(want_rows) ||
        cols != static_cast<Eigen::Index>(want_cols)) {
        std::ostringstream os;
        os << "shape mismatch from " << where(player, callback) << ": expected " << want_rows
           << "x" << want_cols << ", got " << rows << "x" << cols;
        throw ShapeError(os.str());
    }
}

}  // namespace

GnepProblem::GnepProblem(std::string name, std::vector<PlayerSpec> players, bool shared_constraints)
    : name_(std::move(name)), players_(std::move(players)), shared_(shared_constraints) {
    if (players_.empty()) throw std::invalid_argument("GnepProblem: at least one player required");
    offsets_.reserve(players_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t v = 0; v < players_.size(); ++v) {
        const auto& p = players_[v];
        if (p.dim == 0) throw std::invalid_argument("GnepProblem: " + where(v, "dim") + " must be >= 1");
        if (!p.objective.value || !p.objective.gradient)
            throw std::invalid_argument("GnepProblem: " + where(v, "theta") + " is missing");
        if (p.g.count > 0 && (!p.g.value || !p.g.gradients))
            throw std::invalid_argument("GnepProblem: " + where(v, "g") + " is missing");
        if (p.h.count > 0 && (!p.h.value || !p.h.gradients))
            throw std::invalid_argument("GnepProblem: " + where(v, "h") + " is missing");
        offsets_.push_back(offsets_.back() + p.dim);
    }
    if (shared_) {
        for (const auto& p : players_) {
            if (p.g.count != players_.front().g.count || p.h.count != players_.front().h.count)
                throw std::invalid_argument(
                    "GnepProblem: shared constraints require identical g/h counts for all players");
        }
    }
}

std::size_t GnepProblem::dim(std::size_t player) const {
    check_player(player);
    return players_[player].dim;
}

std::size_t GnepProblem::offset(std::size_t player) const {
    check_player(player);
    return offsets_[player];
}

std::size_t GnepProblem::g_count(std::size_t player) const {
    check_player(player);
    return players_[player].g.count;
}

std::size_t GnepProblem::h_count(std::size_t player) const {
    check_player(player);
    return players_[player].h.count;
}

std::size_t GnepProblem::total_g() const {
    std::size_t m = 0;
    for (const auto& p : players_) m += p.g.count;
    return m;
}

std::size_t GnepProblem::total_h() const {
    std::size_t m = 0;
    for (const auto& p : players_) m += p.h.count;
    return m;
}

const PlayerSpec& GnepProblem::player(std::size_t player) const {
    check_player(player);
    return players_[player];
}

void GnepProblem::check_player(std::size_t player) const {
    if (player >= players_.size()) {
        std::ostringstream os;
        os << "player index " << player << " out of range (N = " << players_.size() << ")";
        throw std::out_of_range(os.str());
    }
}

void GnepProblem::check_point(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim()) {
        std::ostringstream os;
        os << "point of length " << x.size() << " does not match problem dimension " << dim();
        throw std::invalid_argument(os.str());
    }
}

double GnepProblem::theta(std::size_t player, const Vector& x) const {
    check_player(player);
    check_point(x);
    const double v = players_[player].objective.value(x);
    if (!std::isfinite(v)) throw NonFiniteError("non-finite output from " + where(player, "theta"));
    return v;
}

Vector GnepProblem::grad_theta(std::size_t player, const Vector& x) const {
    check_player(player);
    check_point(x);
    Vector grad = players_[player].objective.gradient(x);
    require_shape(grad.size(), 1, players_[player].dim, 1, player, "theta_grad");
    require_finite(grad, player, "theta_grad");
    return grad;
}

Matrix GnepProblem::hess_theta_rows(std::size_t player, const Vector& x) const {
    check_player(player);
    check_point(x);
    const auto& obj = players_[player].objective;
    const std::size_t nv = players_[player].dim;
    Matrix rows;
    if (obj.hessian_rows) {
        rows = obj.hessian_rows(x);
    } else {
        const Vector base = grad_theta(player, x);
        rows.resize(nv, dim());
        Vector xp = x;
        for (std::size_t j = 0; j < dim(); ++j) {
            xp[j] = x[j] + kHessianFdStep;
            rows.col(j) = (grad_theta(player, xp) - base) / kHessianFdStep;
            xp[j] = x[j];
        }
    }
    require_shape(rows.rows(), rows.cols(), nv, dim(), player, "theta_hess");
    require_finite(rows, player, "theta_hess");
    return rows;
}

Vector GnepProblem::constraint_value(std::size_t player, const Constraints& c, const char* tag,
                                     const Vector& x) const {
    check_player(player);
    check_point(x);
    if (c.count == 0) return Vector(0);
    Vector v = c.value(x);
    require_shape(v.size(), 1, c.count, 1, player, tag);
    require_finite(v, player, tag);
    return v;
}

Matrix GnepProblem::constraint_gradients(std::size_t player, const Constraints& c, const char* tag,
                                         const Vector& x) const {
    check_player(player);
    check_point(x);
    if (c.count == 0) return Matrix(dim(), 0);
    Matrix jt = c.gradients(x);
    require_shape(jt.rows(), jt.cols(), dim(), c.count, player, tag);
    require_finite(jt, player, tag);
    return jt;
}

std::vector<Matrix> GnepProblem::constraint_hessian_rows(std::size_t player, const Constraints& c,
                                                         const char* tag, const Vector& x) const {
    check_player(player);
    check_point(x);
    const std::size_t nv = players_[player].dim;
    if (c.count == 0) return {};
    std::vector<Matrix> rows;
    if (c.hessian_rows) {
        rows = c.hessian_rows(x);
    } else {
        const Matrix base = own_rows(player, constraint_gradients(player, c, tag, x));
        rows.assign(c.count, Matrix(nv, dim()));
        Vector xp = x;
        for (std::size_t j = 0; j < dim(); ++j) {
            xp[j] = x[j] + kHessianFdStep;
            const Matrix bumped = own_rows(player, constraint_gradients(player, c, tag, xp));
            for (std::size_t i = 0; i < c.count; ++i)
                rows[i].col(j) = (bumped.col(i) - base.col(i)) / kHessianFdStep;
            xp[j] = x[j];
        }
    }
    if (rows.size() != c.count) require_shape(rows.size(), 1, c.count, 1, player, tag);
    for (const auto& r : rows) {
        require_shape(r.rows(), r.cols(), nv, dim(), player, tag);
        require_finite(r, player, tag);
    }
    return rows;
}

Vector GnepProblem::g(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_value(player, players_[player].g, "g", x);
}

Matrix GnepProblem::g_gradients(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_gradients(player, players_[player].g, "g_grad", x);
}

std::vector<Matrix> GnepProblem::g_hessian_rows(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_hessian_rows(player, players_[player].g, "g_hess", x);
}

Vector GnepProblem::h(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_value(player, players_[player].h, "h", x);
}

Matrix GnepProblem::h_gradients(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_gradients(player, players_[player].h, "h_grad", x);
}

std::vector<Matrix> GnepProblem::h_hessian_rows(std::size_t player, const Vector& x) const {
    check_player(player);
    return constraint_hessian_rows(player, players_[player].h, "h_hess", x);
}

Matrix GnepProblem::own_rows(std::size_t player, const Matrix& gradients) const {
    check_player(player);
    return gradients.middleRows(offsets_[player], players_[player].dim);
}

Vector block_of(const GnepProblem& problem, const Vector& x, std::size_t player) {
    const std::size_t off = problem.offset(player);
    if (static_cast<std::size_t>(x.size()) != problem.dim())
        throw std::invalid_argument("block_of: point length does not match problem dimension");
    return x.segment(off, problem.dim(player));
}

MultiplierSet MultiplierSet::zeros(const GnepProblem& problem, bool shared) {
    const std::size_t players = problem.num_players();
    if (shared) {
        if (!problem.shared_constraints())
            throw std::invalid_argument("MultiplierSet: shared layout needs shared constraints");
        return {PerPlayer<Vector>(players, Vector::Zero(problem.g_count(0)), true),
                PerPlayer<Vector>(players, Vector::Zero(problem.h_count(0)), true)};
    }
    std::vector<Vector> lambda, mu;
    for (std::size_t v = 0; v < players; ++v) {
        lambda.push_back(Vector::Zero(problem.g_count(v)));
        mu.push_back(Vector::Zero(problem.h_count(v)));
    }
    return {PerPlayer<Vector>::separate(std::move(lambda)), PerPlayer<Vector>::separate(std::move(mu))};
}

GnepProblem fold_h_into_g(const GnepProblem& problem) {
    std::vector<PlayerSpec> players;
    players.reserve(problem.num_players());
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        PlayerSpec spec = problem.player(v);
        if (spec.h.count == 0) {
            players.push_back(std::move(spec));
            continue;
        }
        const Constraints g = spec.g;
        const Constraints h = spec.h;
        const std::size_t n = problem.dim();
        Constraints merged;
        merged.count = g.count + h.count;
        merged.value = [g, h](const Vector& x) {
            Vector out(g.count + h.count);
            if (g.count > 0) out.head(g.count) = g.value(x);
            out.tail(h.count) = h.value(x);
            return out;
        };
        merged.gradients = [g, h, n](const Vector& x) {
            Matrix out(n, g.count + h.count);
            if (g.count > 0) out.leftCols(g.count) = g.gradients(x);
            out.rightCols(h.count) = h.gradients(x);
            return out;
        };
        if ((g.count == 0 || g.hessian_rows) && h.hessian_rows) {
            merged.hessian_rows = [g, h](const Vector& x) {
                std::vector<Matrix> out;
                if (g.count > 0) out = g.hessian_rows(x);
                auto hr = h.hessian_rows(x);
                out.insert(out.end(), hr.begin(), hr.end());
                return out;
            };
        }
        spec.g = std::move(merged);
        spec.h = Constraints{};
        players.push_back(std::move(spec));
    }
    return GnepProblem(problem.name(), std::move(players), problem.shared_constraints());
}

bool ValidationReport::passed() const { return worst() <= fd_tol; }

double ValidationReport::worst() const {
    double w = 0.0;
    for (const auto& c : checks) w = std::max(w, c.max_rel_error);
    return w;
}

namespace {

double rel_error(double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}

// Central-difference Jacobian (rows: outputs, cols: x components).
template <class F>
Matrix central_jacobian(F&& f, const Vector& x, Eigen::Index outputs) {
    Matrix jac(outputs, x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + kValidationStep;
        const Vector fp = f(xp);
        xp[j] = x[j] - kValidationStep;
        const Vector fm = f(xp);
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (2.0 * kValidationStep);
    }
    return jac;
}

double max_rel(const Matrix& analytic, const Matrix& fd) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i)
        for (Eigen::Index j = 0; j < analytic.cols(); ++j)
            worst = std::max(worst, rel_error(analytic(i, j), fd(i, j)));
    return worst;
}

void record(ValidationReport& report, std::size_t player, const char* name, double err) {
    for (auto& c : report.checks) {
        if (c.player == player && c.callback == name) {
            c.max_rel_error = std::max(c.max_rel_error, err);
            return;
        }
    }
    report.checks.push_back({player, name, err});
}

}  // namespace

ValidationReport validate_problem(const GnepProblem& problem, const std::vector<Vector>& probes,
                                  double fd_tol) {
    if (probes.empty()) throw std::invalid_argument("validate_problem: no probe points");
    ValidationReport report;
    report.fd_tol = fd_tol;
    for (const Vector& x : probes) {
        for (std::size_t v = 0; v < problem.num_players(); ++v) {
            const auto off = static_cast<Eigen::Index>(problem.offset(v));
            const auto nv = static_cast<Eigen::Index>(problem.dim(v));
            const PlayerSpec& spec = problem.player(v);

            // theta: own-block gradient versus central differences of the value.
            const Matrix fd_theta = central_jacobian(
                [&](const Vector& y) { return Vector::Constant(1, problem.theta(v, y)); }, x, 1);
            const Vector grad = problem.grad_theta(v, x);
            record(report, v, "theta", max_rel(grad.transpose(), fd_theta.middleCols(off, nv)));
            if (spec.objective.hessian_rows) {
                const Matrix fd_hess = central_jacobian(
                    [&](const Vector& y) { return problem.grad_theta(v, y); }, x, nv);
                record(report, v, "theta_hess", max_rel(problem.hess_theta_rows(v, x), fd_hess));
            }

            auto check_constraints = [&](const Constraints& c, const char* name,
                                         const char* hess_name, auto value, auto grads,
                                         auto hrows) {
                if (c.count == 0) return;
                const auto m = static_cast<Eigen::Index>(c.count);
                const Matrix fd = central_jacobian(value, x, m);  // m x n
                record(report, v, name, max_rel(grads(x).transpose(), fd));
                if (c.hessian_rows) {
                    const auto analytic = hrows(x);
                    for (Eigen::Index i = 0; i < m; ++i) {
                        const Matrix fd_h = central_jacobian(
                            [&](const Vector& y) -> Vector {
                                return grads(y).col(i).segment(off, nv);
                            },
                            x, nv);
                        record(report, v, hess_name, max_rel(analytic[i], fd_h));
                    }
                }
            };
            check_constraints(
                spec.g, "g", "g_hess", [&](const Vector& y) { return problem.g(v, y); },
                [&](const Vector& y) { return problem.g_gradients(v, y); },
                [&](const Vector& y) { return problem.g_hessian_rows(v, y); });
            check_constraints(
                spec.h, "h", "h_hess", [&](const Vector& y) { return problem.h(v, y); },
                [&](const Vector& y) { return problem.h_gradients(v, y); },
                [&](const Vector& y) { return problem.h_hessian_rows(v, y); });
        }
    }
    return report;
}

}  // namespace gnep
