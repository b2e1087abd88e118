#include "gnep/diagnostics.hpp"

#include "gnep/nnls.hpp"

#include <algorithm>
#include <cmath>

namespace gnep {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Penalty weight of the normalization row sum(w) = 1.
constexpr double kSimplexWeight = 1e6;

}  // namespace

std::vector<KktResidual> kkt_residual(const GnepProblem& problem, const Vector& x,
                                      const MultiplierSet& multipliers) {
    std::vector<KktResidual> out;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        const Vector& lambda = multipliers.lambda[v];
        const Vector& mu = multipliers.mu[v];
        if (static_cast<std::size_t>(lambda.size()) != problem.g_count(v) ||
            static_cast<std::size_t>(mu.size()) != problem.h_count(v))
            throw std::invalid_argument("kkt_residual: multiplier shape mismatch");
        Vector stat = problem.grad_theta(v, x);
        if (lambda.size() > 0) stat += problem.own_rows(v, problem.g_gradients(v, x)) * lambda;
        if (mu.size() > 0) stat += problem.own_rows(v, problem.h_gradients(v, x)) * mu;
        const Vector comp_g = (-problem.g(v, x)).cwiseMin(lambda);
        const Vector comp_h = (-problem.h(v, x)).cwiseMin(mu);
        out.push_back({inf_norm(stat), std::max(inf_norm(comp_g), inf_norm(comp_h))});
    }
    return out;
}

std::vector<double> feasibility_gnep_residual(const GnepProblem& problem, const Vector& x,
                                              const std::vector<Vector>& mu_hat) {
    if (!mu_hat.empty() && mu_hat.size() != problem.num_players())
        throw std::invalid_argument("feasibility_gnep_residual: one mu_hat vector per player");
    std::vector<double> out;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        const Vector mu = mu_hat.empty() ? Vector::Zero(problem.h_count(v)) : mu_hat[v];
        if (static_cast<std::size_t>(mu.size()) != problem.h_count(v))
            throw std::invalid_argument("feasibility_gnep_residual: mu_hat length mismatch");
        Vector stat = Vector::Zero(problem.dim(v));
        if (problem.g_count(v) > 0) {
            const Vector gplus = problem.g(v, x).cwiseMax(0.0);
            stat += 2.0 * problem.own_rows(v, problem.g_gradients(v, x)) * gplus;
        }
        double comp = 0.0;
        if (mu.size() > 0) {
            stat += problem.own_rows(v, problem.h_gradients(v, x)) * mu;
            comp = inf_norm((-problem.h(v, x)).cwiseMin(mu));
        }
        out.push_back(std::max(inf_norm(stat), comp));
    }
    return out;
}

PositiveIndependence positive_linear_independence(const Matrix& V, double tol) {
    if (V.cols() < 1) throw std::invalid_argument("positive_linear_independence: no columns");
    const Eigen::Index rows = V.rows();
    const Eigen::Index k = V.cols();
    Matrix A(rows + 1, k);
    A.topRows(rows) = V;
    A.row(rows).setConstant(kSimplexWeight);
    Vector b = Vector::Zero(rows + 1);
    b[rows] = kSimplexWeight;

    PositiveIndependence out;
    Vector w = nnls(A, b);
    const double total = w.sum();
    if (total > 0.0) w /= total;
    out.weights = w;
    out.sigma = (V * w).norm();
    out.independent = out.sigma > tol;
    return out;
}

const char* to_string(EmfcqStatus status) {
    switch (status) {
        case EmfcqStatus::Holds: return "Holds";
        case EmfcqStatus::Fails: return "Fails";
        case EmfcqStatus::Inconclusive: return "Inconclusive";
    }
    return "?";
}

EmfcqVerdict emfcq_check(const GnepProblem& problem, std::size_t player, const Vector& x,
                         double tol) {
    const std::size_t m = problem.g_count(player);
    const std::size_t p = problem.h_count(player);
    const auto me = static_cast<Eigen::Index>(m);
    const auto pe = static_cast<Eigen::Index>(p);
    Vector c(me + pe);
    Matrix grads(problem.dim(player), me + pe);
    if (m > 0) {
        c.head(me) = problem.g(player, x);
        grads.leftCols(me) = problem.own_rows(player, problem.g_gradients(player, x));
    }
    if (p > 0) {
        c.tail(pe) = problem.h(player, x);
        grads.rightCols(pe) = problem.own_rows(player, problem.h_gradients(player, x));
    }

    EmfcqVerdict verdict;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (c[i] >= -tol) verdict.considered.push_back(static_cast<std::size_t>(i));
    if (verdict.considered.empty()) {
        verdict.status = EmfcqStatus::Holds;
        verdict.direction = Vector::Zero(problem.dim(player));
        return verdict;
    }

    Matrix V(grads.rows(), static_cast<Eigen::Index>(verdict.considered.size()));
    for (std::size_t k = 0; k < verdict.considered.size(); ++k)
        V.col(static_cast<Eigen::Index>(k)) = grads.col(static_cast<Eigen::Index>(verdict.considered[k]));

    const PositiveIndependence pli = positive_linear_independence(V, tol);
    verdict.sigma = pli.sigma;
    if (!pli.independent) {
        verdict.status = EmfcqStatus::Fails;
        verdict.weights = pli.weights;
        return verdict;
    }

    auto descends = [&](const Vector& d) {
        const double dn = d.norm();
        if (!(dn > 0.0)) return false;
        return ((V.transpose() * d).array() < -tol * dn).all();
    };
    // Least-squares direction: V^T V w = 1, d = -V w.
    const Matrix gram = V.transpose() * V;
    const Vector w = gram.completeOrthogonalDecomposition().solve(Vector::Ones(V.cols()));
    Vector d = -(V * w);
    if (!descends(d)) {
        // Minimum-norm point p of the convex hull satisfies v_i^T p >= ||p||^2.
        d = -(V * pli.weights);
    }
    if (descends(d)) {
        verdict.status = EmfcqStatus::Holds;
        verdict.direction = d;
    } else {
        verdict.status = EmfcqStatus::Inconclusive;
        verdict.weights = pli.weights;
    }
    return verdict;
}

const char* to_string(PointClass c) {
    switch (c) {
        case PointClass::FeasibleKKT: return "FeasibleKKT";
        case PointClass::InfeasibleStationary: return "InfeasibleStationary";
        case PointClass::Neither: return "Neither";
    }
    return "?";
}

double max_violation(const GnepProblem& problem, const Vector& x) {
    double worst = 0.0;
    for (std::size_t v = 0; v < problem.num_players(); ++v) {
        worst = std::max(worst, inf_norm(problem.g(v, x).cwiseMax(0.0)));
        worst = std::max(worst, inf_norm(problem.h(v, x).cwiseMax(0.0)));
    }
    return worst;
}

PointClass classify_point(const GnepProblem& problem, const Vector& x,
                          const MultiplierSet& multipliers, double eps, double eps_feas) {
    const double violation = max_violation(problem, x);
    if (violation <= eps) {
        double worst = 0.0;
        for (const auto& r : kkt_residual(problem, x, multipliers))
            worst = std::max({worst, r.stationarity, r.complementarity});
        return worst <= eps ? PointClass::FeasibleKKT : PointClass::Neither;
    }
    std::vector<Vector> mu_hat;
    for (std::size_t v = 0; v < problem.num_players(); ++v) mu_hat.push_back(multipliers.mu[v]);
    const auto feas = feasibility_gnep_residual(problem, x, mu_hat);
    const double worst = *std::max_element(feas.begin(), feas.end());
    return worst <= eps_feas ? PointClass::InfeasibleStationary : PointClass::Neither;
}

}  // namespace gnep
