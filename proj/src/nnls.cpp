#include "gnep/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gnep {

namespace {

// Least-squares solution restricted to the passive columns; zero elsewhere.
Vector passive_solve(const Matrix& A, const Vector& b, const std::vector<bool>& passive) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    Matrix Ap(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
    const Vector sp = Ap.colPivHouseholderQr().solve(b);
    Vector s = Vector::Zero(A.cols());
    for (std::size_t k = 0; k < cols.size(); ++k) s[cols[k]] = sp[static_cast<Eigen::Index>(k)];
    return s;
}

}  // namespace

Vector nnls(const Matrix& A, const Vector& b) {
    if (A.rows() != b.size()) throw std::invalid_argument("nnls: A and b have incompatible shapes");
    if (!A.allFinite() || !b.allFinite()) throw std::invalid_argument("nnls: non-finite input");
    const Eigen::Index n = A.cols();
    Vector x = Vector::Zero(n);
    if (n == 0) return x;

    const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                       static_cast<double>(std::max(A.rows(), n)) *
                       std::max(1.0, A.cwiseAbs().colwise().sum().maxCoeff()) *
                       std::max(1.0, b.cwiseAbs().maxCoeff());
    const int max_iter = 10 * static_cast<int>(n);

    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    Vector w = A.transpose() * (b - A * x);
    int iter = 0;
    for (;;) {
        Eigen::Index pick = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
                best = w[j];
                pick = j;
            }
        }
        if (pick < 0) break;
        if (++iter > max_iter) throw NnlsIterationLimit("nnls: iteration limit exceeded");
        passive[static_cast<std::size_t>(pick)] = true;

        for (int inner = 0;; ++inner) {
            if (inner > max_iter) throw NnlsIterationLimit("nnls: inner iteration limit exceeded");
            const Vector s = passive_solve(A, b, passive);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) feasible = false;
            if (feasible) {
                x = s;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0)
                    alpha = std::min(alpha, x[j] / (x[j] - s[j]));
            }
            x += alpha * (s - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x[j] = 0.0;
                }
            }
        }
        w = A.transpose() * (b - A * x);
    }
    return x;
}

}  // namespace gnep
