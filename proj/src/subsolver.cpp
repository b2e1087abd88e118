#include "gnep/subsolver.hpp"

#include <algorithm>
#include <cmath>

namespace gnep {

void LmConfig::validate() const {
    if (!(decrease_factor > 0.0 && decrease_factor < 1.0 && increase_factor > 1.0))
        throw std::invalid_argument("LmConfig: need 0 < decrease_factor < 1 < increase_factor");
    if (!(eps > 0.0)) throw std::invalid_argument("LmConfig: eps must be > 0");
    if (!(alpha0 > 0.0)) throw std::invalid_argument("LmConfig: alpha0 must be > 0");
    if (max_iter < 0 || max_inner_tries < 1)
        throw std::invalid_argument("LmConfig: iteration caps must be nonnegative");
}

const char* to_string(LmStatus status) {
    switch (status) {
        case LmStatus::Converged: return "Converged";
        case LmStatus::SafeguardStop: return "SafeguardStop";
        case LmStatus::MaxIter: return "MaxIter";
    }
    return "?";
}

Vector spd_solve(const Matrix& M, const Vector& rhs) {
    if (M.rows() != M.cols() || M.rows() != rhs.size())
        throw std::invalid_argument("spd_solve: shape mismatch");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("spd_solve: matrix is not symmetric");
    // Square-root-free LDL' keeps exactly representable systems exact.
    const Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success || (M.rows() > 0 && !(ldlt.vectorD().minCoeff() > 0.0)))
        throw NotPositiveDefinite("spd_solve: non-positive pivot");
    return ldlt.solve(rhs);
}

Vector lm_step(const Matrix& V, const Vector& Fx, double alpha) {
    if (V.rows() != Fx.size()) throw std::invalid_argument("lm_step: shape mismatch");
    const double fnorm = Fx.norm();
    if (fnorm == 0.0) return Vector::Zero(V.cols());
    Matrix M = V.transpose() * V;
    M.diagonal().array() += alpha * fnorm;
    return spd_solve(M, -(V.transpose() * Fx));
}

LmResult lm_solve(const LmSystem& system, const Vector& x0, const LmConfig& cfg) {
    cfg.validate();
    LmResult result;
    Vector x = x0;
    Vector Fx = system.residual(x);
    double fnorm = Fx.norm();
    double alpha = cfg.alpha0;

    auto finish = [&](LmStatus status) {
        result.x = x;
        result.final_residual = fnorm;
        result.status = status;
        return result;
    };

    for (int k = 0;; ++k) {
        if (fnorm <= cfg.eps) return finish(LmStatus::Converged);
        if (k >= cfg.max_iter) return finish(LmStatus::MaxIter);

        // V is fixed for this iteration; only alpha changes during re-solves.
        const Matrix V = system.jacobian(x);
        const double vnorm = V.norm();
        LmIteration it;
        it.residual = fnorm;
        it.alpha = alpha;

        auto try_step = [&](double a, Vector& d, Vector& Ftrial) {
            try {
                d = lm_step(V, Fx, a);
            } catch (const NotPositiveDefinite&) {
                return false;
            }
            Ftrial = system.residual(x + d);
            return Ftrial.allFinite() && Ftrial.norm() < fnorm;
        };

        Vector d, Ftrial;
        if (try_step(alpha, d, Ftrial)) {
            it.alpha_next = std::max(cfg.decrease_factor * alpha, cfg.alpha_floor);
        } else {
            bool success = false;
            for (int tries = 1; tries <= cfg.max_inner_tries; ++tries) {
                alpha *= cfg.increase_factor;
                it.resolves = tries;
                const bool ok = try_step(alpha, d, Ftrial);
                if (ok) {
                    success = true;
                    break;
                }
                // ||d|| < eps / ||V||_F (an all-zero V always trips it).
                if (d.size() > 0 && d.norm() * vnorm < cfg.eps) break;
            }
            if (!success) {
                it.accepted = false;
                it.step_norm = d.size() > 0 ? d.norm() : 0.0;
                it.alpha_next = alpha;
                it.residual_next = fnorm;
                result.log.push_back(it);
                return finish(LmStatus::SafeguardStop);
            }
            it.alpha_next = alpha;
        }
        x += d;
        Fx = std::move(Ftrial);
        fnorm = Fx.norm();
        it.residual_next = fnorm;
        it.step_norm = d.norm();
        result.log.push_back(it);
        alpha = it.alpha_next;
        ++result.iterations;
    }
}

}  // namespace gnep
