#pragma once

#include "gnep/model.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace gnep {

class NotPositiveDefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LmConfig {
    double alpha0 = 1.0;
    double decrease_factor = 0.1;
    double increase_factor = 10.0;
    double alpha_floor = 1e-16;
    double eps = 1e-8;
    int max_iter = 200;
    int max_inner_tries = 50;

    void validate() const;
};

enum class LmStatus { Converged, SafeguardStop, MaxIter };

const char* to_string(LmStatus status);

/// One accepted (or final, rejected) LM iteration.
struct LmIteration {
    double residual = 0.0;       // ||F(x_k)||
    double residual_next = 0.0;  // ||F(x_k + d_k)|| of the accepted trial
    double alpha = 0.0;          // alpha_k on entry to (S.2)
    double alpha_next = 0.0;     // alpha_{k+1}
    int resolves = 0;            // number of (S.3) increases
    double step_norm = 0.0;
    bool accepted = true;
};

struct LmResult {
    Vector x;
    int iterations = 0;
    double final_residual = 0.0;
    LmStatus status = LmStatus::MaxIter;
    std::vector<LmIteration> log;
};

/// Residual map F and a generalized Jacobian element at a point.
struct LmSystem {
    std::function<Vector(const Vector&)> residual;
    std::function<Matrix(const Vector&)> jacobian;
};

/// Solves M sol = rhs for symmetric positive definite M (LDL' factorization).
/// Throws NotPositiveDefinite on a non-positive pivot and
/// std::invalid_argument when M is not symmetric to 1e-12.
Vector spd_solve(const Matrix& M, const Vector& rhs);

/// Damped step (V^T V + alpha ||Fx|| I) d = -V^T Fx. Returns zero when Fx = 0.
Vector lm_step(const Matrix& V, const Vector& Fx, double alpha);

/// Levenberg-Marquardt iteration for F(x) = 0 with multiplicative damping
/// updates and the ||d|| < eps / ||V||_F safeguard in the re-solve loop.
LmResult lm_solve(const LmSystem& system, const Vector& x0, const LmConfig& cfg);

}  // namespace gnep
