#pragma once

#include "gnep/model.hpp"

#include <vector>

namespace gnep {

struct KktResidual {
    double stationarity = 0.0;     // ||grad theta + grad c * (lambda, mu)||_inf
    double complementarity = 0.0;  // ||min{-c, (lambda, mu)}||_inf
};

/// Per-player KKT residuals with c = (g, h).
std::vector<KktResidual> kkt_residual(const GnepProblem& problem, const Vector& x,
                                      const MultiplierSet& multipliers);

/// Per-player KKT residual of the Feasibility GNEP, in which player nu
/// minimizes ||g^nu_+(x)||^2 subject to h^nu(x) <= 0. `mu_hat` holds one
/// vector per player (length p_nu); an empty list means all-zero.
std::vector<double> feasibility_gnep_residual(const GnepProblem& problem, const Vector& x,
                                              const std::vector<Vector>& mu_hat = {});

struct PositiveIndependence {
    bool independent = false;
    double sigma = 0.0;  // min ||V w|| over the unit simplex
    Vector weights;      // minimizing simplex weights
};

/// Decides positive linear independence of the columns of V via
/// sigma = min{ ||V w|| : w >= 0, sum w = 1 }; Dependent iff sigma <= tol.
PositiveIndependence positive_linear_independence(const Matrix& V, double tol = 1e-8);

enum class EmfcqStatus { Holds, Fails, Inconclusive };

const char* to_string(EmfcqStatus status);

struct EmfcqVerdict {
    EmfcqStatus status = EmfcqStatus::Inconclusive;
    std::vector<std::size_t> considered;  // indices into c^nu = (g^nu, h^nu)
    Vector direction;                     // d^nu when Holds
    Vector weights;                       // certificate when Fails
    double sigma = 0.0;
};

/// Player-wise extended MFCQ at x for c^nu = (g^nu, h^nu), using constraints
/// with c_i(x) >= -tol.
EmfcqVerdict emfcq_check(const GnepProblem& problem, std::size_t player, const Vector& x,
                         double tol = 1e-8);

enum class PointClass { FeasibleKKT, InfeasibleStationary, Neither };

const char* to_string(PointClass c);

/// Max over players of ||c^nu_+(x)||_inf.
double max_violation(const GnepProblem& problem, const Vector& x);

PointClass classify_point(const GnepProblem& problem, const Vector& x,
                          const MultiplierSet& multipliers, double eps, double eps_feas);

}  // namespace gnep
