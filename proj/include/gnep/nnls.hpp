#pragma once

#include "gnep/model.hpp"

#include <stdexcept>

namespace gnep {

class NnlsIterationLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nonnegative least squares: argmin_{lambda >= 0} ||A lambda - b||_2.
///
/// Lawson-Hanson active-set method. The returned point satisfies
/// lambda >= 0, A^T(A lambda - b) >= 0 on the zero set and = 0 on the positive
/// set, up to rounding. Throws NnlsIterationLimit after 10 * cols outer
/// iterations.
Vector nnls(const Matrix& A, const Vector& b);

}  // namespace gnep
