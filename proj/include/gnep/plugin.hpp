#pragma once

#include "gnep/model.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnep {

/// Problem-file syntax error with a 1-based source location.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct Monomial {
    double coefficient = 0.0;
    std::vector<int> exponents;  // one per variable
};

/// Sparse multivariate polynomial in x1..xn with exact derivatives.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::size_t vars, std::vector<Monomial> terms);

    std::size_t vars() const { return vars_; }
    const std::vector<Monomial>& terms() const { return terms_; }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    Matrix hessian(const Vector& x) const;

    /// Terms sorted by exponent tuple with duplicates merged and zeros dropped.
    Polynomial canonical() const;
    bool structurally_equal(const Polynomial& other) const;

private:
    std::size_t vars_ = 0;
    std::vector<Monomial> terms_;
};

struct PluginProblem {
    GnepProblem problem;
    std::map<std::string, Vector> presets;
};

/// Parses the declarative polynomial problem format:
///
///   # comment
///   name duopoly_shared
///   dims 1 1
///   shared
///   preset start 0 0
///   player
///     theta 1 (2,0) + -2 (1,0) + 1 (0,0)
///     g     1 (1,0) + 1 (0,1) + -1 (0,0)
///   player
///     ...
///
/// Each term is `coefficient (e1,...,en)`; terms are joined with `+`. Every
/// player needs exactly one `theta` line and any number of `g`/`h` lines (one
/// constraint component each). `shared` requires identical g and h lists.
PluginProblem parse_problem_plugin(const std::string& text, const std::string& source = "<input>");

PluginProblem load_problem_plugin(const std::string& path);

}  // namespace gnep
