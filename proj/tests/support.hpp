#pragma once

#include "gnep/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace gnep::testing {

// Scalar function with its first two derivatives.
struct Fn1 {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
};

inline Fn1 constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

inline Fn1 linear(double a, double b = 0.0) {
    return {[a, b](double x) { return a * x + b; }, [a](double) { return a; }, [](double) { return 0.0; }};
}

inline Fn1 quadratic(double a, double b, double c) {
    return {[=](double x) { return a * x * x + b * x + c; }, [=](double x) { return 2 * a * x + b; },
            [=](double) { return 2 * a; }};
}

// Single player, one variable: min theta(x) s.t. g_i(x) <= 0.
inline GnepProblem one_dim(const Fn1& theta, const std::vector<Fn1>& g = {},
                           const std::string& name = "one_dim") {
    PlayerSpec p;
    p.dim = 1;
    p.objective.value = [theta](const Vector& x) { return theta.f(x[0]); };
    p.objective.gradient = [theta](const Vector& x) { return Vector::Constant(1, theta.df(x[0])); };
    p.objective.hessian_rows = [theta](const Vector& x) { return Matrix::Constant(1, 1, theta.d2f(x[0])); };
    p.g.count = g.size();
    p.g.value = [g](const Vector& x) {
        Vector v(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) v[static_cast<Eigen::Index>(i)] = g[i].f(x[0]);
        return v;
    };
    p.g.gradients = [g](const Vector& x) {
        Matrix m(1, static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = g[i].df(x[0]);
        return m;
    };
    p.g.hessian_rows = [g](const Vector& x) {
        std::vector<Matrix> out;
        for (const auto& gi : g) out.push_back(Matrix::Constant(1, 1, gi.d2f(x[0])));
        return out;
    };
    return GnepProblem(name, {p});
}

inline Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double d : values) v[i++] = d;
    return v;
}

inline Vector uniform_point(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(rng);
    return x;
}

// Central difference of a scalar map along coordinate i.
inline double central_diff(const std::function<double(const Vector&)>& f, const Vector& x,
                           Eigen::Index i, double h = 1e-6) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (f(xp) - f(xm)) / (2 * h);
}

inline double rel_err(double a, double ref) { return std::abs(a - ref) / std::max(1.0, std::abs(ref)); }

}  // namespace gnep::testing
