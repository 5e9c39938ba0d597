#pragma once

#include <cmath>
#include <functional>

#include "qnewton/problem.hpp"
#include "qnewton/rng.hpp"

namespace testing {

using qnewton::Matrix;
using qnewton::Problem;
using qnewton::SymMatrix;
using qnewton::Vector;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// One-dimensional F with analytic first and second derivatives.
inline Problem scalar_problem(std::function<double(double)> f, std::function<double(double)> df,
                              std::function<double(double)> d2f) {
    Problem p;
    p.name = "scalar";
    p.domain_dim = p.codomain_dim = 1;
    p.residual = [f](const Vector& x) { return vec({f(x(0))}); };
    p.jacobian = [df](const Vector& x) { return Matrix::Constant(1, 1, df(x(0))); };
    p.component_hessians = [d2f](const Vector& x) {
        return std::vector<SymMatrix>{SymMatrix(Matrix::Constant(1, 1, d2f(x(0))))};
    };
    p.default_start = vec({0.0});
    return p;
}

inline Problem linear_problem(const Matrix& a) {
    Problem p;
    p.name = "linear";
    p.domain_dim = static_cast<int>(a.cols());
    p.codomain_dim = static_cast<int>(a.rows());
    p.residual = [a](const Vector& x) -> Vector { return a * x; };
    p.jacobian = [a](const Vector&) { return a; };
    p.component_hessians = [a](const Vector&) {
        return std::vector<SymMatrix>(static_cast<std::size_t>(a.rows()), SymMatrix(Matrix::Zero(a.cols(), a.cols())));
    };
    p.default_start = Vector::Ones(a.cols());
    return p;
}

// Plain bisection on a sign change, independent of every solver in the library.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
    double glo = g(lo);
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double gm = g(mid);
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Random symmetric matrix with a prescribed mixed-sign spectrum bounded away from 0.
inline SymMatrix random_symmetric(int n, qnewton::Rng& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector lam(n);
    for (int i = 0; i < n; ++i) {
        const double mag = rng.uniform(0.1, 5.0);
        lam(i) = rng.uniform() < 0.5 ? -mag : mag;
    }
    return SymMatrix(q * lam.asDiagonal() * q.transpose());
}

inline Vector random_vector(int n, qnewton::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

}  // namespace testing
