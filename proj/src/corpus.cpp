#include <cmath>

#include "qnewton/problem.hpp"

namespace qnewton {
namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double value : values) v(i++) = value;
    return v;
}

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

SymMatrix scalar(double value) { return SymMatrix(Matrix::Constant(1, 1, value)); }

// F(x) = x^2 - 2
Problem quad1d() {
    Problem p;
    p.name = "quad1d";
    p.domain_dim = p.codomain_dim = 1;
    p.residual = [](const Vector& x) { return vec({x(0) * x(0) - 2.0}); };
    p.jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 * x(0)); };
    p.component_hessians = [](const Vector&) { return std::vector<SymMatrix>{scalar(2.0)}; };
    p.known_roots = {vec({std::sqrt(2.0)}), vec({-std::sqrt(2.0)})};
    p.default_start = vec({2.0});
    return p;
}

// F(x) = 1 - x^2; x = 0 is a strong generalized saddle of f.
Problem saddle1d() {
    Problem p;
    p.name = "saddle1d";
    p.domain_dim = p.codomain_dim = 1;
    p.residual = [](const Vector& x) { return vec({1.0 - x(0) * x(0)}); };
    p.jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, -2.0 * x(0)); };
    p.component_hessians = [](const Vector&) { return std::vector<SymMatrix>{scalar(-2.0)}; };
    p.known_roots = {vec({1.0}), vec({-1.0})};
    p.default_start = vec({0.5});
    return p;
}

// F(x) = x^3 - 2x + 2; plain Newton from 0 cycles 0 -> 1 -> 0.
Problem newton_cycle() {
    Problem p;
    p.name = "newton_cycle";
    p.domain_dim = p.codomain_dim = 1;
    p.residual = [](const Vector& x) {
        const double t = x(0);
        return vec({t * t * t - 2.0 * t + 2.0});
    };
    p.jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, 3.0 * x(0) * x(0) - 2.0); };
    p.component_hessians = [](const Vector& x) { return std::vector<SymMatrix>{scalar(6.0 * x(0))}; };
    p.known_roots = {vec({newton_cycle_real_root()})};
    p.default_start = vec({0.0});
    return p;
}

// Real form of z^3 - 1 with z = x + iy.
Problem cubic2d() {
    Problem p;
    p.name = "cubic2d";
    p.domain_dim = p.codomain_dim = 2;
    p.residual = [](const Vector& v) {
        const double x = v(0);
        const double y = v(1);
        return vec({x * x * x - 3.0 * x * y * y - 1.0, 3.0 * x * x * y - y * y * y});
    };
    p.jacobian = [](const Vector& v) {
        const double x = v(0);
        const double y = v(1);
        const double d = 3.0 * x * x - 3.0 * y * y;
        return mat2(d, -6.0 * x * y, 6.0 * x * y, d);
    };
    p.component_hessians = [](const Vector& v) {
        const double x = v(0);
        const double y = v(1);
        return std::vector<SymMatrix>{SymMatrix(mat2(6.0 * x, -6.0 * y, -6.0 * y, -6.0 * x)),
                                      SymMatrix(mat2(6.0 * y, 6.0 * x, 6.0 * x, -6.0 * y))};
    };
    const double s = std::sqrt(3.0) / 2.0;
    p.known_roots = {vec({1.0, 0.0}), vec({-0.5, s}), vec({-0.5, -s})};
    p.default_start = vec({1.5, 0.7});
    return p;
}

// Two circles: x^2 + y^2 = 4 and (x - 1)^2 + y^2 = 2.
Problem circles2d() {
    Problem p;
    p.name = "circles2d";
    p.domain_dim = p.codomain_dim = 2;
    p.residual = [](const Vector& v) {
        const double x = v(0);
        const double y = v(1);
        return vec({x * x + y * y - 4.0, (x - 1.0) * (x - 1.0) + y * y - 2.0});
    };
    p.jacobian = [](const Vector& v) { return mat2(2.0 * v(0), 2.0 * v(1), 2.0 * (v(0) - 1.0), 2.0 * v(1)); };
    p.component_hessians = [](const Vector&) {
        return std::vector<SymMatrix>{SymMatrix::diagonal(vec({2.0, 2.0})), SymMatrix::diagonal(vec({2.0, 2.0}))};
    };
    const double y = std::sqrt(1.75);
    p.known_roots = {vec({1.5, y}), vec({1.5, -y})};
    p.default_start = vec({2.0, 1.0});
    return p;
}

// Rosenbrock residuals: F = (10 (y - x^2), 1 - x).
Problem rosen_sys() {
    Problem p;
    p.name = "rosen_sys";
    p.domain_dim = p.codomain_dim = 2;
    p.residual = [](const Vector& v) { return vec({10.0 * (v(1) - v(0) * v(0)), 1.0 - v(0)}); };
    p.jacobian = [](const Vector& v) { return mat2(-20.0 * v(0), 10.0, -1.0, 0.0); };
    p.component_hessians = [](const Vector&) {
        return std::vector<SymMatrix>{SymMatrix::diagonal(vec({-20.0, 0.0})), SymMatrix(Matrix::Zero(2, 2))};
    };
    p.known_roots = {vec({1.0, 1.0})};
    p.default_start = vec({-1.2, 1.0});
    return p;
}

// Overdetermined F : R -> R^2, F(x) = (x, x^2).
Problem overdet() {
    Problem p;
    p.name = "overdet";
    p.domain_dim = 1;
    p.codomain_dim = 2;
    p.residual = [](const Vector& x) { return vec({x(0), x(0) * x(0)}); };
    p.jacobian = [](const Vector& x) {
        Matrix j(2, 1);
        j << 1.0, 2.0 * x(0);
        return j;
    };
    p.component_hessians = [](const Vector&) { return std::vector<SymMatrix>{scalar(0.0), scalar(2.0)}; };
    p.known_roots = {vec({0.0})};
    p.default_start = vec({1.0});
    return p;
}

}  // namespace

double newton_cycle_real_root() {
    // Cardano for t^3 + p t + q with p = -2, q = 2.
    const double half_q = 1.0;
    const double disc = std::sqrt(half_q * half_q + std::pow(-2.0 / 3.0, 3));
    return std::cbrt(-half_q + disc) + std::cbrt(-half_q - disc);
}

std::vector<Problem> corpus() {
    return {quad1d(), saddle1d(), newton_cycle(), cubic2d(), circles2d(), rosen_sys(), overdet()};
}

std::optional<Problem> find_problem(std::string_view name) {
    for (Problem& p : corpus()) {
        if (p.name == name) return std::move(p);
    }
    return std::nullopt;
}

std::vector<std::string> corpus_names() {
    std::vector<std::string> names;
    for (const Problem& p : corpus()) names.push_back(p.name);
    return names;
}

}  // namespace qnewton
