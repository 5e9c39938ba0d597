#pragma once

// Equation systems F : R^m -> R^m' and the derived least-squares objective
// f(x) = ||F(x)||^2 with its gradient 2 H^T F and Hessian
// 2 (H^T H + sum_i F_i Hess(F_i)), where H = JF.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnewton/spectral.hpp"

namespace qnewton {

struct Problem {
    using Residual = std::function<Vector(const Vector&)>;
    using Jacobian = std::function<Matrix(const Vector&)>;
    using ComponentHessians = std::function<std::vector<SymMatrix>(const Vector&)>;

    std::string name;
    int domain_dim = 0;
    int codomain_dim = 0;
    Residual residual;
    Jacobian jacobian;                     // optional, m' x m
    ComponentHessians component_hessians;  // optional, m' matrices of size m x m
    std::vector<Vector> known_roots;       // diagnostics only
    Vector default_start;                  // used by the CLI when --x0 is absent

    bool is_square() const noexcept { return domain_dim == codomain_dim; }
};

struct DerivativeMode {
    enum class Kind { Analytic, CentralDifference };

    Kind kind = Kind::Analytic;
    // Central-difference step for coordinate i is step_scale * (1 + |x_i|).
    double step_scale = 6.0554544523933395e-06;  // cbrt(DBL_EPSILON)

    static DerivativeMode analytic() { return {}; }
    static DerivativeMode central_difference() { return {Kind::CentralDifference}; }

    double step(double xi) const;
};

Vector eval_residual(const Problem& p, const Vector& x);

// f(x) = ||F(x)||^2.
double eval_f(const Problem& p, const Vector& x);

// m' x m Jacobian. Analytic mode falls back to central differences when the
// problem has no analytic Jacobian.
Matrix jacobian(const Problem& p, const Vector& x, DerivativeMode mode = {});

// 2 H^T F, always through the product (never by differencing f).
Vector grad_f(const Problem& p, const Vector& x, DerivativeMode mode = {});

// Analytic: 2 (H^T H + sum F_i Hess(F_i)); throws MissingDerivative without
// component Hessians. CentralDifference: symmetrized differences of grad_f.
SymMatrix hess_f(const Problem& p, const Vector& x, DerivativeMode mode = {});

// sum_i F_i(x) Hess(F_i)(x), the curvature part of hess_f / 2.
SymMatrix residual_curvature(const Problem& p, const Vector& x, DerivativeMode mode = {});

// Built-in test problems.
std::vector<Problem> corpus();
std::optional<Problem> find_problem(std::string_view name);
std::vector<std::string> corpus_names();

// Unique real root of x^3 - 2x + 2.
double newton_cycle_real_root();

}  // namespace qnewton
