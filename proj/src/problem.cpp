#include "qnewton/problem.hpp"

#include <cmath>

#include "qnewton/errors.hpp"

namespace qnewton {
namespace {

void check_dim(const Problem& p, const Vector& x) {
    if (x.size() != p.domain_dim) {
        throw InvalidInput(p.name + ": expected x of dimension " + std::to_string(p.domain_dim) +
                           ", got " + std::to_string(x.size()));
    }
}

Matrix central_difference_jacobian(const Problem& p, const Vector& x, const DerivativeMode& mode) {
    Matrix jac(p.codomain_dim, p.domain_dim);
    Vector xp = x;
    Vector xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = mode.step(x(i));
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        // the actual spacing, after rounding of x +- h
        const double span = xp(i) - xm(i);
        jac.col(i) = (eval_residual(p, xp) - eval_residual(p, xm)) / span;
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return jac;
}

}  // namespace

double DerivativeMode::step(double xi) const { return step_scale * (1.0 + std::abs(xi)); }

Vector eval_residual(const Problem& p, const Vector& x) {
    check_dim(p, x);
    Vector out = p.residual(x);
    if (out.size() != p.codomain_dim) throw EvaluationError(p.name + ": residual has wrong dimension");
    if (!out.allFinite()) throw EvaluationError(p.name + ": residual is not finite");
    return out;
}

double eval_f(const Problem& p, const Vector& x) { return eval_residual(p, x).squaredNorm(); }

Matrix jacobian(const Problem& p, const Vector& x, DerivativeMode mode) {
    check_dim(p, x);
    if (mode.kind == DerivativeMode::Kind::Analytic && p.jacobian) {
        Matrix jac = p.jacobian(x);
        if (jac.rows() != p.codomain_dim || jac.cols() != p.domain_dim)
            throw EvaluationError(p.name + ": jacobian has wrong shape");
        if (!jac.allFinite()) throw EvaluationError(p.name + ": jacobian is not finite");
        return jac;
    }
    return central_difference_jacobian(p, x, mode);
}

Vector grad_f(const Problem& p, const Vector& x, DerivativeMode mode) {
    return 2.0 * jacobian(p, x, mode).transpose() * eval_residual(p, x);
}

SymMatrix residual_curvature(const Problem& p, const Vector& x, DerivativeMode mode) {
    if (mode.kind == DerivativeMode::Kind::Analytic) {
        if (!p.component_hessians) throw MissingDerivative(p.name + ": no analytic component Hessians");
        const Vector fx = eval_residual(p, x);
        const std::vector<SymMatrix> hs = p.component_hessians(x);
        if (static_cast<int>(hs.size()) != p.codomain_dim)
            throw EvaluationError(p.name + ": wrong number of component Hessians");
        Matrix acc = Matrix::Zero(p.domain_dim, p.domain_dim);
        for (int i = 0; i < p.codomain_dim; ++i) acc += fx(i) * hs[i].matrix();
        return SymMatrix(acc);
    }
    const Matrix jac = jacobian(p, x);
    return SymMatrix(hess_f(p, x, mode).matrix() * 0.5 - jac.transpose() * jac);
}

SymMatrix hess_f(const Problem& p, const Vector& x, DerivativeMode mode) {
    check_dim(p, x);
    if (mode.kind == DerivativeMode::Kind::Analytic) {
        const Matrix jac = jacobian(p, x, mode);
        const SymMatrix curv = residual_curvature(p, x, mode);
        return SymMatrix(2.0 * (jac.transpose() * jac + curv.matrix()));
    }
    Matrix h(p.domain_dim, p.domain_dim);
    Vector xp = x;
    Vector xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = mode.step(x(i));
        xp(i) = x(i) + step;
        xm(i) = x(i) - step;
        h.col(i) = (grad_f(p, xp) - grad_f(p, xm)) / (xp(i) - xm(i));
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return SymMatrix(h);
}

}  // namespace qnewton
