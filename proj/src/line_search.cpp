#include <cmath>
#include <limits>

#include "qnewton/errors.hpp"
#include "qnewton/solvers.hpp"

namespace qnewton {
namespace {

// Trial points whose residual overflows simply fail the acceptance test.
double trial_f(const Problem& p, const Vector& x) {
    try {
        return eval_f(p, x);
    } catch (const EvaluationError&) {
        return std::numeric_limits<double>::infinity();
    }
}

bool det_clears(const Problem& p, const Vector& x, double eps) {
    try {
        return std::abs(jacobian(p, x).determinant()) > eps;
    } catch (const EvaluationError&) {
        return false;
    }
}

void require_descent_direction(const Vector& w_hat, const Vector& grad_half) {
    if (w_hat.size() != grad_half.size()) throw InvalidInput("line search: dimension mismatch");
    if (!(w_hat.dot(grad_half) > 0.0)) throw InvalidInput("line search: <w_hat, H^T F> must be positive");
}

}  // namespace

bool armijo_holds(const Problem& p, const Vector& x, double f_x, const Vector& w_hat,
                  const Vector& grad_half, double gamma) {
    const double f_new = trial_f(p, x - gamma * w_hat);
    return f_new - f_x <= -gamma * w_hat.dot(grad_half);
}

double armijo_search(const Problem& p, const Vector& x, double f_x, const Vector& w_hat,
                     const Vector& grad_half, const GridSearch& grid) {
    require_descent_direction(w_hat, grad_half);
    if (!(grid.beta > 0.0 && grid.beta < 1.0)) throw InvalidInput("line search: beta must lie in (0, 1)");
    if (grid.det_eps && !p.is_square()) throw InvalidInput("determinant guard needs a square system");
    for (double gamma = 1.0; gamma >= grid.gamma_min; gamma *= grid.beta) {
        if (!armijo_holds(p, x, f_x, w_hat, grad_half, gamma)) continue;
        if (grid.det_eps && !det_clears(p, x - gamma * w_hat, *grid.det_eps)) continue;
        return gamma;
    }
    throw LineSearchStalled("no step size above gamma_min satisfies the acceptance test");
}

double armijo_halving(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                      double gamma_min) {
    return armijo_search(p, x, eval_f(p, x), w_hat, grad_half, {0.5, gamma_min, std::nullopt});
}

double armijo_beta_grid(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                        double beta, double gamma_min) {
    return armijo_search(p, x, eval_f(p, x), w_hat, grad_half, {beta, gamma_min, std::nullopt});
}

double det_guard_search(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                        double epsilon, const GridSearch& inner) {
    if (epsilon < 0.0) throw InvalidInput("determinant guard epsilon must be non-negative");
    GridSearch grid = inner;
    grid.det_eps = epsilon;
    return armijo_search(p, x, eval_f(p, x), w_hat, grad_half, grid);
}

StepChoice hybrid_eta_gate(const Problem& p, const Vector& x, const Direction& dir, const Vector& grad_half,
                           double eta, const GridSearch& inner) {
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("hybrid gate: eta must lie in (0, 1)");
    const double f_x = eval_f(p, x);
    const Vector trial = x - dir.w;
    // squared norms on both sides: ||F(x - w)||^2 <= eta^2 ||F(x)||^2
    const bool contracts = trial_f(p, trial) <= eta * eta * f_x;
    if (contracts && (!inner.det_eps || det_clears(p, trial, *inner.det_eps))) return {1.0, true};
    return {armijo_search(p, x, f_x, dir.w_hat, grad_half, inner), false};
}

}  // namespace qnewton
