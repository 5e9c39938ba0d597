#include "qnewton/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qnewton/diagnostics.hpp"
#include "qnewton/errors.hpp"

namespace qnewton {
namespace {

constexpr double kSingularRelTol = 1e-14;
constexpr double kBasisTol = 1e-10;

double min_pairwise_gap(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    return gap;
}

std::size_t ladder_length(Method method, int dim) {
    return method == Method::LmM ? 2 : static_cast<std::size_t>(dim) + 1;
}

// Errors used for the order fit: distance to the known root the run landed
// on, else ||F||. Only the strictly decreasing positive tail is kept.
std::optional<double> fit_order(const Problem& p, const std::vector<TraceRecord>& trace, const Vector& final_x) {
    const Vector* root = nullptr;
    for (const Vector& r : p.known_roots) {
        if ((r - final_x).norm() <= 1e-6) root = &r;
    }
    std::vector<double> errors;
    for (const TraceRecord& rec : trace) {
        const double e = root ? (rec.x - *root).norm() : std::sqrt(rec.f_val);
        if (!(e > 0.0)) break;
        errors.push_back(e);
    }
    std::size_t start = errors.empty() ? 0 : errors.size() - 1;
    while (start > 0 && errors[start - 1] > errors[start]) --start;
    try {
        return estimate_order(std::vector<double>(errors.begin() + static_cast<std::ptrdiff_t>(start), errors.end()));
    } catch (const InsufficientData&) {
        return std::nullopt;
    }
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::NqnSe: return "nqn-se";
        case Method::LmM: return "lm-m";
        case Method::General: return "general";
        case Method::NewtonBaseline: return "newton";
    }
    return "?";
}

std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::FullNorm: return "FullNorm";
        case Branch::TauNorm: return "TauNorm";
        case Branch::None: return "None";
    }
    return "?";
}

std::string_view to_string(Basis b) { return b == Basis::Standard ? "standard" : "eigen"; }

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::RootFound: return "RootFound";
        case Termination::CriticalNonRoot: return "CriticalNonRoot";
        case Termination::MaxIterations: return "MaxIterations";
        case Termination::Diverged: return "Diverged";
        case Termination::LineSearchStalled: return "LineSearchStalled";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view s) {
    for (Method m : {Method::NqnSe, Method::LmM, Method::General, Method::NewtonBaseline}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::optional<Basis> parse_basis(std::string_view s) {
    if (s == "standard") return Basis::Standard;
    if (s == "eigen") return Basis::EigenOfA;
    return std::nullopt;
}

DeltaLadder::DeltaLadder(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ConfigError("deltas", "need at least two entries");
    for (double d : values_) {
        if (!(std::isfinite(d) && d > 0.0)) throw ConfigError("deltas", "entries must be positive and finite");
    }
    const double gap = min_pairwise_gap(values_);
    if (gap < kMinGap) throw ConfigError("deltas", "pairwise gaps must be >= 1e-3");
    kappa_ = gap / 2.0;
}

DeltaLadder DeltaLadder::random(std::size_t count, Rng& rng) {
    std::vector<double> values(count);
    for (;;) {
        for (double& v : values) v = rng.uniform(1.0, 2.0);
        if (count < 2 || min_pairwise_gap(values) >= kMinGap) return DeltaLadder(values);
    }
}

void validate(const SolverConfig& c, const Problem& p) {
    const bool square = p.is_square();
    if (c.method == Method::NewtonBaseline && !square)
        throw ConfigError("method", "newton baseline needs a square system");
    if (!(std::isfinite(c.tau) && c.tau > 0.0)) throw ConfigError("tau", "must be positive");
    if (c.tau >= 1.0 && !c.allow_tau_ge_one)
        throw ConfigError("tau", "must lie in (0, 1); pass --allow-tau-ge-one to override");
    if (c.deltas) {
        const std::size_t need = ladder_length(c.method, p.domain_dim);
        if (c.method == Method::LmM && c.deltas->size() != 2)
            throw ConfigError("deltas", "lm-m takes exactly two deltas");
        if (c.method != Method::LmM && c.deltas->size() < need)
            throw ConfigError("deltas", "need at least m + 1 = " + std::to_string(need) + " entries");
    }
    const LineSearchPolicy& ls = c.line_search;
    if (ls.beta && !(*ls.beta > 0.0 && *ls.beta < 1.0)) throw ConfigError("beta", "must lie in (0, 1)");
    if (ls.eta && !(*ls.eta > 0.0 && *ls.eta < 1.0)) throw ConfigError("eta", "must lie in (0, 1)");
    if (c.det_guard) {
        if (!(*c.det_guard >= 0.0)) throw ConfigError("det_eps", "must be non-negative");
        if (!square) throw ConfigError("det_eps", "determinant guard needs a square system");
    }
    if (!(c.q >= 1.0)) throw ConfigError("q", "must be >= 1");
    if (!(c.tol_root > 0.0)) throw ConfigError("tol_root", "must be positive");
    if (!(c.tol_crit > 0.0)) throw ConfigError("tol_crit", "must be positive");
    if (c.max_iter <= 0) throw ConfigError("max_iter", "must be positive");
    if (!(c.gamma_min > 0.0 && c.gamma_min <= 1.0)) throw ConfigError("gamma_min", "must lie in (0, 1]");
    if (!(c.divergence_radius > 0.0)) throw ConfigError("divergence_radius", "must be positive");
    if (!(c.derivatives.step_scale > 0.0)) throw ConfigError("derivatives", "step scale must be positive");
}

Regularization regularize_nqnse(const SymMatrix& hess, double norm_f, const DeltaLadder& ladder, double tau) {
    if (!(norm_f > 0.0)) throw InvalidInput("regularize: ||F|| must be positive");
    Regularization reg;
    if (minsp(hess) > std::pow(norm_f, tau)) {
        reg.branch = Branch::FullNorm;
        reg.scale = norm_f;
    } else {
        reg.branch = Branch::TauNorm;
        reg.scale = std::pow(norm_f, tau);
    }
    const double floor = ladder.kappa() * reg.scale;
    for (std::size_t j = 0; j < ladder.size(); ++j) {
        SymMatrix a = hess.shifted(ladder[j] * reg.scale);
        const double sp = minsp(a);
        if (sp >= floor) {
            reg.a = std::move(a);
            reg.index = static_cast<int>(j);
            reg.minsp_a = sp;
            return reg;
        }
    }
    throw RegularizationFailed("every ladder shift left minsp(A) below kappa * scale");
}

Regularization regularize_lmm(const SymMatrix& hth, double norm_f, const DeltaLadder& ladder, double tau) {
    if (!(norm_f > 0.0)) throw InvalidInput("regularize: ||F|| must be positive");
    if (ladder.size() != 2) throw InvalidInput("lm-m ladder must have exactly two entries");
    Regularization reg;
    if (minsp(hth) > std::pow(norm_f, tau)) {
        reg.branch = Branch::FullNorm;
        reg.scale = norm_f;
        reg.index = 0;
    } else {
        reg.branch = Branch::TauNorm;
        reg.scale = std::pow(norm_f, tau);
        reg.index = 1;
    }
    reg.a = hth.shifted(ladder[static_cast<std::size_t>(reg.index)] * reg.scale);
    reg.minsp_a = minsp(reg.a);
    return reg;
}

Direction clamp_direction(Vector w) {
    Direction d;
    d.w_hat = w / std::max(1.0, w.norm());
    d.w = std::move(w);
    return d;
}

Direction direction_nqnse(const SymMatrix& a, const Vector& grad_half) {
    return clamp_direction(reflected_solve(a, grad_half));
}

Direction direction_lmm(const SymMatrix& a, const Vector& grad_half) {
    if (grad_half.size() != a.dim()) throw InvalidInput("direction: dimension mismatch");
    Eigen::LLT<Matrix> llt(a.matrix());
    if (llt.info() != Eigen::Success) throw SingularMatrix("lm-m: A is not positive definite");
    return clamp_direction(llt.solve(grad_half));
}

Direction direction_general(const SymMatrix& a, const Vector& grad, const Matrix& basis, double q) {
    const Eigen::Index m = a.dim();
    if (grad.size() != m || basis.rows() != m || basis.cols() != m)
        throw InvalidInput("direction_general: dimension mismatch");
    if (!(q >= 1.0)) throw InvalidInput("direction_general: q must be >= 1");
    if ((basis.transpose() * basis - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > kBasisTol)
        throw InvalidInput("direction_general: basis is not orthonormal");

    // coords(j, i) = <A e_i, e_j>
    const Matrix coords = basis.transpose() * a.matrix() * basis;
    const double floor = kSingularRelTol * std::max(1.0, a.frobenius_norm());
    Vector w = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector col = coords.col(i).cwiseAbs();
        const double peak = col.maxCoeff();
        double weight = 0.0;
        if (peak > 0.0) {
            const double sum = (col / peak).array().pow(q).sum();
            weight = peak * std::pow(sum, 1.0 / q);
        }
        if (weight <= floor) throw SingularMatrix("direction_general: zero basis weight");
        w += (grad.dot(basis.col(i)) / weight) * basis.col(i);
    }
    return clamp_direction(std::move(w));
}

Direction method_direction(const Problem& p, const SolverConfig& config, const DeltaLadder& ladder, const Vector& x,
                           const Matrix& jac, double norm_f, const Vector& grad_half, Regularization& reg) {
    const DerivativeMode mode = config.derivatives;
    switch (config.method) {
        case Method::NqnSe:
            // Hess f / 2 = H^T H + sum F_i Hess(F_i) pairs with H^T F = grad f / 2, so
            // that A = H^T H + O(||F||) near a non-degenerate root.
            reg = regularize_nqnse(SymMatrix(0.5 * hess_f(p, x, mode).matrix()), norm_f, ladder, config.tau);
            return direction_nqnse(reg.a, grad_half);
        case Method::LmM:
            reg = regularize_lmm(SymMatrix(jac.transpose() * jac), norm_f, ladder, config.tau);
            return direction_lmm(reg.a, grad_half);
        case Method::General: {
            reg = regularize_nqnse(hess_f(p, x, mode), norm_f, ladder, config.tau);
            const Matrix basis = config.basis == Basis::EigenOfA ? eigh(reg.a).eigenvectors
                                                                : Matrix::Identity(p.domain_dim, p.domain_dim);
            // the weighted scheme is driven by grad f = 2 H^T F
            return direction_general(reg.a, 2.0 * grad_half, basis, config.q);
        }
        case Method::NewtonBaseline: break;
    }
    throw InvalidInput("method_direction: newton baseline has no regularized direction");
}

Vector newton_baseline_step(const Problem& p, const Vector& x, DerivativeMode mode) {
    if (!p.is_square()) throw InvalidInput("newton baseline needs a square system");
    const Matrix jac = jacobian(p, x, mode);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw SingularMatrix("newton baseline: singular Jacobian");
    return x - lu.solve(eval_residual(p, x));
}

RunResult solve(const Problem& p, const SolverConfig& config, const Vector& x0, const IterationObserver& observer) {
    validate(config, p);
    if (x0.size() != p.domain_dim) throw InvalidInput("x0 has the wrong dimension");

    RunResult result;
    result.seed = config.rng_seed;
    Rng rng(config.rng_seed);

    std::optional<DeltaLadder> ladder;
    if (config.method != Method::NewtonBaseline) {
        ladder = config.deltas ? *config.deltas : DeltaLadder::random(ladder_length(config.method, p.domain_dim), rng);
        result.deltas = ladder->values();
    }

    GridSearch grid;
    grid.gamma_min = config.gamma_min;
    grid.det_eps = config.det_guard;
    if (config.line_search.kind == LineSearchPolicy::Kind::BetaGrid) {
        grid.beta = config.line_search.beta ? *config.line_search.beta : rng.uniform(0.2, 0.8);
    }
    if (config.method != Method::NewtonBaseline) result.beta = grid.beta;

    const DerivativeMode mode = config.derivatives;
    Vector x = x0;
    for (int k = 0;; ++k) {
        const Vector fx = eval_residual(p, x);
        const Matrix jac = jacobian(p, x, mode);
        const Vector grad_half = jac.transpose() * fx;
        const double norm_f = fx.norm();

        TraceRecord rec;
        rec.k = k;
        rec.x = x;
        rec.f_val = fx.squaredNorm();
        rec.grad_half_norm = grad_half.norm();

        std::optional<Termination> stop;
        if (norm_f <= config.tol_root) stop = Termination::RootFound;
        // relative to ||F|| so that fast convergence to a root is not cut short
        else if (rec.grad_half_norm <= config.tol_crit * std::min(1.0, norm_f)) stop = Termination::CriticalNonRoot;
        else if (x.norm() >= config.divergence_radius) stop = Termination::Diverged;
        else if (k >= config.max_iter) stop = Termination::MaxIterations;
        if (stop) {
            result.termination = *stop;
            result.trace.push_back(std::move(rec));
            break;
        }

        if (config.method == Method::NewtonBaseline) {
            Vector next = newton_baseline_step(p, x, mode);
            rec.gamma = 1.0;
            rec.step_norm = (next - x).norm();
            if (observer) {
                IterationProbe probe;
                probe.k = k;
                probe.x = &x;
                probe.grad_half = &grad_half;
                probe.f_x = rec.f_val;
                probe.x_next = &next;
                observer(probe);
            }
            result.trace.push_back(std::move(rec));
            x = std::move(next);
            continue;
        }

        Regularization reg;
        const Direction dir = method_direction(p, config, *ladder, x, jac, norm_f, grad_half, reg);
        rec.delta_index = reg.index;
        rec.branch = reg.branch;
        rec.minsp_a = reg.minsp_a;

        StepChoice step;
        try {
            if (config.line_search.eta) {
                step = hybrid_eta_gate(p, x, dir, grad_half, *config.line_search.eta, grid);
            } else {
                step.gamma = armijo_search(p, x, rec.f_val, dir.w_hat, grad_half, grid);
            }
        } catch (const LineSearchStalled&) {
            result.termination = Termination::LineSearchStalled;
            result.trace.push_back(std::move(rec));
            break;
        }
        if (!step.gated && !armijo_holds(p, x, rec.f_val, dir.w_hat, grad_half, step.gamma))
            throw std::logic_error("line search returned a step violating the Armijo condition");

        Vector next = x - step.gamma * (step.gated ? dir.w : dir.w_hat);
        rec.gamma = step.gamma;
        rec.step_norm = (next - x).norm();
        if (observer) {
            IterationProbe probe;
            probe.k = k;
            probe.x = &x;
            probe.grad_half = &grad_half;
            probe.regularization = &reg;
            probe.direction = &dir;
            probe.f_x = rec.f_val;
            probe.kappa = ladder->kappa();
            probe.step = step;
            probe.x_next = &next;
            observer(probe);
        }
        result.trace.push_back(std::move(rec));
        x = std::move(next);
    }

    result.final_x = x;
    if (result.termination == Termination::RootFound) result.order_estimate = fit_order(p, result.trace, x);
    return result;
}

}  // namespace qnewton
