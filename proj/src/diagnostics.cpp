#include "qnewton/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include "qnewton/errors.hpp"

namespace qnewton {
namespace {

constexpr double kOrderLo = 1e-13;
constexpr double kOrderHi = 1e-2;
constexpr double kCenterRadius = 1e-4;
constexpr double kRootMatch = 1e-6;

double standard_normal(Rng& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform point in the closed ball, the center itself redrawn when radius > 0.
Vector sample_ball(const Vector& center, double radius, Rng& rng) {
    const Eigen::Index m = center.size();
    if (radius <= 0.0) return center;
    for (;;) {
        Vector offset(m);
        if (m == 1) {
            offset(0) = radius * (2.0 * rng.uniform() - 1.0);
        } else {
            for (Eigen::Index i = 0; i < m; ++i) offset(i) = standard_normal(rng);
            const double norm = offset.norm();
            if (norm == 0.0) continue;
            offset *= radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(m)) / norm;
        }
        if (offset.norm() > 0.0) return center + offset;
    }
}

int nearest_root(const Vector& x, const std::vector<Vector>& roots) {
    int best = -1;
    double best_dist = kRootMatch;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double d = (roots[i] - x).norm();
        if (d <= best_dist) {
            best = static_cast<int>(i);
            best_dist = d;
        }
    }
    return best;
}

}  // namespace

double estimate_order(std::span<const double> errors) {
    if (errors.size() < 4) throw InsufficientData("estimate_order: need at least four errors");
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
            throw InsufficientData("estimate_order: errors must be positive and finite");
        if (i > 0 && !(errors[i] < errors[i - 1]))
            throw InsufficientData("estimate_order: errors must be strictly decreasing");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        // both ends inside the window: the last error of a run usually sits at the roundoff floor
        if (errors[k] <= kOrderHi && errors[k + 1] > kOrderLo) {
            xs.push_back(std::log(errors[k]));
            ys.push_back(std::log(errors[k + 1]));
        }
    }
    if (xs.size() < 2) throw InsufficientData("estimate_order: fewer than two pairs in the asymptotic window");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw InsufficientData("estimate_order: degenerate error sequence");
    return sxy / sxx;
}

std::string_view to_string(LimitKind k) {
    switch (k) {
        case LimitKind::RootNonDegenerate: return "RootNonDegenerate";
        case LimitKind::RootDegenerate: return "RootDegenerate";
        case LimitKind::SaddleStrong: return "SaddleStrong";
        case LimitKind::SaddleGeneralized: return "SaddleGeneralized";
        case LimitKind::LocalMinNonRoot: return "LocalMinNonRoot";
        case LimitKind::Unclassified: return "Unclassified";
    }
    return "?";
}

LimitClass classify_limit(const Problem& p, const Vector& x, const ClassifyTolerances& tols) {
    const DerivativeMode mode = p.component_hessians ? DerivativeMode::analytic()
                                                     : DerivativeMode::central_difference();
    if (grad_f(p, x).norm() > tols.tol_crit) throw NotCritical("classify_limit: x is not a critical point of f");

    LimitClass out;
    const Matrix jac = jacobian(p, x);
    out.norm_f = eval_residual(p, x).norm();
    out.min_singular_jacobian = Eigen::JacobiSVD<Matrix>(jac).singularValues().minCoeff();
    if (jac.rows() < jac.cols()) out.min_singular_jacobian = 0.0;

    const SymMatrix hess = hess_f(p, x, mode);
    const SymMatrix curv = residual_curvature(p, x, mode);
    const Vector hess_eigs = eigh(hess).eigenvalues;
    const Vector curv_eigs = eigh(curv).eigenvalues;
    out.hess_min_eig = hess_eigs.minCoeff();
    out.hess_max_eig = hess_eigs.maxCoeff();
    out.curvature_min_eig = curv_eigs.minCoeff();
    out.curvature_max_eig = curv_eigs.maxCoeff();

    if (out.norm_f <= tols.tol_root) {
        out.kind = out.min_singular_jacobian > tols.tol_eig ? LimitKind::RootNonDegenerate : LimitKind::RootDegenerate;
        return out;
    }
    const bool hess_has_negative = out.hess_min_eig < -tols.tol_eig;
    const bool curv_neg_def = out.curvature_max_eig < -tols.tol_eig * std::max(1.0, curv.frobenius_norm());
    if (hess_has_negative && curv_neg_def) out.kind = LimitKind::SaddleStrong;
    else if (hess_has_negative) out.kind = LimitKind::SaddleGeneralized;
    else if (out.hess_min_eig >= -tols.tol_eig) out.kind = LimitKind::LocalMinNonRoot;
    else out.kind = LimitKind::Unclassified;
    return out;
}

EscapeSummary saddle_escape_mc(const Problem& p, const Vector& x_center, double radius, int trials,
                               const SolverConfig& config_template) {
    if (trials < 1) throw InvalidInput("saddle_escape_mc: trials must be >= 1");
    if (x_center.size() != p.domain_dim) throw InvalidInput("saddle_escape_mc: center has the wrong dimension");
    validate(config_template, p);

    EscapeSummary summary;
    summary.trials = trials;
    summary.root_hits.assign(p.known_roots.size(), 0);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = Rng::derive(config_template.rng_seed, static_cast<std::uint64_t>(t));
        Rng start_rng(Rng::derive(trial_seed, 0));
        SolverConfig config = config_template;
        config.rng_seed = Rng::derive(trial_seed, 1);
        config.deltas.reset();
        config.line_search.beta.reset();

        const Vector x0 = sample_ball(x_center, radius, start_rng);
        const RunResult run = solve(p, config, x0);
        ++summary.terminations[std::string(to_string(run.termination))];
        if ((run.final_x - x_center).norm() <= kCenterRadius) ++summary.at_center;
        const int root = nearest_root(run.final_x, p.known_roots);
        if (root >= 0) ++summary.root_hits[static_cast<std::size_t>(root)];
        if (run.termination == Termination::RootFound || run.termination == Termination::CriticalNonRoot) {
            try {
                const LimitClass cls = classify_limit(p, run.final_x, {config.tol_root, config.tol_crit, 1e-8});
                ++summary.limit_classes[std::string(to_string(cls.kind))];
            } catch (const NotCritical&) {
                ++summary.limit_classes["NotCritical"];
            }
        }
    }
    summary.escapes = summary.trials - summary.at_center;
    return summary;
}

double gamma_one_region_check(const Problem& p, const Vector& x_star, double radius, int samples,
                              const SolverConfig& config) {
    validate(config, p);
    if (config.method == Method::NewtonBaseline)
        throw InvalidInput("gamma_one_region_check: newton baseline has no line search");
    if (grad_f(p, x_star).norm() > config.tol_crit || eval_residual(p, x_star).norm() <= config.tol_root)
        throw NotCritical("gamma_one_region_check: x_star must be a critical non-root");

    Rng rng(config.rng_seed);
    const std::size_t ladder_size = config.method == Method::LmM ? 2 : static_cast<std::size_t>(p.domain_dim) + 1;
    const DeltaLadder ladder = config.deltas ? *config.deltas : DeltaLadder::random(ladder_size, rng);

    int used = 0;
    int accepted = 0;
    for (int s = 0; s < samples; ++s) {
        const Vector x = sample_ball(x_star, radius, rng);
        const Vector fx = eval_residual(p, x);
        const Matrix jac = jacobian(p, x, config.derivatives);
        const Vector grad_half = jac.transpose() * fx;
        if (grad_half.norm() <= config.tol_crit) continue;
        Regularization reg;
        const Direction dir = method_direction(p, config, ladder, x, jac, fx.norm(), grad_half, reg);
        ++used;
        if (armijo_holds(p, x, fx.squaredNorm(), dir.w_hat, grad_half, 1.0)) ++accepted;
    }
    if (used == 0) throw InsufficientData("gamma_one_region_check: every sample was excluded");
    return static_cast<double>(accepted) / used;
}

bool holder_conjugate_ok(double q, int m) {
    if (!(q >= 1.0)) throw InvalidInput("holder_conjugate_ok: q must be >= 1");
    if (m < 1) throw InvalidInput("holder_conjugate_ok: m must be positive");
    // m^{1/p} with 1/p = 1 - 1/q; q = 1 gives p = infinity and m^0 = 1.
    return std::pow(static_cast<double>(m), 1.0 - 1.0 / q) < 4.0 / 3.0;
}

Vector BasinGrid::cell_center(int ix, int iy) const {
    Vector c(2);
    c(0) = rect.x_min + (ix + 0.5) * (rect.x_max - rect.x_min) / nx;
    c(1) = rect.y_min + (iy + 0.5) * (rect.y_max - rect.y_min) / ny;
    return c;
}

BasinGrid basin_grid(const Problem& p, const Rect& rect, int nx, int ny, const SolverConfig& config,
                     const std::vector<Vector>& roots) {
    if (p.domain_dim != 2 || p.codomain_dim != 2) throw InvalidInput("basin_grid: needs a 2 x 2 system");
    if (roots.empty()) throw InvalidInput("basin_grid: roots must be non-empty");
    if (nx < 1 || ny < 1) throw InvalidInput("basin_grid: resolution must be positive");
    validate(config, p);

    BasinGrid grid;
    grid.rect = rect;
    grid.nx = nx;
    grid.ny = ny;
    const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    grid.root_index.assign(cells, -1);
    grid.iterations.assign(cells, 0);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t cell = static_cast<std::size_t>(iy) * nx + ix;
            try {
                const RunResult run = solve(p, config, grid.cell_center(ix, iy));
                grid.iterations[cell] = static_cast<int>(run.trace.size()) - 1;
                grid.root_index[cell] = nearest_root(run.final_x, roots);
            } catch (const Error&) {
                grid.root_index[cell] = -1;
            }
        }
    }
    return grid;
}

RunAudit audit_run(const Problem& p, const SolverConfig& config, const Vector& x0) {
    RunAudit audit;
    auto observer = [&](const IterationProbe& probe) {
        ++audit.steps;
        if (!probe.regularization) return;
        const Regularization& reg = *probe.regularization;
        if (config.method == Method::LmM) {
            if (!(eigh(reg.a).eigenvalues.minCoeff() > 0.0)) ++audit.floor_violations;
        } else if (!(minsp(reg.a) >= probe.kappa * reg.scale)) {
            ++audit.floor_violations;
        }
        const Direction& dir = *probe.direction;
        if (probe.grad_half->norm() > 0.0 && !(dir.w_hat.dot(*probe.grad_half) > 0.0)) ++audit.direction_violations;
        if (dir.w_hat.norm() > 1.0 + 1e-15) ++audit.direction_violations;
        if (!probe.step.gated &&
            !armijo_holds(p, *probe.x, probe.f_x, dir.w_hat, *probe.grad_half, probe.step.gamma))
            ++audit.armijo_violations;
    };
    audit.run = solve(p, config, x0, observer);

    const std::vector<TraceRecord>& trace = audit.run.trace;
    if (config.method != Method::NewtonBaseline) {
        for (std::size_t i = 1; i < trace.size(); ++i) {
            const double prev = trace[i - 1].f_val;
            if (trace[i].f_val > prev + 1e-15 * std::max(1.0, prev)) ++audit.descent_violations;
        }
    }
    if (audit.run.termination == Termination::RootFound || audit.run.termination == Termination::CriticalNonRoot) {
        const Vector fx = eval_residual(p, audit.run.final_x);
        const double crit = (jacobian(p, audit.run.final_x, config.derivatives).transpose() * fx).norm();
        audit.limit_critical = crit <= std::max(config.tol_crit, 1e-6);
    }
    return audit;
}

}  // namespace qnewton
