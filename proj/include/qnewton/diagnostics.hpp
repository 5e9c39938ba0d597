#pragma once

// Empirical checks of the solvers' guarantees: convergence order, limit
// classification, saddle-escape Monte Carlo, the unit-step region near
// saddles, the Hoelder-conjugate condition and basins of attraction.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnewton/problem.hpp"
#include "qnewton/solvers.hpp"

namespace qnewton {

// Least-squares slope of log e_{k+1} against log e_k over consecutive pairs
// lying in the window (1e-13, 1e-2]. Needs >= 4 strictly decreasing positive
// entries and >= 2 usable pairs, else InsufficientData.
double estimate_order(std::span<const double> errors);

enum class LimitKind { RootNonDegenerate, RootDegenerate, SaddleStrong, SaddleGeneralized, LocalMinNonRoot, Unclassified };

std::string_view to_string(LimitKind k);

struct LimitClass {
    LimitKind kind = LimitKind::Unclassified;
    double norm_f = 0.0;
    double min_singular_jacobian = 0.0;
    double hess_min_eig = 0.0;
    double hess_max_eig = 0.0;
    double curvature_min_eig = 0.0;  // of sum_i F_i Hess(F_i)
    double curvature_max_eig = 0.0;
};

struct ClassifyTolerances {
    double tol_root = 1e-10;
    double tol_crit = 1e-8;
    double tol_eig = 1e-8;
};

// Requires ||grad f(x)|| <= tol_crit (NotCritical otherwise).
LimitClass classify_limit(const Problem& p, const Vector& x, const ClassifyTolerances& tols = {});

struct EscapeSummary {
    int trials = 0;
    int at_center = 0;       // final_x within 1e-4 of the center
    int escapes = 0;         // trials - at_center
    std::vector<int> root_hits;  // per known root, final_x within 1e-6
    std::map<std::string, int> terminations;
    std::map<std::string, int> limit_classes;
};

// Uniform starts in the ball around x_center (the center itself excluded when
// radius > 0), a fresh random ladder and seed per trial.
EscapeSummary saddle_escape_mc(const Problem& p, const Vector& x_center, double radius, int trials,
                               const SolverConfig& config_template);

// Fraction of samples near x_star (those with ||H^T F|| > tol_crit) where the
// configured method's direction passes the Armijo test at gamma = 1.
double gamma_one_region_check(const Problem& p, const Vector& x_star, double radius, int samples,
                              const SolverConfig& config);

// Conjugate p of q satisfies m^{1/p} < 4/3.
bool holder_conjugate_ok(double q, int m);

struct Rect {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
};

struct BasinGrid {
    Rect rect;
    int nx = 0;
    int ny = 0;
    std::vector<int> root_index;  // row-major, iy * nx + ix; -1 when no root reached
    std::vector<int> iterations;

    int at(int ix, int iy) const { return root_index[static_cast<std::size_t>(iy) * nx + ix]; }
    Vector cell_center(int ix, int iy) const;
};

BasinGrid basin_grid(const Problem& p, const Rect& rect, int nx, int ny, const SolverConfig& config,
                     const std::vector<Vector>& roots);

// Runs solve and checks the per-iteration guarantees along the way: descent
// of f, the Armijo inequality for the accepted step, the regularization floor
// (minsp(A) >= kappa * scale; A positive definite for LmM), positivity and
// norm <= 1 of the clamped direction, and criticality of the limit.
struct RunAudit {
    RunResult run;
    int steps = 0;
    int descent_violations = 0;
    int armijo_violations = 0;
    int floor_violations = 0;
    int direction_violations = 0;
    bool limit_critical = true;

    bool ok() const {
        return descent_violations == 0 && armijo_violations == 0 && floor_violations == 0 &&
               direction_violations == 0 && limit_critical;
    }
};

RunAudit audit_run(const Problem& p, const SolverConfig& config, const Vector& x0);

}  // namespace qnewton
