#pragma once

// Regularized second-order solvers for F(x) = 0 through f = ||F||^2:
//
//   NqnSe           A = Hess f + delta_j * s * Id, s in {||F||, ||F||^tau}, with the
//                   first ladder entry giving minsp(A) >= kappa * s; direction |A|^{-1} H^T F.
//   LmM             A = H^T H + delta_{0|1} * s * Id, direction A^{-1} H^T F.
//   General         NqnSe's A with per-basis-vector q-norm weights on grad f.
//   NewtonBaseline  x - JF^{-1} F, square systems only.
//
// All but the baseline clamp the direction to norm <= 1 and backtrack on
// f(x - g w) - f(x) <= -g <w, H^T F>.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnewton/problem.hpp"
#include "qnewton/rng.hpp"
#include "qnewton/spectral.hpp"

namespace qnewton {

enum class Method { NqnSe, LmM, General, NewtonBaseline };
enum class Branch { FullNorm, TauNorm, None };
enum class Basis { Standard, EigenOfA };
enum class Termination { RootFound, CriticalNonRoot, MaxIterations, Diverged, LineSearchStalled };

std::string_view to_string(Method m);
std::string_view to_string(Branch b);
std::string_view to_string(Basis b);
std::string_view to_string(Termination t);
std::optional<Method> parse_method(std::string_view s);
std::optional<Basis> parse_basis(std::string_view s);

// Positive shifts tried in order; kappa is half the smallest pairwise gap.
class DeltaLadder {
public:
    static constexpr double kMinGap = 1e-3;

    explicit DeltaLadder(std::vector<double> values);

    // i.i.d. uniform on [1, 2], redrawn until every pairwise gap is >= kMinGap.
    static DeltaLadder random(std::size_t count, Rng& rng);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double kappa() const noexcept { return kappa_; }

private:
    std::vector<double> values_;
    double kappa_ = 0.0;
};

struct LineSearchPolicy {
    enum class Kind { Halving, BetaGrid };

    Kind kind = Kind::Halving;
    // BetaGrid only; drawn once per run from the run's RNG when unset.
    std::optional<double> beta;
    // When set, a full unclamped step is taken without the Armijo test
    // whenever ||F(x - w)|| <= eta ||F(x)||.
    std::optional<double> eta;
};

struct SolverConfig {
    Method method = Method::NqnSe;
    std::optional<DeltaLadder> deltas;  // random per run when unset
    double tau = 0.5;
    bool allow_tau_ge_one = false;
    LineSearchPolicy line_search;
    std::optional<double> det_guard;  // |det JF(x_{k+1})| > eps, square systems only
    double q = 1.0;                   // General only
    Basis basis = Basis::Standard;    // General only
    double tol_root = 1e-10;
    double tol_crit = 1e-8;
    int max_iter = 10000;
    double gamma_min = 0x1p-60;
    double divergence_radius = 1e8;
    std::uint64_t rng_seed = 0;
    DerivativeMode derivatives;
};

// Throws ConfigError naming the offending field.
void validate(const SolverConfig& config, const Problem& problem);

struct Regularization {
    SymMatrix a;
    int index = 0;  // ladder position used
    Branch branch = Branch::None;
    double scale = 0.0;  // ||F|| or ||F||^tau
    double minsp_a = 0.0;
};

Regularization regularize_nqnse(const SymMatrix& hess, double norm_f, const DeltaLadder& ladder, double tau);
Regularization regularize_lmm(const SymMatrix& hth, double norm_f, const DeltaLadder& ladder, double tau);

struct Direction {
    Vector w;
    Vector w_hat;  // w / max(1, ||w||)
};

Direction clamp_direction(Vector w);
Direction direction_nqnse(const SymMatrix& a, const Vector& grad_half);
Direction direction_lmm(const SymMatrix& a, const Vector& grad_half);
// basis: orthonormal columns e_1..e_m; weights ||A e_i||_q measured in that basis.
Direction direction_general(const SymMatrix& a, const Vector& grad, const Matrix& basis, double q);

// f(x - gamma w_hat) - f(x) <= -gamma <w_hat, grad_half>
bool armijo_holds(const Problem& p, const Vector& x, double f_x, const Vector& w_hat,
                  const Vector& grad_half, double gamma);

struct GridSearch {
    double beta = 0.5;
    double gamma_min = 0x1p-60;
    std::optional<double> det_eps;
};

// Largest beta^n >= gamma_min satisfying Armijo (and the determinant guard
// when det_eps is set). Throws LineSearchStalled.
double armijo_search(const Problem& p, const Vector& x, double f_x, const Vector& w_hat,
                     const Vector& grad_half, const GridSearch& grid);

double armijo_halving(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                      double gamma_min);
double armijo_beta_grid(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                        double beta, double gamma_min);
double det_guard_search(const Problem& p, const Vector& x, const Vector& w_hat, const Vector& grad_half,
                        double epsilon, const GridSearch& inner);

struct StepChoice {
    double gamma = 1.0;
    bool gated = false;  // true: apply gamma to the unclamped w
};

StepChoice hybrid_eta_gate(const Problem& p, const Vector& x, const Direction& dir, const Vector& grad_half,
                           double eta, const GridSearch& inner);

// Regularized matrix and clamped direction of a non-baseline method at x,
// given the Jacobian there and grad_half = H^T F.
Direction method_direction(const Problem& p, const SolverConfig& config, const DeltaLadder& ladder, const Vector& x,
                           const Matrix& jac, double norm_f, const Vector& grad_half, Regularization& reg);

Vector newton_baseline_step(const Problem& p, const Vector& x, DerivativeMode mode = {});

struct TraceRecord {
    int k = 0;
    Vector x;
    double f_val = 0.0;
    double grad_half_norm = 0.0;
    std::optional<int> delta_index;
    Branch branch = Branch::None;
    std::optional<double> minsp_a;
    double gamma = 0.0;
    double step_norm = 0.0;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    Termination termination = Termination::MaxIterations;
    Vector final_x;
    std::optional<double> order_estimate;
    std::vector<double> deltas;  // ladder actually used
    std::optional<double> beta;  // grid ratio actually used
    std::uint64_t seed = 0;
};

// Per-iteration view handed to an optional observer; used by invariant checks.
struct IterationProbe {
    int k = 0;
    const Vector* x = nullptr;
    const Vector* grad_half = nullptr;
    const Regularization* regularization = nullptr;  // null for NewtonBaseline
    const Direction* direction = nullptr;
    double f_x = 0.0;
    double kappa = 0.0;
    StepChoice step;
    const Vector* x_next = nullptr;
};

using IterationObserver = std::function<void(const IterationProbe&)>;

RunResult solve(const Problem& p, const SolverConfig& config, const Vector& x0,
                const IterationObserver& observer = {});

}  // namespace qnewton
