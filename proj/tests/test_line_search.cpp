#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"
#include "qnewton/errors.hpp"
#include "qnewton/solvers.hpp"

using namespace qnewton;
using testing::vec;

namespace {

Problem x2_minus(double c) {
    return testing::scalar_problem([c](double x) { return x * x - c; }, [](double x) { return 2 * x; },
                                   [](double) { return 2.0; });
}

// First beta^n whose trial point passes the sufficient-decrease test and,
// optionally, |F'(x_new)| > eps. Written directly against F.
double brute_force_gamma(const std::function<double(double)>& F, const std::function<double(double)>& dF, double x,
                         double w_hat, double grad_half, double beta, double eps = -1) {
    const double fx = F(x) * F(x);
    for (double gamma = 1.0; gamma > 1e-18; gamma *= beta) {
        const double xn = x - gamma * w_hat;
        const double fn = F(xn) * F(xn);
        if (fn - fx <= -gamma * w_hat * grad_half && std::abs(dF(xn)) > eps) return gamma;
    }
    return 0.0;
}

}  // namespace

TEST_CASE("armijo_halving accepts the unit step when it passes") {
    CHECK(armijo_halving(x2_minus(1), vec({2}), vec({12.0 / 47}), vec({12}), 0x1p-60) == 1.0);
    Problem id = testing::linear_problem(Matrix::Identity(1, 1));
    CHECK(armijo_halving(id, vec({1}), vec({1.0 / 3}), vec({1}), 0x1p-60) == 1.0);
}

TEST_CASE("armijo_halving returns the first passing power of 1/2") {
    auto F = [](double x) { return x * x - 2; };
    auto dF = [](double x) { return 2 * x; };
    const Problem p = *find_problem("quad1d");
    // quad1d at x = 2: F = 2, H = 4, H^T F = 8; unit step in the descent direction.
    const double expected = brute_force_gamma(F, dF, 2, 1, 8, 0.5);
    CHECK(expected < 1.0);
    CHECK(armijo_halving(p, vec({2}), vec({1}), vec({8}), 0x1p-60) == expected);

    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const double x = rng.uniform(-3, 3);
        const double g = dF(x) * F(x);
        if (std::abs(g) < 1e-6) continue;
        const double w = (g > 0 ? 1 : -1) * rng.uniform(0.05, 1);
        CHECK(armijo_halving(p, vec({x}), vec({w}), vec({g}), 0x1p-60) == brute_force_gamma(F, dF, x, w, g, 0.5));
    }
}

TEST_CASE("armijo_beta_grid") {
    auto F = [](double x) { return x * x - 2; };
    auto dF = [](double x) { return 2 * x; };
    const Problem p = *find_problem("quad1d");
    CHECK(armijo_beta_grid(p, vec({2}), vec({1}), vec({8}), 0.5, 0x1p-60) ==
          armijo_halving(p, vec({2}), vec({1}), vec({8}), 0x1p-60));
    CHECK(armijo_beta_grid(x2_minus(1), vec({2}), vec({12.0 / 47}), vec({12}), 0.9, 0x1p-60) == 1.0);
    const double expected = brute_force_gamma(F, dF, 2, 1, 8, 0.3);
    CHECK(expected < 1.0);
    CHECK(armijo_beta_grid(p, vec({2}), vec({1}), vec({8}), 0.3, 0x1p-60) == expected);
}

TEST_CASE("beta = 1/2 grid reproduces halving along corpus runs") {
    for (const Problem& p : corpus()) {
        SolverConfig c;
        c.rng_seed = 5;
        RunResult r = solve(p, c, p.default_start);
        for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
            const Vector& x = r.trace[i].x;
            Regularization reg;
            DeltaLadder ladder(r.deltas);
            const Matrix jac = jacobian(p, x);
            const Vector fx = eval_residual(p, x);
            const Vector g = jac.transpose() * fx;
            Direction d = method_direction(p, c, ladder, x, jac, fx.norm(), g, reg);
            const double h = armijo_halving(p, x, d.w_hat, g, c.gamma_min);
            CHECK(armijo_beta_grid(p, x, d.w_hat, g, 0.5, c.gamma_min) == h);
            CHECK(h == r.trace[i].gamma);
        }
    }
}

TEST_CASE("line search errors") {
    const Problem p = *find_problem("quad1d");
    CHECK_THROWS_AS(armijo_halving(p, vec({2}), vec({-1}), vec({8}), 0x1p-60), InvalidInput);
    CHECK_THROWS_AS(armijo_beta_grid(p, vec({2}), vec({1}), vec({8}), 1.0, 0x1p-60), InvalidInput);
    CHECK_THROWS_AS(armijo_halving(p, vec({2}), vec({1}), vec({8}), 0.9), LineSearchStalled);
    CHECK_THROWS_AS(det_guard_search(p, vec({2}), vec({1}), vec({8}), -1, {}), InvalidInput);
    CHECK_THROWS_AS(det_guard_search(*find_problem("overdet"), vec({1}), vec({1}), vec({1}), 0.1, {}), InvalidInput);
}

TEST_CASE("det_guard_search") {
    auto F = [](double x) { return x * x - 2; };
    auto dF = [](double x) { return 2 * x; };
    const Problem p = *find_problem("quad1d");
    SUBCASE("eps = 0 is the plain search") {
        CHECK(det_guard_search(p, vec({2}), vec({1}), vec({8}), 0.0, {}) ==
              armijo_halving(p, vec({2}), vec({1}), vec({8}), 0x1p-60));
    }
    SUBCASE("eps = 0.1 on quad1d leaves the step unchanged") {
        CHECK(det_guard_search(p, vec({2}), vec({1}), vec({8}), 0.1, {}) ==
              armijo_halving(p, vec({2}), vec({1}), vec({8}), 0x1p-60));
    }
    SUBCASE("a binding guard") {
        const double plain = armijo_halving(p, vec({2}), vec({1}), vec({8}), 0x1p-60);
        const double guarded = det_guard_search(p, vec({2}), vec({1}), vec({8}), 3.5, {});
        CHECK(guarded < plain);
        CHECK(guarded == brute_force_gamma(F, dF, 2, 1, 8, 0.5, 3.5));
    }
    SUBCASE("saddle1d keeps iterates out of |x| <= 0.05") {
        const Problem s = *find_problem("saddle1d");
        // |det JF| = 2|x|; from x = 0.01 the descent direction points away from 0
        const double x = 0.01;
        const double g = (-2 * x) * (1 - x * x);
        for (double w : {-1.0, -0.5, -0.06}) {
            const double gamma = det_guard_search(s, vec({x}), vec({w}), vec({g}), 0.1, {});
            CHECK(std::abs(x - gamma * w) > 0.05);
        }
        // every trial point stays in the band, so nothing is accepted
        CHECK_THROWS_AS(det_guard_search(s, vec({x}), vec({-0.01}), vec({g}), 0.1, {}), LineSearchStalled);
    }
}

TEST_CASE("hybrid_eta_gate") {
    const Problem quad = *find_problem("quad1d");
    SUBCASE("full step near a non-degenerate root") {
        const double x = 1.45, F = x * x - 2, H = 2 * x;
        Direction d = clamp_direction(vec({F / H}));
        StepChoice s = hybrid_eta_gate(quad, vec({x}), d, vec({H * F}), 0.9, {});
        CHECK(s.gated);
        CHECK(s.gamma == 1.0);
    }
    SUBCASE("no contraction near a saddle") {
        const Problem s = *find_problem("saddle1d");
        const double x = 1e-4;
        const Vector g = vec({(-2 * x) * (1 - x * x)});
        Direction d = clamp_direction(vec({-1e-4}));
        StepChoice c = hybrid_eta_gate(s, vec({x}), d, g, 0.9, {});
        CHECK_FALSE(c.gated);
        CHECK(c.gamma == armijo_halving(s, vec({x}), d.w_hat, g, 0x1p-60));
    }
    SUBCASE("the gate uses the unclamped direction") {
        // w = 1.5 (clamped to 1): x - w = 0.5 contracts ||F|| for F(x) = x - 0.5 from x = 2
        Problem lin = testing::scalar_problem([](double x) { return x - 0.5; }, [](double) { return 1.0; },
                                              [](double) { return 0.0; });
        Direction d = clamp_direction(vec({1.5}));
        CHECK(d.w_hat(0) == 1.0);
        StepChoice c = hybrid_eta_gate(lin, vec({2}), d, vec({1.5}), 0.5, {});
        CHECK(c.gated);
    }
    CHECK_THROWS_AS(hybrid_eta_gate(quad, vec({2}), clamp_direction(vec({1})), vec({8}), 1.0, {}), InvalidInput);
}

TEST_CASE("armijo_holds") {
    const Problem p = *find_problem("quad1d");
    CHECK(armijo_holds(p, vec({2}), 4, vec({1}), vec({8}), 0.25));
    CHECK_FALSE(armijo_holds(p, vec({2}), 4, vec({1}), vec({8}), 1.0));
}
