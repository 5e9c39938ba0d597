#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"
#include "qnewton/errors.hpp"
#include "qnewton/solvers.hpp"

using namespace qnewton;
using testing::vec;

namespace {

SymMatrix scalar(double v) { return SymMatrix(Matrix::Constant(1, 1, v)); }

std::string config_field(const SolverConfig& c, const Problem& p) {
    try {
        validate(c, p);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("DeltaLadder") {
    DeltaLadder l({1.0, 2.0, 1.5});
    CHECK(l.kappa() == doctest::Approx(0.25));
    CHECK_THROWS_AS(DeltaLadder({1.0}), ConfigError);
    CHECK_THROWS_AS(DeltaLadder({1.0, -1.0}), ConfigError);
    CHECK_THROWS_AS(DeltaLadder({1.0, 1.0005}), ConfigError);

    Rng a(3), b(3);
    DeltaLadder ra = DeltaLadder::random(6, a), rb = DeltaLadder::random(6, b);
    CHECK(ra.values() == rb.values());
    for (double d : ra.values()) {
        CHECK(d >= 1.0);
        CHECK(d <= 2.0);
    }
    CHECK(ra.kappa() >= 0.5 * DeltaLadder::kMinGap);
}

TEST_CASE("regularize_nqnse") {
    DeltaLadder l({1.0, 2.0});
    SUBCASE("full-norm branch") {
        Regularization r = regularize_nqnse(scalar(44), 3, l, 0.5);
        CHECK(r.branch == Branch::FullNorm);
        CHECK(r.index == 0);
        CHECK(r.a(0, 0) == doctest::Approx(47));
    }
    SUBCASE("tau branch climbs the ladder") {
        Regularization r = regularize_nqnse(scalar(-1), 1, l, 0.5);
        CHECK(r.branch == Branch::TauNorm);
        CHECK(r.index == 1);
        CHECK(r.a(0, 0) == doctest::Approx(1));
        CHECK(r.minsp_a >= l.kappa() * r.scale);
    }
    SUBCASE("tiny residual") {
        Regularization r = regularize_nqnse(SymMatrix::identity(2), 1e-12, l, 0.5);
        CHECK(r.branch == Branch::FullNorm);
        CHECK(r.index == 0);
        CHECK((r.a.matrix() - Matrix::Identity(2, 2)).norm() < 1e-11);
    }
    SUBCASE("exhausted ladder") {
        // -delta for both shifts: minsp(A) = 0 for each entry
        DeltaLadder bad({1.0, 2.0});
        CHECK_THROWS_AS(regularize_nqnse(SymMatrix::diagonal(vec({-1, -2})), 1, bad, 0.5), RegularizationFailed);
    }
}

TEST_CASE("regularize_lmm") {
    DeltaLadder l({1.0, 2.0});
    Regularization r = regularize_lmm(scalar(16), 3, l, 0.5);
    CHECK(r.index == 0);
    CHECK(r.a(0, 0) == doctest::Approx(19));
    r = regularize_lmm(scalar(0), 1, l, 0.5);
    CHECK(r.index == 1);
    CHECK(r.branch == Branch::TauNorm);
    CHECK(r.a(0, 0) == doctest::Approx(2));
    r = regularize_lmm(SymMatrix::identity(2), 1e-8, l, 0.5);
    CHECK(r.index == 0);
    CHECK((r.a.matrix() - (1 + 1e-8) * Matrix::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("directions") {
    Direction d = direction_nqnse(scalar(47), vec({12}));
    CHECK(d.w(0) == doctest::Approx(12.0 / 47));
    CHECK(d.w_hat(0) == d.w(0));

    d = direction_nqnse(scalar(47), vec({0}));
    CHECK(d.w_hat(0) == 0.0);

    d = direction_nqnse(SymMatrix::diagonal(vec({2, -3})), vec({2, 3}));
    CHECK(d.w(0) == doctest::Approx(1));
    CHECK(d.w(1) == doctest::Approx(1));
    CHECK(d.w_hat(0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(d.w_hat.norm() == doctest::Approx(1));

    d = direction_lmm(scalar(19), vec({12}));
    CHECK(d.w(0) == doctest::Approx(12.0 / 19));
    d = direction_lmm(SymMatrix(2 * Matrix::Identity(2, 2)), vec({4, 0}));
    CHECK(d.w(0) == doctest::Approx(2));
    CHECK(d.w_hat(0) == doctest::Approx(1));
    CHECK(d.w_hat(1) == 0.0);
    CHECK_THROWS_AS(direction_lmm(scalar(-1), vec({1})), SingularMatrix);
}

TEST_CASE("direction_general") {
    const Matrix id = Matrix::Identity(2, 2);
    for (double q : {1.0, 1.5, 2.0}) {
        Direction d = direction_general(SymMatrix::identity(2), vec({0.3, -0.4}), id, q);
        CHECK(d.w(0) == doctest::Approx(0.3));
        CHECK(d.w(1) == doctest::Approx(-0.4));
    }
    Direction d = direction_general(SymMatrix::diagonal(vec({2, -3})), vec({0.5, 0.6}), id, 1.0);
    CHECK(d.w(0) == doctest::Approx(0.25));
    CHECK(d.w(1) == doctest::Approx(0.2));

    Matrix a(2, 2);
    a << 1, 2, 2, -1;
    // q = 1 row weights: |1| + |2| = 3 for both coordinates
    d = direction_general(SymMatrix(a), vec({3, 6}), id, 1.0);
    CHECK(d.w(0) == doctest::Approx(1));
    CHECK(d.w(1) == doctest::Approx(2));
    // q = 2: sqrt(5)
    d = direction_general(SymMatrix(a), vec({1, 1}), id, 2.0);
    CHECK(d.w(0) == doctest::Approx(1 / std::sqrt(5.0)));

    Matrix skew(2, 2);
    skew << 1, 1, 0, 1;
    CHECK_THROWS_AS(direction_general(SymMatrix::identity(2), vec({1, 1}), skew, 1.0), InvalidInput);
    CHECK_THROWS_AS(direction_general(SymMatrix::diagonal(vec({1, 0})), vec({1, 1}), id, 1.0), SingularMatrix);
}

TEST_CASE("direction_general in the eigenbasis matches reflected_solve") {
    Rng rng(314);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 9;
        SymMatrix a = testing::random_symmetric(n, rng);
        Vector g = testing::random_vector(n, rng);
        const Vector oracle = reflected_solve(a, g);
        const Matrix basis = eigh(a).eigenvectors;
        for (double q : {1.0, 1.5, 2.0}) {
            CHECK((direction_general(a, g, basis, q).w - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
        }
    }
}

TEST_CASE("newton_baseline_step") {
    Problem p = testing::scalar_problem([](double x) { return x * x - 2; }, [](double x) { return 2 * x; },
                                        [](double) { return 2.0; });
    CHECK(newton_baseline_step(p, vec({2}))(0) == doctest::Approx(1.5));
    CHECK(newton_baseline_step(p, vec({std::sqrt(2.0)}))(0) == doctest::Approx(std::sqrt(2.0)));
    auto cyc = find_problem("newton_cycle");
    CHECK(newton_baseline_step(*cyc, vec({0}))(0) == doctest::Approx(1));
    CHECK(newton_baseline_step(*cyc, vec({1}))(0) == doctest::Approx(0));
    CHECK_THROWS_AS(newton_baseline_step(p, vec({0})), SingularMatrix);
    CHECK_THROWS_AS(newton_baseline_step(*find_problem("overdet"), vec({1})), InvalidInput);
}

TEST_CASE("validate names the offending field") {
    const Problem quad = *find_problem("quad1d");
    const Problem over = *find_problem("overdet");
    SolverConfig c;
    CHECK(config_field(c, quad) == "");

    c.tau = 1.5;
    CHECK(config_field(c, quad) == "tau");
    c.allow_tau_ge_one = true;
    CHECK(config_field(c, quad) == "");

    c = {};
    c.method = Method::LmM;
    c.deltas = DeltaLadder({1.0, 2.0, 3.0});
    CHECK(config_field(c, quad) == "deltas");

    c = {};
    c.deltas = DeltaLadder({1.0, 2.0});
    CHECK(config_field(c, *find_problem("cubic2d")) == "deltas");

    c = {};
    c.det_guard = 0.1;
    CHECK(config_field(c, over) == "det_eps");
    c.det_guard = -1;
    CHECK(config_field(c, quad) == "det_eps");

    c = {};
    c.method = Method::NewtonBaseline;
    CHECK(config_field(c, over) == "method");

    c = {};
    c.line_search.beta = 1.0;
    CHECK(config_field(c, quad) == "beta");
    c = {};
    c.line_search.eta = 0.0;
    CHECK(config_field(c, quad) == "eta");
    c = {};
    c.q = 0.5;
    CHECK(config_field(c, quad) == "q");
}

TEST_CASE("solve from a root returns a single record") {
    const Problem p = *find_problem("quad1d");
    RunResult r = solve(p, {}, p.known_roots[0]);
    CHECK(r.termination == Termination::RootFound);
    CHECK(r.trace.size() == 1);
}

TEST_CASE("solve on quad1d converges quadratically") {
    const Problem p = *find_problem("quad1d");
    RunResult r = solve(p, {}, vec({2}));
    CHECK(r.termination == Termination::RootFound);
    CHECK(r.final_x(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    REQUIRE(r.order_estimate.has_value());
    CHECK(*r.order_estimate == doctest::Approx(2).epsilon(0.15));
}

TEST_CASE("solve is deterministic in the seed") {
    const Problem p = *find_problem("cubic2d");
    SolverConfig c;
    c.rng_seed = 42;
    c.line_search.kind = LineSearchPolicy::Kind::BetaGrid;
    RunResult a = solve(p, c, vec({-1.2, 0.4})), b = solve(p, c, vec({-1.2, 0.4}));
    CHECK(a.deltas == b.deltas);
    CHECK(a.beta == b.beta);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].x == b.trace[i].x);
    CHECK(*a.beta >= 0.2);
    CHECK(*a.beta <= 0.8);
    CHECK(a.deltas.size() == 3);

    c.rng_seed = 43;
    RunResult other = solve(p, c, vec({-1.2, 0.4}));
    CHECK(other.deltas != a.deltas);
}

TEST_CASE("newton baseline cycles on newton_cycle") {
    const Problem p = *find_problem("newton_cycle");
    SolverConfig c;
    c.method = Method::NewtonBaseline;
    c.max_iter = 100;
    RunResult r = solve(p, c, vec({0}));
    CHECK(r.termination == Termination::MaxIterations);
    CHECK(r.deltas.empty());
    for (const TraceRecord& t : r.trace) CHECK(std::abs(t.x(0) - (t.k % 2 == 0 ? 0.0 : 1.0)) < 1e-9);
}

TEST_CASE("every method descends and reaches a root on cubic2d") {
    const Problem p = *find_problem("cubic2d");
    for (Method m : {Method::NqnSe, Method::LmM, Method::General}) {
        SolverConfig c;
        c.method = m;
        c.rng_seed = 1;
        RunResult r = solve(p, c, p.default_start);
        CHECK(r.termination == Termination::RootFound);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            CHECK(r.trace[i].f_val <= r.trace[i - 1].f_val + 1e-15 * std::max(1.0, r.trace[i - 1].f_val));
    }
}

TEST_CASE("divergence and iteration caps") {
    Problem p = testing::scalar_problem([](double x) { return std::exp(-x); }, [](double x) { return -std::exp(-x); },
                                        [](double x) { return std::exp(-x); });
    SolverConfig c;
    c.max_iter = 50;
    RunResult r = solve(p, c, vec({0}));
    CHECK(r.termination == Termination::MaxIterations);
    CHECK(r.trace.size() == 51);

    c.divergence_radius = 0.5;
    c.max_iter = 1000;
    r = solve(p, c, vec({0}));
    CHECK(r.termination == Termination::Diverged);
}

TEST_CASE("enum strings") {
    CHECK(parse_method("nqn-se") == Method::NqnSe);
    CHECK(parse_method("lm-m") == Method::LmM);
    CHECK(parse_method("general") == Method::General);
    CHECK(parse_method("newton") == Method::NewtonBaseline);
    CHECK_FALSE(parse_method("bfgs").has_value());
    CHECK(parse_basis("eigen") == Basis::EigenOfA);
    CHECK(to_string(Method::LmM) == "lm-m");
    CHECK(to_string(Termination::RootFound) == "RootFound");
}
