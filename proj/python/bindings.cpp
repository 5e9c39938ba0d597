#include <array>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qnewton/diagnostics.hpp"
#include "qnewton/errors.hpp"

namespace py = pybind11;
using namespace qnewton;

namespace {

struct Options {
    std::string method = "nqn-se";
    std::optional<std::vector<double>> deltas;
    double tau = 0.5;
    bool allow_tau_ge_one = false;
    std::string line_search = "halving";
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> det_eps;
    double q = 1.0;
    std::string basis = "standard";
    double tol_root = 1e-10;
    double tol_crit = 1e-8;
    int max_iter = 10000;
    std::uint64_t seed = 0;
    std::string derivatives = "analytic";
};

SolverConfig to_config(const Options& o) {
    SolverConfig c;
    const auto method = parse_method(o.method);
    if (!method) throw ConfigError("method", "unknown method '" + o.method + "'");
    c.method = *method;
    if (o.deltas) c.deltas = DeltaLadder(*o.deltas);
    c.tau = o.tau;
    c.allow_tau_ge_one = o.allow_tau_ge_one;
    if (o.line_search == "beta-grid") {
        c.line_search.kind = LineSearchPolicy::Kind::BetaGrid;
    } else if (o.line_search == "hybrid") {
        if (!o.eta) throw ConfigError("eta", "required by the hybrid line search");
        if (o.beta) c.line_search.kind = LineSearchPolicy::Kind::BetaGrid;
    } else if (o.line_search != "halving") {
        throw ConfigError("line_search", "unknown policy '" + o.line_search + "'");
    }
    if (o.beta && o.line_search == "halving") throw ConfigError("beta", "only valid with beta-grid or hybrid");
    if (o.eta && o.line_search != "hybrid") throw ConfigError("eta", "only valid with the hybrid line search");
    c.line_search.beta = o.beta;
    c.line_search.eta = o.eta;
    c.det_guard = o.det_eps;
    c.q = o.q;
    const auto basis = parse_basis(o.basis);
    if (!basis) throw ConfigError("basis", "unknown basis '" + o.basis + "'");
    c.basis = *basis;
    c.tol_root = o.tol_root;
    c.tol_crit = o.tol_crit;
    c.max_iter = o.max_iter;
    c.rng_seed = o.seed;
    if (o.derivatives == "fd") c.derivatives = DerivativeMode::central_difference();
    else if (o.derivatives != "analytic") throw ConfigError("derivatives", "expected analytic or fd");
    return c;
}

Problem builtin(const std::string& name) {
    auto p = find_problem(name);
    if (!p) throw ConfigError("problem", "unknown problem '" + name + "'");
    return *p;
}

// Problem from a Python callable; all derivatives come from central differences.
Problem from_callable(py::function residual, int m, int m_out) {
    Problem p;
    p.name = "python";
    p.domain_dim = m;
    p.codomain_dim = m_out;
    p.residual = [residual](const Vector& x) { return residual(x).cast<Vector>(); };
    p.default_start = Vector::Zero(m);
    return p;
}

py::dict result_dict(const RunResult& r) {
    const std::size_t n = r.trace.size();
    const Eigen::Index m = r.final_x.size();
    Matrix xs(static_cast<Eigen::Index>(n), m);
    Vector f(static_cast<Eigen::Index>(n)), g(static_cast<Eigen::Index>(n)), gamma(static_cast<Eigen::Index>(n));
    std::vector<std::optional<int>> delta_index;
    std::vector<std::string> branch;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        xs.row(k) = r.trace[i].x.transpose();
        f(k) = r.trace[i].f_val;
        g(k) = r.trace[i].grad_half_norm;
        gamma(k) = r.trace[i].gamma;
        delta_index.push_back(r.trace[i].delta_index);
        branch.emplace_back(to_string(r.trace[i].branch));
    }
    py::dict trace;
    trace["x"] = xs;
    trace["f"] = f;
    trace["grad_half_norm"] = g;
    trace["gamma"] = gamma;
    trace["delta_index"] = delta_index;
    trace["branch"] = branch;

    py::dict d;
    d["termination"] = std::string(to_string(r.termination));
    d["final_x"] = r.final_x;
    d["iterations"] = n;
    d["order_estimate"] = r.order_estimate;
    d["deltas"] = r.deltas;
    d["beta"] = r.beta;
    d["seed"] = r.seed;
    d["trace"] = trace;
    return d;
}

py::dict limit_dict(const LimitClass& c) {
    py::dict d;
    d["kind"] = std::string(to_string(c.kind));
    d["norm_f"] = c.norm_f;
    d["min_singular_jacobian"] = c.min_singular_jacobian;
    d["hess_min_eig"] = c.hess_min_eig;
    d["hess_max_eig"] = c.hess_max_eig;
    d["curvature_min_eig"] = c.curvature_min_eig;
    d["curvature_max_eig"] = c.curvature_max_eig;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qnewton, m) {
    m.doc() = "Regularized Newton-type solvers for systems of nonlinear equations";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    m.def("corpus_names", &corpus_names);
    m.def("problem_info", [](const std::string& name) {
        const Problem p = builtin(name);
        py::dict d;
        d["name"] = p.name;
        d["domain_dim"] = p.domain_dim;
        d["codomain_dim"] = p.codomain_dim;
        d["known_roots"] = p.known_roots;
        d["default_start"] = p.default_start;
        return d;
    });
    m.def("residual", [](const std::string& name, const Vector& x) { return eval_residual(builtin(name), x); });

    m.def("solve", [](const std::string& problem, std::optional<Vector> x0, const std::string& method,
                      std::optional<std::vector<double>> deltas, double tau, bool allow_tau_ge_one,
                      const std::string& line_search, std::optional<double> beta, std::optional<double> eta,
                      std::optional<double> det_eps, double q, const std::string& basis, double tol_root,
                      double tol_crit, int max_iter, std::uint64_t seed, const std::string& derivatives) {
              const Problem p = builtin(problem);
              const SolverConfig c = to_config({method, deltas, tau, allow_tau_ge_one, line_search, beta, eta, det_eps,
                                                q, basis, tol_root, tol_crit, max_iter, seed, derivatives});
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = qnewton::solve(p, c, x0 ? *x0 : p.default_start);
              }
              return result_dict(r);
          },
          py::arg("problem"), py::arg("x0") = py::none(), py::kw_only(), py::arg("method") = "nqn-se",
          py::arg("deltas") = py::none(), py::arg("tau") = 0.5, py::arg("allow_tau_ge_one") = false,
          py::arg("line_search") = "halving", py::arg("beta") = py::none(), py::arg("eta") = py::none(),
          py::arg("det_eps") = py::none(), py::arg("q") = 1.0, py::arg("basis") = "standard",
          py::arg("tol_root") = 1e-10, py::arg("tol_crit") = 1e-8, py::arg("max_iter") = 10000,
          py::arg("seed") = 0, py::arg("derivatives") = "analytic");

    m.def("solve_system",
          [](py::function residual, const Vector& x0, int codomain_dim,
             const std::string& method, std::optional<std::vector<double>> deltas, double tau,
             const std::string& line_search, std::optional<double> beta, std::optional<double> eta, double q,
             double tol_root, double tol_crit, int max_iter, std::uint64_t seed) {
              const int dim = static_cast<int>(x0.size());
              const Problem p = from_callable(residual, dim, codomain_dim > 0 ? codomain_dim : dim);
              const SolverConfig c = to_config({method, deltas, tau, false, line_search, beta, eta, std::nullopt, q,
                                                "standard", tol_root, tol_crit, max_iter, seed, "fd"});
              return result_dict(qnewton::solve(p, c, x0));
          },
          py::arg("residual"), py::arg("x0"), py::kw_only(), py::arg("codomain_dim") = 0, py::arg("method") = "nqn-se", py::arg("deltas") = py::none(),
          py::arg("tau") = 0.5, py::arg("line_search") = "halving", py::arg("beta") = py::none(),
          py::arg("eta") = py::none(), py::arg("q") = 1.0, py::arg("tol_root") = 1e-10, py::arg("tol_crit") = 1e-8,
          py::arg("max_iter") = 10000, py::arg("seed") = 0);

    m.def("eigh", [](const Matrix& a) {
        const SpectralDecomposition e = eigh(SymMatrix(a));
        return py::make_tuple(e.eigenvalues, e.eigenvectors);
    });
    m.def("minsp", [](const Matrix& a) { return minsp(SymMatrix(a)); });
    m.def("reflected_solve", [](const Matrix& a, const Vector& b) { return reflected_solve(SymMatrix(a), b); });
    m.def("estimate_order", [](const std::vector<double>& e) { return estimate_order(e); });
    m.def("holder_conjugate_ok", &holder_conjugate_ok, py::arg("q"), py::arg("m"));
    m.def("classify_limit", [](const std::string& problem, const Vector& x) {
        return limit_dict(classify_limit(builtin(problem), x));
    });

    m.def("saddle_escape",
          [](const std::string& problem, const Vector& center, double radius, int trials, const std::string& method,
             const std::string& line_search, std::uint64_t seed) {
              const Problem p = builtin(problem);
              SolverConfig c = to_config({.method = method, .line_search = line_search, .seed = seed});
              EscapeSummary s;
              {
                  py::gil_scoped_release release;
                  s = saddle_escape_mc(p, center, radius, trials, c);
              }
              py::dict d;
              d["trials"] = s.trials;
              d["escapes"] = s.escapes;
              d["at_center"] = s.at_center;
              d["root_hits"] = s.root_hits;
              d["terminations"] = s.terminations;
              d["limit_classes"] = s.limit_classes;
              return d;
          },
          py::arg("problem"), py::arg("center"), py::arg("radius") = 0.05, py::arg("trials") = 100, py::kw_only(),
          py::arg("method") = "nqn-se", py::arg("line_search") = "halving", py::arg("seed") = 0);

    m.def("basin_grid",
          [](const std::string& problem, std::array<double, 4> rect, int nx, int ny, const std::string& method,
             std::uint64_t seed) {
              const Problem p = builtin(problem);
              SolverConfig c = to_config({.method = method, .seed = seed});
              BasinGrid g;
              {
                  py::gil_scoped_release release;
                  g = basin_grid(p, {rect[0], rect[1], rect[2], rect[3]}, nx, ny, c, p.known_roots);
              }
              Eigen::MatrixXi idx(ny, nx), iters(ny, nx);
              for (int iy = 0; iy < ny; ++iy)
                  for (int ix = 0; ix < nx; ++ix) {
                      idx(iy, ix) = g.at(ix, iy);
                      iters(iy, ix) = g.iterations[static_cast<std::size_t>(iy) * nx + ix];
                  }
              return py::make_tuple(idx, iters);
          },
          py::arg("problem"), py::arg("rect"), py::arg("nx"), py::arg("ny"), py::kw_only(),
          py::arg("method") = "nqn-se", py::arg("seed") = 0);
}
