#include "cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "qnewton/errors.hpp"

namespace qnewton::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string order_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

json to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

template <typename T>
json to_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// ---------------------------------------------------------------------------
// Flag / config-file merging. Every flag is stored as a string keyed by its
// long name; a config file uses the same keys. Flags win over the file.

struct FlagSpec {
    const char* name;
    const char* help;
};

constexpr FlagSpec kSolverFlags[] = {
    {"problem", "corpus problem name"},
    {"method", "nqn-se | lm-m | general | newton"},
    {"x0", "initial point, comma-separated"},
    {"tau", "exponent on ||F|| in the regularizer, in (0, 1)"},
    {"deltas", "regularization ladder, comma-separated (random when absent)"},
    {"line-search", "halving | beta-grid | hybrid"},
    {"beta", "grid ratio for beta-grid (random when absent)"},
    {"eta", "contraction gate for hybrid"},
    {"det-eps", "reject steps with |det JF| <= eps"},
    {"q", "row-norm exponent of the general scheme (>= 1)"},
    {"basis", "standard | eigen (general scheme)"},
    {"tol-root", "stop when ||F|| <= tol-root"},
    {"tol-crit", "stop when ||H^T F|| <= tol-crit * min(1, ||F||)"},
    {"max-iter", "iteration cap"},
    {"seed", "RNG seed for ladders and beta draws"},
    {"derivatives", "analytic | fd"},
    {"out", "output directory"},
};

constexpr FlagSpec kGridFlags[] = {
    {"xmin", "rectangle left edge"}, {"xmax", "rectangle right edge"}, {"ymin", "rectangle bottom edge"},
    {"ymax", "rectangle top edge"},  {"nx", "cells along x"},          {"ny", "cells along y"},
};

constexpr FlagSpec kMcFlags[] = {
    {"center", "ball center, comma-separated"},
    {"radius", "ball radius"},
    {"trials", "number of runs"},
};

constexpr FlagSpec kMethodsFlag = {"methods", "comma-separated methods"};

struct FlagSet {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
    CLI::Option* config_option = nullptr;
    CLI::Option* allow_tau_option = nullptr;
    bool allow_tau = false;

    void add(CLI::App* app, const FlagSpec& spec) {
        options[spec.name] = app->add_option(std::string("--") + spec.name, values[spec.name], spec.help);
    }

    void add_common(CLI::App* app) {
        for (const FlagSpec& spec : kSolverFlags) add(app, spec);
        config_option = app->add_option("--config", config_path, "JSON file with the same keys as the flags");
        allow_tau_option = app->add_flag("--allow-tau-ge-one", allow_tau, "accept tau >= 1");
    }

    json merged() const {
        json cfg = json::object();
        if (config_option && config_option->count() > 0) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config", "cannot open " + config_path);
            try {
                cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config", std::string("invalid JSON: ") + e.what());
            }
            if (!cfg.is_object()) throw ConfigError("config", "top level must be an object");
            for (const auto& [key, _] : cfg.items()) {
                if (key != "allow-tau-ge-one" && options.find(key) == options.end())
                    throw ConfigError(key, "unknown field in config file");
            }
        }
        for (const auto& [name, opt] : options) {
            if (opt->count() > 0) cfg[name] = values.at(name);
        }
        if (allow_tau_option && allow_tau_option->count() > 0) cfg["allow-tau-ge-one"] = true;
        return cfg;
    }
};

double parse_double(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

std::optional<double> get_double(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) return std::nullopt;
    const json& v = cfg[key];
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_double(key, v.get<std::string>());
    throw ConfigError(key, "expected a number");
}

double get_double(const json& cfg, const std::string& key, double fallback) {
    return get_double(cfg, key).value_or(fallback);
}

long long get_int(const json& cfg, const std::string& key, long long fallback) {
    const std::optional<double> v = get_double(cfg, key);
    if (!v) return fallback;
    if (*v != std::floor(*v)) throw ConfigError(key, "expected an integer");
    return static_cast<long long>(*v);
}

std::optional<std::string> get_string(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) return std::nullopt;
    if (!cfg[key].is_string()) throw ConfigError(key, "expected a string");
    return cfg[key].get<std::string>();
}

// FNV-1a; std::hash is not stable across standard libraries.
std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return parts;
}

std::optional<std::vector<double>> get_list(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) return std::nullopt;
    const json& v = cfg[key];
    std::vector<double> out;
    if (v.is_array()) {
        for (const json& item : v) {
            if (!item.is_number()) throw ConfigError(key, "expected a list of numbers");
            out.push_back(item.get<double>());
        }
    } else if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_string()) {
        for (const std::string& part : split(v.get<std::string>())) out.push_back(parse_double(key, part));
    } else {
        throw ConfigError(key, "expected a list of numbers");
    }
    if (out.empty()) throw ConfigError(key, "list is empty");
    return out;
}

Vector to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Problem resolve_problem(const json& cfg, const char* fallback = nullptr) {
    const std::optional<std::string> name = get_string(cfg, "problem");
    if (!name && !fallback) throw ConfigError("problem", "required");
    const std::string chosen = name ? *name : fallback;
    std::optional<Problem> p = find_problem(chosen);
    if (!p) throw ConfigError("problem", "unknown problem '" + chosen + "'");
    return *p;
}

Method parse_method_or_throw(const std::string& key, const std::string& text) {
    const std::optional<Method> m = parse_method(text);
    if (!m) throw ConfigError(key, "unknown method '" + text + "'");
    return *m;
}

std::vector<Method> resolve_methods(const json& cfg, const std::string& fallback) {
    std::string text = fallback;
    if (auto v = get_string(cfg, "methods")) text = *v;
    else if (auto m = get_string(cfg, "method")) text = *m;
    std::vector<Method> methods;
    for (const std::string& part : split(text)) methods.push_back(parse_method_or_throw("methods", part));
    return methods;
}

SolverConfig build_solver_config(const json& cfg) {
    SolverConfig c;
    if (auto m = get_string(cfg, "method")) c.method = parse_method_or_throw("method", *m);
    if (auto d = get_list(cfg, "deltas")) c.deltas = DeltaLadder(*d);
    c.tau = get_double(cfg, "tau", c.tau);
    if (cfg.contains("allow-tau-ge-one")) {
        if (!cfg["allow-tau-ge-one"].is_boolean()) throw ConfigError("allow-tau-ge-one", "expected true or false");
        c.allow_tau_ge_one = cfg["allow-tau-ge-one"].get<bool>();
    }

    const std::string ls = get_string(cfg, "line-search").value_or("halving");
    const std::optional<double> beta = get_double(cfg, "beta");
    const std::optional<double> eta = get_double(cfg, "eta");
    if (ls == "halving") {
        if (beta) throw ConfigError("beta", "only valid with beta-grid or hybrid");
    } else if (ls == "beta-grid") {
        c.line_search.kind = LineSearchPolicy::Kind::BetaGrid;
        c.line_search.beta = beta;
    } else if (ls == "hybrid") {
        if (!eta) throw ConfigError("eta", "required by the hybrid line search");
        if (beta) {
            c.line_search.kind = LineSearchPolicy::Kind::BetaGrid;
            c.line_search.beta = beta;
        }
    } else {
        throw ConfigError("line-search", "unknown policy '" + ls + "'");
    }
    if (eta && ls != "hybrid") throw ConfigError("eta", "only valid with the hybrid line search");
    c.line_search.eta = eta;

    c.det_guard = get_double(cfg, "det-eps");
    c.q = get_double(cfg, "q", c.q);
    if (auto b = get_string(cfg, "basis")) {
        const std::optional<Basis> basis = parse_basis(*b);
        if (!basis) throw ConfigError("basis", "unknown basis '" + *b + "'");
        c.basis = *basis;
    }
    c.tol_root = get_double(cfg, "tol-root", c.tol_root);
    c.tol_crit = get_double(cfg, "tol-crit", c.tol_crit);
    const long long max_iter = get_int(cfg, "max-iter", c.max_iter);
    if (max_iter <= 0 || max_iter > std::numeric_limits<int>::max()) throw ConfigError("max-iter", "must be positive");
    c.max_iter = static_cast<int>(max_iter);
    const long long seed = get_int(cfg, "seed", 0);
    if (seed < 0) throw ConfigError("seed", "must be non-negative");
    c.rng_seed = static_cast<std::uint64_t>(seed);
    if (auto d = get_string(cfg, "derivatives")) {
        if (*d == "analytic") c.derivatives = DerivativeMode::analytic();
        else if (*d == "fd") c.derivatives = DerivativeMode::central_difference();
        else throw ConfigError("derivatives", "expected analytic or fd");
    }
    return c;
}

Vector resolve_point(const json& cfg, const std::string& key, const Problem& p, const Vector& fallback) {
    const std::optional<std::vector<double>> v = get_list(cfg, key);
    if (!v) return fallback;
    if (static_cast<int>(v->size()) != p.domain_dim)
        throw ConfigError(key, "expected " + std::to_string(p.domain_dim) + " components for " + p.name);
    return to_vector(*v);
}

std::optional<fs::path> output_dir(const json& cfg) {
    const std::optional<std::string> out = get_string(cfg, "out");
    if (!out) return std::nullopt;
    fs::create_directories(*out);
    return fs::path(*out);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
}

json config_echo(const SolverConfig& c) {
    json j;
    j["tau"] = c.tau;
    j["line_search"] = c.line_search.eta ? "hybrid"
                       : c.line_search.kind == LineSearchPolicy::Kind::BetaGrid ? "beta-grid"
                                                                                 : "halving";
    j["eta"] = to_json(c.line_search.eta);
    j["det_eps"] = to_json(c.det_guard);
    j["q"] = c.q;
    j["basis"] = std::string(to_string(c.basis));
    j["tol_root"] = c.tol_root;
    j["tol_crit"] = c.tol_crit;
    j["max_iter"] = c.max_iter;
    return j;
}

json run_summary(const Problem& p, const SolverConfig& c, const Vector& x0, const RunResult& run) {
    const TraceRecord& last = run.trace.back();
    json j;
    j["problem"] = p.name;
    j["method"] = std::string(to_string(c.method));
    j["seed"] = run.seed;
    j["termination"] = std::string(to_string(run.termination));
    j["x0"] = to_json(x0);
    j["final_x"] = to_json(run.final_x);
    j["f"] = last.f_val;
    j["grad_half_norm"] = last.grad_half_norm;
    j["iterations"] = run.trace.size();
    j["steps"] = run.trace.size() - 1;
    j["order_estimate"] = to_json(run.order_estimate);
    j["deltas"] = run.deltas;
    j["beta"] = to_json(run.beta);
    j["config"] = config_echo(c);
    return j;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_solve(const json& cfg, std::ostream& out) {
    const Problem p = resolve_problem(cfg);
    const SolverConfig c = build_solver_config(cfg);
    const Vector x0 = resolve_point(cfg, "x0", p, p.default_start);
    validate(c, p);
    const std::optional<fs::path> dir = output_dir(cfg);

    const RunResult run = solve(p, c, x0);
    const json summary = run_summary(p, c, x0, run);
    if (dir) {
        std::ostringstream csv;
        write_trace_csv(csv, run);
        write_file(*dir / "trace.csv", csv.str());
        write_file(*dir / "summary.json", summary.dump(2) + "\n");
    }
    out << summary.dump(2) << "\n";
    return 0;
}

int cmd_suite(const json& cfg, std::ostream& out) {
    std::vector<Problem> problems;
    if (cfg.contains("problem")) problems.push_back(resolve_problem(cfg));
    else problems = corpus();
    const std::vector<Method> methods = resolve_methods(cfg, "nqn-se,lm-m,general,newton");
    const SolverConfig base = build_solver_config(cfg);
    const std::optional<fs::path> dir = output_dir(cfg);

    json rows = json::array();
    char line[256];
    std::snprintf(line, sizeof line, "%-13s %-8s %-18s %7s %12s %8s\n", "problem", "method", "termination", "iters",
                  "f", "order");
    out << line;
    for (const Problem& p : problems) {
        const Vector x0 = problems.size() == 1 ? resolve_point(cfg, "x0", p, p.default_start) : p.default_start;
        for (Method m : methods) {
            SolverConfig c = base;
            c.method = m;
            if (c.deltas && ((m == Method::LmM) != (c.deltas->size() == 2))) c.deltas.reset();
            json row;
            row["problem"] = p.name;
            row["method"] = std::string(to_string(m));
            try {
                validate(c, p);
            } catch (const ConfigError& e) {
                row["termination"] = "skipped";
                row["reason"] = e.what();
                std::snprintf(line, sizeof line, "%-13s %-8s %-18s\n", p.name.c_str(), std::string(to_string(m)).c_str(),
                              "skipped");
                out << line;
                rows.push_back(row);
                continue;
            }
            try {
                const RunResult run = solve(p, c, x0);
                row = run_summary(p, c, x0, run);
                std::snprintf(line, sizeof line, "%-13s %-8s %-18s %7zu %12.4e %8s\n", p.name.c_str(),
                              std::string(to_string(m)).c_str(), std::string(to_string(run.termination)).c_str(),
                              run.trace.size(), run.trace.back().f_val,
                              run.order_estimate ? order_text(*run.order_estimate).c_str() : "-");
            } catch (const Error& e) {
                row["termination"] = "error";
                row["reason"] = e.what();
                std::snprintf(line, sizeof line, "%-13s %-8s %-18s\n", p.name.c_str(), std::string(to_string(m)).c_str(),
                              "error");
            }
            out << line;
            rows.push_back(row);
        }
    }
    if (dir) write_file(*dir / "suite.json", rows.dump(2) + "\n");
    return 0;
}

int cmd_basin(const json& cfg, std::ostream& out) {
    const Problem p = resolve_problem(cfg, "cubic2d");
    if (p.domain_dim != 2 || p.codomain_dim != 2) throw ConfigError("problem", "basin needs a 2-D square system");
    const SolverConfig c = build_solver_config(cfg);
    validate(c, p);
    Rect rect{get_double(cfg, "xmin", -2.0), get_double(cfg, "xmax", 2.0), get_double(cfg, "ymin", -2.0),
              get_double(cfg, "ymax", 2.0)};
    if (!(rect.x_min < rect.x_max)) throw ConfigError("xmax", "must exceed xmin");
    if (!(rect.y_min < rect.y_max)) throw ConfigError("ymax", "must exceed ymin");
    const long long nx = get_int(cfg, "nx", 201);
    const long long ny = get_int(cfg, "ny", 201);
    if (nx < 1 || nx > 100000) throw ConfigError("nx", "must lie in [1, 100000]");
    if (ny < 1 || ny > 100000) throw ConfigError("ny", "must lie in [1, 100000]");
    const std::optional<fs::path> dir = output_dir(cfg);

    const BasinGrid grid = basin_grid(p, rect, static_cast<int>(nx), static_cast<int>(ny), c, p.known_roots);
    std::vector<int> counts(p.known_roots.size(), 0);
    int none = 0;
    for (int idx : grid.root_index) {
        if (idx < 0) ++none;
        else ++counts[static_cast<std::size_t>(idx)];
    }
    json summary;
    summary["problem"] = p.name;
    summary["method"] = std::string(to_string(c.method));
    summary["seed"] = c.rng_seed;
    summary["rect"] = {rect.x_min, rect.x_max, rect.y_min, rect.y_max};
    summary["nx"] = nx;
    summary["ny"] = ny;
    json roots = json::array();
    for (const Vector& r : p.known_roots) roots.push_back(to_json(r));
    summary["roots"] = roots;
    summary["cells_per_root"] = counts;
    summary["non_converged"] = none;
    if (dir) {
        std::ostringstream pgm;
        std::ostringstream csv;
        write_basin_pgm(pgm, grid, static_cast<int>(p.known_roots.size()));
        write_basin_csv(csv, grid);
        write_file(*dir / "basin.pgm", pgm.str());
        write_file(*dir / "basin.csv", csv.str());
        write_file(*dir / "basin.json", summary.dump(2) + "\n");
    }
    out << summary.dump(2) << "\n";
    return 0;
}

int cmd_mc_saddle(const json& cfg, std::ostream& out) {
    const Problem p = resolve_problem(cfg, "saddle1d");
    const SolverConfig c = build_solver_config(cfg);
    validate(c, p);
    const Vector center = resolve_point(cfg, "center", p, Vector::Zero(p.domain_dim));
    const double radius = get_double(cfg, "radius", 0.05);
    if (!(radius >= 0.0)) throw ConfigError("radius", "must be non-negative");
    const long long trials = get_int(cfg, "trials", 100);
    if (trials < 1 || trials > 10000000) throw ConfigError("trials", "must be >= 1");
    const std::optional<fs::path> dir = output_dir(cfg);

    const EscapeSummary s = saddle_escape_mc(p, center, radius, static_cast<int>(trials), c);
    json summary;
    summary["problem"] = p.name;
    summary["method"] = std::string(to_string(c.method));
    summary["seed"] = c.rng_seed;
    summary["center"] = to_json(center);
    summary["radius"] = radius;
    summary["trials"] = s.trials;
    summary["escapes"] = s.escapes;
    summary["at_center"] = s.at_center;
    summary["root_hits"] = s.root_hits;
    summary["terminations"] = s.terminations;
    summary["limit_classes"] = s.limit_classes;
    if (dir) write_file(*dir / "mc_saddle.json", summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
    return 0;
}

int cmd_rate(const json& cfg, std::ostream& out) {
    std::vector<Problem> problems;
    if (cfg.contains("problem")) problems.push_back(resolve_problem(cfg));
    else problems = corpus();
    const std::vector<Method> methods = resolve_methods(cfg, "nqn-se,lm-m");
    const SolverConfig base = build_solver_config(cfg);
    const std::optional<fs::path> dir = output_dir(cfg);

    json rows = json::array();
    for (const Problem& p : problems) {
        const Vector x0 = problems.size() == 1 ? resolve_point(cfg, "x0", p, p.default_start) : p.default_start;
        for (Method m : methods) {
            SolverConfig c = base;
            c.method = m;
            if (c.deltas && ((m == Method::LmM) != (c.deltas->size() == 2))) c.deltas.reset();
            json row;
            row["problem"] = p.name;
            row["method"] = std::string(to_string(m));
            try {
                validate(c, p);
                const RunResult run = solve(p, c, x0);
                row["termination"] = std::string(to_string(run.termination));
                row["order_estimate"] = to_json(run.order_estimate);
            } catch (const Error& e) {
                row["termination"] = "skipped";
                row["order_estimate"] = nullptr;
                row["reason"] = e.what();
            }
            char line[160];
            std::snprintf(line, sizeof line, "%-13s %-8s %-18s %s\n", p.name.c_str(), std::string(to_string(m)).c_str(),
                          row["termination"].get<std::string>().c_str(),
                          row["order_estimate"].is_null() ? "-" : fmt(row["order_estimate"].get<double>()).c_str());
            out << line;
            rows.push_back(row);
        }
    }
    if (dir) write_file(*dir / "rate.json", rows.dump(2) + "\n");
    return 0;
}

int cmd_check(const json& cfg, std::ostream& out) {
    std::vector<Problem> problems;
    if (cfg.contains("problem")) problems.push_back(resolve_problem(cfg));
    else problems = corpus();
    const std::vector<Method> methods = resolve_methods(cfg, "nqn-se,lm-m,general");
    const SolverConfig base = build_solver_config(cfg);
    const long long trials = get_int(cfg, "trials", 10);
    if (trials < 1) throw ConfigError("trials", "must be >= 1");

    bool all_ok = true;
    for (const Problem& p : problems) {
        for (Method m : methods) {
            SolverConfig c = base;
            c.method = m;
            c.deltas.reset();
            try {
                validate(c, p);
            } catch (const ConfigError&) {
                continue;
            }
            Rng rng(Rng::derive(base.rng_seed, stable_hash(p.name)));
            int failed = 0;
            for (long long t = 0; t < trials; ++t) {
                Vector x0 = p.default_start;
                for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += rng.uniform(-2.0, 2.0);
                c.rng_seed = rng.next_u64();
                if (!audit_run(p, c, x0).ok()) ++failed;
            }
            all_ok = all_ok && failed == 0;
            char line[160];
            std::snprintf(line, sizeof line, "%s %-13s %-8s %lld runs, %d with violations\n", failed ? "FAIL" : "PASS",
                          p.name.c_str(), std::string(to_string(m)).c_str(), trials, failed);
            out << line;
        }
    }
    return all_ok ? 0 : 2;
}

}  // namespace

void write_trace_csv(std::ostream& os, const RunResult& run) {
    const Eigen::Index m = run.final_x.size();
    os << "k";
    for (Eigen::Index i = 0; i < m; ++i) os << ",x" << i;
    os << ",f,grad_half_norm,delta_index,branch,minsp_A,gamma,step_norm\n";
    for (const TraceRecord& r : run.trace) {
        os << r.k;
        for (Eigen::Index i = 0; i < m; ++i) os << ',' << fmt(r.x(i));
        os << ',' << fmt(r.f_val) << ',' << fmt(r.grad_half_norm) << ',';
        if (r.delta_index) os << *r.delta_index;
        os << ',' << to_string(r.branch) << ',';
        if (r.minsp_a) os << fmt(*r.minsp_a);
        os << ',' << fmt(r.gamma) << ',' << fmt(r.step_norm) << '\n';
    }
}

void write_basin_pgm(std::ostream& os, const BasinGrid& grid, int root_count) {
    constexpr int kMaxGray = 255;
    os << "P2\n" << grid.nx << ' ' << grid.ny << '\n' << kMaxGray << '\n';
    for (int iy = grid.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const int idx = grid.at(ix, iy);
            const int level = idx < 0 ? 0 : (idx + 1) * kMaxGray / std::max(1, root_count);
            os << level << (ix + 1 < grid.nx ? ' ' : '\n');
        }
    }
}

void write_basin_csv(std::ostream& os, const BasinGrid& grid) {
    os << "ix,iy,root_index,iters\n";
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const std::size_t cell = static_cast<std::size_t>(iy) * grid.nx + ix;
            os << ix << ',' << iy << ',' << grid.root_index[cell] << ',' << grid.iterations[cell] << '\n';
        }
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regularized Newton-type solvers for systems of nonlinear equations"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        FlagSet flags;
        int (*run)(const json&, std::ostream&);
    };
    std::vector<std::unique_ptr<Sub>> subs;
    auto add_sub = [&](const char* name, const char* help, int (*run)(const json&, std::ostream&)) -> Sub& {
        auto sub = std::make_unique<Sub>();
        sub->app = app.add_subcommand(name, help);
        sub->flags.add_common(sub->app);
        sub->run = run;
        subs.push_back(std::move(sub));
        return *subs.back();
    };

    add_sub("solve", "one run; trace CSV and summary JSON", cmd_solve);
    Sub& suite = add_sub("suite", "every corpus problem x selected methods", cmd_suite);
    suite.flags.add(suite.app, kMethodsFlag);
    Sub& basin = add_sub("basin", "basin-of-attraction grid (PGM + CSV)", cmd_basin);
    for (const FlagSpec& spec : kGridFlags) basin.flags.add(basin.app, spec);
    Sub& mc = add_sub("mc-saddle", "saddle-escape Monte Carlo", cmd_mc_saddle);
    for (const FlagSpec& spec : kMcFlags) mc.flags.add(mc.app, spec);
    Sub& rate = add_sub("rate", "convergence-order estimates", cmd_rate);
    rate.flags.add(rate.app, kMethodsFlag);
    Sub& check = add_sub("check", "invariant audit over seeded random starts", cmd_check);
    check.flags.add(check.app, kMethodsFlag);
    check.flags.add(check.app, {"trials", "runs per problem and method"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& sub : subs) {
        if (!sub->app->parsed()) continue;
        try {
            return sub->run(sub->flags.merged(), out);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 1;
}

}  // namespace qnewton::cli
