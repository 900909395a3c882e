#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mameshfree/analysis.hpp"
#include "mameshfree/expr.hpp"
#include "mameshfree/geometry.hpp"
#include "mameshfree/kernel.hpp"
#include "mameshfree/solver.hpp"

namespace mameshfree {

/// A configuration problem, carrying the offending key (or file) name.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    const std::string& key() const { return key_; }

  private:
    std::string key_;
};

enum class Command { Solve, Converge, Interp, Diagnose };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Converge: return "converge";
        case Command::Interp: return "interp";
        default: return "diagnose";
    }
}

/// Parsed contents of a .run file: flat `key = value` lines with dotted
/// sections and '#' comments. Expressions are validated at parse time but
/// kept as source text so configs round-trip exactly.
struct RunConfig {
    Command command = Command::Solve;

    std::string domain_shape = "unit_disk";
    double domain_a = 1.0, domain_b = 1.0;  // ellipse only

    KernelFamily kernel_family = KernelFamily::C4;
    std::string delta_rule = "fixed";  // fixed | proportional
    double delta = 0.7;

    std::string problem_name;  // catalog name, or empty when f/g inline
    std::string expr_f, expr_g, expr_exact;

    double base_h = 0.3;
    int levels = 3;
    int test_refinement = 2;
    long seed = 0;

    SolverConfig solver;
    std::string tol_mode = "absolute";  // absolute | theory

    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;

    Domain make_domain() const {
        if (domain_shape == "unit_disk") return Domain::unit_disk();
        if (domain_shape == "unit_square") return Domain::unit_square();
        return Domain::ellipse(domain_a, domain_b);
    }

    DeltaRule make_delta_rule() const {
        return delta_rule == "fixed" ? DeltaRule::fixed(delta) : DeltaRule::proportional(delta);
    }

    /// Catalog problem, or fields compiled from the inline expressions
    /// (values only — no derivative jets).
    Problem make_problem() const {
        const Domain dom = make_domain();
        if (!problem_name.empty()) return mameshfree::make_problem(problem_name, dom);
        Problem p;
        p.name = "inline";
        p.domain = dom;
        p.f = parse_field_expr(expr_f);
        p.g = parse_field_expr(expr_g);
        if (!expr_exact.empty()) p.exact = parse_field_expr(expr_exact);
        return p;
    }
};

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError(key, "expected a number, got '" + value + "'");
    return v;
}

inline long config_long(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parse and validate config text. Rejects unknown keys, malformed values,
/// unknown catalog names, and unparsable expressions before any computation.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no),
                              "expected 'key = value', got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "missing key");
        kv[key] = value;
    }

    for (const auto& [key, value] : kv) {
        if (key == "command") {
            if (value == "solve")
                cfg.command = Command::Solve;
            else if (value == "converge")
                cfg.command = Command::Converge;
            else if (value == "interp")
                cfg.command = Command::Interp;
            else if (value == "diagnose")
                cfg.command = Command::Diagnose;
            else
                throw ConfigError(key, "unknown command '" + value + "'");
        } else if (key == "domain.shape") {
            if (value != "unit_disk" && value != "unit_square" && value != "ellipse")
                throw ConfigError(key, "unknown shape '" + value + "'");
            cfg.domain_shape = value;
        } else if (key == "domain.a") {
            cfg.domain_a = detail::config_double(key, value);
        } else if (key == "domain.b") {
            cfg.domain_b = detail::config_double(key, value);
        } else if (key == "kernel.family") {
            try {
                cfg.kernel_family = family_from_name(value);
            } catch (const std::exception& e) {
                throw ConfigError(key, e.what());
            }
        } else if (key == "kernel.delta_rule") {
            if (value != "fixed" && value != "proportional")
                throw ConfigError(key, "expected fixed|proportional, got '" + value + "'");
            cfg.delta_rule = value;
        } else if (key == "kernel.delta") {
            cfg.delta = detail::config_double(key, value);
        } else if (key == "problem.name") {
            cfg.problem_name = value;
        } else if (key == "problem.f") {
            cfg.expr_f = value;
        } else if (key == "problem.g") {
            cfg.expr_g = value;
        } else if (key == "problem.exact") {
            cfg.expr_exact = value;
        } else if (key == "discretization.base_h") {
            cfg.base_h = detail::config_double(key, value);
        } else if (key == "discretization.levels") {
            cfg.levels = static_cast<int>(detail::config_long(key, value));
        } else if (key == "discretization.test_refinement") {
            cfg.test_refinement = static_cast<int>(detail::config_long(key, value));
        } else if (key == "discretization.seed") {
            cfg.seed = detail::config_long(key, value);
        } else if (key == "solver.max_iters") {
            cfg.solver.max_iters = static_cast<int>(detail::config_long(key, value));
        } else if (key == "solver.tol_mode") {
            if (value != "absolute" && value != "theory")
                throw ConfigError(key, "expected absolute|theory, got '" + value + "'");
            cfg.tol_mode = value;
            cfg.solver.tol_mode = value == "absolute" ? TolMode::Absolute : TolMode::Theory;
        } else if (key == "solver.tol") {
            cfg.solver.tol = detail::config_double(key, value);
        } else if (key == "solver.theory_C") {
            cfg.solver.theory_C = detail::config_double(key, value);
        } else if (key == "solver.norm_u") {
            cfg.solver.norm_u = detail::config_double(key, value);
        } else if (key == "solver.lm_lambda0") {
            cfg.solver.lm_lambda0 = detail::config_double(key, value);
        } else if (key == "solver.lm_growth") {
            cfg.solver.lm_growth = detail::config_double(key, value);
        } else if (key == "solver.step_tol") {
            cfg.solver.step_tol = detail::config_double(key, value);
        } else if (key == "solver.boundary_weight") {
            cfg.solver.boundary_weight = detail::config_double(key, value);
        } else if (key == "output.dir") {
            cfg.output_dir = value;
        } else {
            throw ConfigError(key, "unknown key");
        }
    }

    // Structural validation, before any computation happens.
    if (cfg.domain_shape == "ellipse" && !(cfg.domain_a > 0.0 && cfg.domain_b > 0.0))
        throw ConfigError("domain.a", "ellipse requires positive domain.a and domain.b");
    if (cfg.problem_name.empty()) {
        if (cfg.command != Command::Diagnose && (cfg.expr_f.empty() || cfg.expr_g.empty()))
            throw ConfigError("problem.name",
                              "need a catalog problem or inline problem.f and problem.g");
    } else if (cfg.problem_name != "MA1" && cfg.problem_name != "MA2" &&
               cfg.problem_name != "MA3") {
        throw ConfigError("problem.name", "unknown catalog problem '" + cfg.problem_name + "'");
    }
    auto check_expr = [](const std::string& key, const std::string& src) {
        if (src.empty()) return;
        try {
            parse_field_expr(src);
        } catch (const ParseError& e) {
            throw ConfigError(key, e.what());
        }
    };
    check_expr("problem.f", cfg.expr_f);
    check_expr("problem.g", cfg.expr_g);
    check_expr("problem.exact", cfg.expr_exact);
    if ((cfg.command == Command::Converge || cfg.command == Command::Interp) &&
        cfg.problem_name.empty() && cfg.expr_exact.empty())
        throw ConfigError("problem.exact",
                          "converge/interp need an exact solution (catalog problem or expression)");
    if (!(cfg.base_h > 0.0)) throw ConfigError("discretization.base_h", "must be positive");
    if (cfg.levels < 1) throw ConfigError("discretization.levels", "must be >= 1");
    if (cfg.command == Command::Converge && cfg.levels < 2)
        throw ConfigError("discretization.levels", "converge needs at least 2 levels");
    if (cfg.test_refinement < 1)
        throw ConfigError("discretization.test_refinement", "must be >= 1");
    try {
        cfg.solver.validate();
    } catch (const std::exception& e) {
        throw ConfigError("solver", e.what());
    }
    if (!(cfg.delta > 0.0)) throw ConfigError("kernel.delta", "must be positive");
    if (cfg.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical echo; reparsing the output reproduces the same RunConfig.
inline void print_config(std::ostream& os, const RunConfig& cfg) {
    os.precision(17);
    os << "command = " << command_name(cfg.command) << '\n';
    os << "domain.shape = " << cfg.domain_shape << '\n';
    if (cfg.domain_shape == "ellipse") {
        os << "domain.a = " << cfg.domain_a << '\n';
        os << "domain.b = " << cfg.domain_b << '\n';
    }
    os << "kernel.family = " << family_name(cfg.kernel_family) << '\n';
    os << "kernel.delta_rule = " << cfg.delta_rule << '\n';
    os << "kernel.delta = " << cfg.delta << '\n';
    if (!cfg.problem_name.empty()) os << "problem.name = " << cfg.problem_name << '\n';
    if (!cfg.expr_f.empty()) os << "problem.f = " << cfg.expr_f << '\n';
    if (!cfg.expr_g.empty()) os << "problem.g = " << cfg.expr_g << '\n';
    if (!cfg.expr_exact.empty()) os << "problem.exact = " << cfg.expr_exact << '\n';
    os << "discretization.base_h = " << cfg.base_h << '\n';
    os << "discretization.levels = " << cfg.levels << '\n';
    os << "discretization.test_refinement = " << cfg.test_refinement << '\n';
    os << "discretization.seed = " << cfg.seed << '\n';
    os << "solver.max_iters = " << cfg.solver.max_iters << '\n';
    os << "solver.tol_mode = " << cfg.tol_mode << '\n';
    os << "solver.tol = " << cfg.solver.tol << '\n';
    os << "solver.theory_C = " << cfg.solver.theory_C << '\n';
    os << "solver.norm_u = " << cfg.solver.norm_u << '\n';
    os << "solver.lm_lambda0 = " << cfg.solver.lm_lambda0 << '\n';
    os << "solver.lm_growth = " << cfg.solver.lm_growth << '\n';
    os << "solver.step_tol = " << cfg.solver.step_tol << '\n';
    os << "solver.boundary_weight = " << cfg.solver.boundary_weight << '\n';
    os << "output.dir = " << cfg.output_dir << '\n';
}

}  // namespace mameshfree
