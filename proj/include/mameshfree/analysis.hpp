#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mameshfree/fields.hpp"
#include "mameshfree/geometry.hpp"
#include "mameshfree/kernel.hpp"
#include "mameshfree/ma_operator.hpp"
#include "mameshfree/parallel.hpp"
#include "mameshfree/solver.hpp"
#include "mameshfree/trialspace.hpp"

namespace mameshfree {

/// Midpoint-rule L² distance between two fields over the domain: uniform
/// bbox grid, a cell counts iff its center is inside.
inline double l2_error(const Domain& domain, const ScalarField& a, const ScalarField& b,
                       int resolution) {
    if (resolution < 16) throw std::invalid_argument("l2_error: resolution must be >= 16");
    Eigen::Vector2d lo, hi;
    domain.bbox(lo, hi);
    const double wx = (hi.x() - lo.x()) / resolution, wy = (hi.y() - lo.y()) / resolution;
    const double cell = wx * wy;
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
    const double sum = parallel_sum(n, [&](std::size_t k) {
        const int ix = static_cast<int>(k) % resolution, iy = static_cast<int>(k) / resolution;
        const double x = lo.x() + (ix + 0.5) * wx, y = lo.y() + (iy + 0.5) * wy;
        if (!domain.inside({x, y})) return 0.0;
        const double d = a(x, y) - b(x, y);
        return cell * d * d;
    });
    return std::sqrt(sum);
}

/// Max |a − b| over the same sample points as l2_error.
inline double linf_error(const Domain& domain, const ScalarField& a, const ScalarField& b,
                         int resolution) {
    if (resolution < 16) throw std::invalid_argument("linf_error: resolution must be >= 16");
    Eigen::Vector2d lo, hi;
    domain.bbox(lo, hi);
    const double wx = (hi.x() - lo.x()) / resolution, wy = (hi.y() - lo.y()) / resolution;
    std::vector<double> row_max(resolution, 0.0);
    parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t iy) {
        const double y = lo.y() + (iy + 0.5) * wy;
        double m = 0.0;
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = lo.x() + (ix + 0.5) * wx;
            if (!domain.inside({x, y})) continue;
            m = std::max(m, std::abs(a(x, y) - b(x, y)));
        }
        row_max[iy] = m;
    });
    double m = 0.0;
    for (double v : row_max) m = std::max(m, v);
    return m;
}

/// Empirical order: log(e_prev/e_cur) / log(h_prev/h_cur).
inline double estimate_rate(double e_prev, double e_cur, double h_prev, double h_cur) {
    if (!(e_prev > 0.0 && e_cur > 0.0 && h_prev > 0.0 && h_cur > 0.0))
        throw std::domain_error("estimate_rate: all inputs must be positive");
    if (h_prev == h_cur) throw std::domain_error("estimate_rate: h values must differ");
    return std::log(e_prev / e_cur) / std::log(h_prev / h_cur);
}

/// Support-radius schedule across refinement levels: fixed δ
/// (non-stationary) or δ = c·h_Y (stationary).
struct DeltaRule {
    enum class Kind { Fixed, Proportional };
    Kind kind = Kind::Fixed;
    double value = 0.7;

    static DeltaRule fixed(double delta) { return {Kind::Fixed, delta}; }
    static DeltaRule proportional(double c) { return {Kind::Proportional, c}; }
};

struct ConvergenceRow {
    int level = 0;
    double h_Y = 0.0, q_Y = 0.0, s_X = 0.0, delta = 0.0;
    int N = 0, M = 0, iterations = 0;
    double res_inf_interior = 0.0, res_inf_boundary = 0.0;
    double e_l2 = std::numeric_limits<double>::quiet_NaN();
    double e_inf = std::numeric_limits<double>::quiet_NaN();
    double rate_l2 = std::numeric_limits<double>::quiet_NaN();  // blank on first level
    double oversampling_value = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

struct StudyOptions {
    int test_refinement = 2;    // s_X ≈ h_Y / test_refinement
    int error_resolution = 256;
    long seed = 0;
};

/// Refinement study: level ℓ uses target spacing base_h/2^ℓ for the trial
/// set and base_h/(2^ℓ·test_refinement) for the finer test set. A failure
/// at one level is recorded in its row and the study continues.
inline std::vector<ConvergenceRow> convergence_study(const Problem& problem, KernelFamily family,
                                                     double base_h, int levels,
                                                     const DeltaRule& rule,
                                                     const SolverConfig& cfg,
                                                     const StudyOptions& opts = {}) {
    if (levels < 2) throw std::invalid_argument("convergence_study: at least 2 levels required");
    if (!problem.has_exact())
        throw std::invalid_argument("convergence_study: problem must carry an exact solution");
    if (opts.test_refinement < 1)
        throw std::invalid_argument("convergence_study: test_refinement must be >= 1");

    std::vector<ConvergenceRow> rows;
    rows.reserve(levels);
    for (int level = 0; level < levels; ++level) {
        ConvergenceRow row;
        row.level = level;
        const double target = base_h / static_cast<double>(1 << level);
        try {
            const PointSet y = generate_points(problem.domain, target, PointRole::Trial, opts.seed);
            const PointSet x = generate_points(problem.domain, target / opts.test_refinement,
                                               PointRole::Test, opts.seed);
            const int probe_res = std::clamp(
                static_cast<int>(16.0 * problem.domain.diameter() / target), 128, 512);
            const MeshMetrics my = metrics(problem.domain, y, probe_res);
            const MeshMetrics mx = metrics(problem.domain, x, probe_res);
            row.h_Y = my.h_Y;
            row.q_Y = my.q_Y;
            row.s_X = mx.s_X();
            row.N = static_cast<int>(y.size());
            row.M = static_cast<int>(x.size());
            const double delta =
                rule.kind == DeltaRule::Kind::Fixed ? rule.value : rule.value * my.h_Y;
            row.delta = delta;
            const double sigma = sobolev_order(family);
            row.oversampling_value = oversampling_check(1.0, delta, sigma, mx.s_X(), my.h_Y).value;

            const TrialSpace ts(y, ScaledKernel(family, delta));
            const SolveReport rep = gauss_newton_solve(problem, ts, x, cfg, &my, &mx);
            row.iterations = rep.iterations;
            row.res_inf_interior = rep.res_inf_interior;
            row.res_inf_boundary = rep.res_inf_boundary;
            row.converged = rep.converged;

            const ScalarField approx = [&ts, c = rep.coefficients](double px, double py) {
                return eval(ts, c, {px, py});
            };
            row.e_l2 = l2_error(problem.domain, problem.exact, approx, opts.error_resolution);
            row.e_inf = linf_error(problem.domain, problem.exact, approx, opts.error_resolution);
        } catch (const std::exception&) {
            row.converged = false;
        }
        if (!rows.empty()) {
            const ConvergenceRow& prev = rows.back();
            if (std::isfinite(prev.e_l2) && std::isfinite(row.e_l2) && prev.e_l2 > 0.0 &&
                row.e_l2 > 0.0 && prev.h_Y > 0.0 && row.h_Y > 0.0 && prev.h_Y != row.h_Y)
                row.rate_l2 = estimate_rate(prev.e_l2, row.e_l2, prev.h_Y, row.h_Y);
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "level,h_Y,q_Y,s_X,delta,N,M,iters,res_inf_I,res_inf_B,e_l2,e_inf,rate_l2,"
          "oversampling_value,converged\n";
    os.precision(17);
    auto cell = [&os](double v) {
        if (std::isfinite(v))
            os << v;
        os << ',';
    };
    for (const ConvergenceRow& r : rows) {
        os << r.level << ',';
        cell(r.h_Y);
        cell(r.q_Y);
        cell(r.s_X);
        cell(r.delta);
        os << r.N << ',' << r.M << ',' << r.iterations << ',';
        cell(r.res_inf_interior);
        cell(r.res_inf_boundary);
        cell(r.e_l2);
        cell(r.e_inf);
        cell(r.rate_l2);
        cell(r.oversampling_value);
        os << (r.converged ? 1 : 0) << '\n';
    }
}

inline void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_convergence_csv(os, rows);
}

namespace detail {

struct QuadNorms {
    double l2_sq = 0.0;
    double h2_sq = 0.0;  // order-2 norm: value + gradient + Hessian (Frobenius)
};

template <typename JetAt>
QuadNorms quad_norms(const Domain& domain, JetAt&& jet_at, int resolution) {
    Eigen::Vector2d lo, hi;
    domain.bbox(lo, hi);
    const double wx = (hi.x() - lo.x()) / resolution, wy = (hi.y() - lo.y()) / resolution;
    const double cell = wx * wy;
    std::vector<QuadNorms> rows(resolution);
    parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t iy) {
        QuadNorms acc;
        const double y = lo.y() + (iy + 0.5) * wy;
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = lo.x() + (ix + 0.5) * wx;
            if (!domain.inside({x, y})) continue;
            const Jet2 j = jet_at(x, y);
            const double lower = j.value * j.value;
            const double higher = j.gx * j.gx + j.gy * j.gy + j.hxx * j.hxx +
                                  2.0 * j.hxy * j.hxy + j.hyy * j.hyy;
            acc.l2_sq += cell * lower;
            acc.h2_sq += cell * (lower + higher);
        }
        rows[iy] = acc;
    });
    QuadNorms out;
    for (const QuadNorms& r : rows) {
        out.l2_sq += r.l2_sq;
        out.h2_sq += r.h2_sq;
    }
    return out;
}

}  // namespace detail

/// Inverse-inequality probe: per level, the largest quadrature ratio
/// ‖s‖_{H²}/‖s‖_{L²} over random coefficient vectors, plus the log-log
/// slope of that ratio against h_Y. Order-2 norms stand in for the
/// fractional-order native norm.
struct BernsteinReport {
    std::vector<double> h_Y;
    std::vector<double> max_ratio;
    double slope = 0.0;
};

inline BernsteinReport bernstein_probe(const Domain& domain,
                                       const std::vector<TrialSpace>& spaces, int trials,
                                       int resolution, long seed) {
    if (spaces.empty()) throw std::invalid_argument("bernstein_probe: need at least one space");
    if (trials < 1) throw std::invalid_argument("bernstein_probe: trials must be positive");
    BernsteinReport rep;
    for (std::size_t lvl = 0; lvl < spaces.size(); ++lvl) {
        const TrialSpace& ts = spaces[lvl];
        rep.h_Y.push_back(metrics(domain, ts.centers(), 256).h_Y);
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 1000003ull + lvl);
        std::normal_distribution<double> normal(0.0, 1.0);
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            Coefficients c;
            c.c.resize(static_cast<Eigen::Index>(ts.size()));
            for (Eigen::Index i = 0; i < c.c.size(); ++i) c.c[i] = normal(rng);
            const auto norms = detail::quad_norms(
                domain, [&](double x, double y) { return eval_jet(ts, c, {x, y}); }, resolution);
            if (norms.l2_sq > 0.0) worst = std::max(worst, std::sqrt(norms.h2_sq / norms.l2_sq));
        }
        rep.max_ratio.push_back(worst);
    }
    // Least-squares slope of log(max_ratio) against log(h_Y).
    if (rep.h_Y.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto n = static_cast<double>(rep.h_Y.size());
        for (std::size_t i = 0; i < rep.h_Y.size(); ++i) {
            const double lx = std::log(rep.h_Y[i]), ly = std::log(rep.max_ratio[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

/// Sampling-inequality probe: per level, ‖u − I_h u‖_{L²} against
/// h_Y²·‖u − I_h u‖_{H²} for the interpolant of u at the centers; their
/// ratio should stay bounded under refinement. Order-2 norms again stand
/// in for the fractional-order norm.
struct SamplingReport {
    std::vector<double> h_Y;
    std::vector<double> l2_residual;
    std::vector<double> h2_scaled;
    std::vector<double> ratio;
};

inline SamplingReport sampling_probe(const Domain& domain, const std::vector<TrialSpace>& spaces,
                                     const JetField& u, int resolution) {
    if (spaces.empty()) throw std::invalid_argument("sampling_probe: need at least one space");
    SamplingReport rep;
    for (const TrialSpace& ts : spaces) {
        const double h = metrics(domain, ts.centers(), 256).h_Y;
        const auto pts = ts.points();
        Eigen::VectorXd vals(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
            vals[static_cast<Eigen::Index>(i)] = u(pts[i].x(), pts[i].y()).value;
        const Coefficients c = interpolate(ts, vals);
        const auto norms = detail::quad_norms(
            domain,
            [&](double x, double y) {
                const Jet2 ju = u(x, y);
                const Jet2 js = eval_jet(ts, c, {x, y});
                Jet2 e;
                e.value = ju.value - js.value;
                e.gx = ju.gx - js.gx;
                e.gy = ju.gy - js.gy;
                e.hxx = ju.hxx - js.hxx;
                e.hxy = ju.hxy - js.hxy;
                e.hyy = ju.hyy - js.hyy;
                return e;
            },
            resolution);
        const double l2 = std::sqrt(norms.l2_sq);
        const double h2s = h * h * std::sqrt(norms.h2_sq);
        rep.h_Y.push_back(h);
        rep.l2_residual.push_back(l2);
        rep.h2_scaled.push_back(h2s);
        rep.ratio.push_back(h2s > 0.0 ? l2 / h2s : 0.0);
    }
    return rep;
}

/// Manufactured problems with symbolically verified right-hand sides:
///   MA1: u* = exp((x²+y²)/2),  f = (1+x²+y²)·exp(x²+y²)
///   MA2: u* = (x²+y²)/2,       f ≡ 1
///   MA3: u* = x²+y²+eˣ,        f = 2(2+eˣ)
/// each with g = u*|∂Ω.
inline Problem make_problem(const std::string& name, const Domain& domain) {
    Problem p;
    p.name = name;
    p.domain = domain;
    if (name == "MA1") {
        p.exact = [](double x, double y) { return std::exp(0.5 * (x * x + y * y)); };
        p.exact_jet = [](double x, double y) {
            const double u = std::exp(0.5 * (x * x + y * y));
            return Jet2{u, x * u, y * u, (1.0 + x * x) * u, x * y * u, (1.0 + y * y) * u};
        };
        p.f = [](double x, double y) {
            const double r2 = x * x + y * y;
            return (1.0 + r2) * std::exp(r2);
        };
    } else if (name == "MA2") {
        p.exact = [](double x, double y) { return 0.5 * (x * x + y * y); };
        p.exact_jet = [](double x, double y) {
            return Jet2{0.5 * (x * x + y * y), x, y, 1.0, 0.0, 1.0};
        };
        p.f = [](double, double) { return 1.0; };
    } else if (name == "MA3") {
        p.exact = [](double x, double y) { return x * x + y * y + std::exp(x); };
        p.exact_jet = [](double x, double y) {
            const double e = std::exp(x);
            return Jet2{x * x + y * y + e, 2.0 * x + e, 2.0 * y, 2.0 + e, 0.0, 2.0};
        };
        p.f = [](double x, double) { return 2.0 * (2.0 + std::exp(x)); };
    } else {
        throw std::invalid_argument("unknown catalog problem: " + name);
    }
    p.g = p.exact;
    return p;
}

}  // namespace mameshfree
