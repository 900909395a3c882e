#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mameshfree/geometry.hpp"
#include "mameshfree/kernel.hpp"
#include "mameshfree/ma_operator.hpp"
#include "mameshfree/trialspace.hpp"

namespace mameshfree {

enum class TolMode { Absolute, Theory };

struct SolverConfig {
    int max_iters = 50;
    TolMode tol_mode = TolMode::Absolute;
    double tol = 1e-8;      // absolute mode
    double theory_C = 1.0;  // constant C of the theory tolerance
    double norm_u = 1.0;    // surrogate Sobolev norm of u* (theory mode)
    double lm_lambda0 = 1e-6;
    double lm_growth = 10.0;
    double step_tol = 1e-14;
    double boundary_weight = 1.0;

    bool operator==(const SolverConfig&) const = default;

    void validate() const {
        if (max_iters < 0) throw std::invalid_argument("SolverConfig: max_iters must be >= 0");
        if (!(tol > 0.0 && theory_C > 0.0 && norm_u > 0.0 && lm_lambda0 > 0.0 &&
              step_tol > 0.0 && boundary_weight > 0.0))
            throw std::invalid_argument("SolverConfig: parameters must be positive");
        if (!(lm_growth > 1.0)) throw std::invalid_argument("SolverConfig: lm_growth must exceed 1");
    }
};

struct IterationRecord {
    double res_l2 = 0.0;
    double res_inf_interior = 0.0;
    double res_inf_boundary = 0.0;
    double lambda = 0.0;
};

struct SolveReport {
    Coefficients coefficients;
    int iterations = 0;
    double res_inf_interior = 0.0;
    double res_inf_boundary = 0.0;
    double res_l2 = 0.0;
    bool converged = false;
    double convex_fraction = 0.0;
    double tol_active = 0.0;
    std::vector<IterationRecord> history;  // initial state + accepted steps
    std::string warning;
};

/// Suggested stopping tolerance C·s_B^{1/2}·δ^{−σ}·h_Y^{σ−3}·‖u‖ (d = 2).
inline double tol_from_theory(double c, double s_b, double delta, double sigma, double h_y,
                              double norm_u) {
    if (!(c > 0.0 && s_b > 0.0 && delta > 0.0 && sigma > 0.0 && h_y > 0.0 && norm_u > 0.0))
        throw std::domain_error("tol_from_theory: all inputs must be positive");
    return c * std::sqrt(s_b) * std::pow(delta, -sigma) * std::pow(h_y, sigma - 3.0) * norm_u;
}

struct OversamplingCheck {
    double value = 0.0;
    bool ok = false;
};

/// Oversampling condition value CCb·δ^σ·s_X^{σ−2}·h_Y^{1−σ}; the testing
/// scale must make this < 1/2.
inline OversamplingCheck oversampling_check(double c_cb, double delta, double sigma, double s_x,
                                            double h_y) {
    if (!(c_cb > 0.0 && delta > 0.0 && sigma > 0.0 && s_x > 0.0 && h_y > 0.0))
        throw std::domain_error("oversampling_check: all inputs must be positive");
    const double value =
        c_cb * std::pow(delta, sigma) * std::pow(s_x, sigma - 2.0) * std::pow(h_y, 1.0 - sigma);
    return {value, value < 0.5};
}

/// Uniformly convex starting iterate: v0 = μ(x²+y²)/2 + affine, with
/// μ² = mean of f over interior centers and the affine part the
/// least-squares fit of g − μ(x²+y²)/2 over boundary centers; c0
/// interpolates v0 at all centers.
inline Coefficients initial_guess(const Problem& problem, const TrialSpace& ts) {
    const PointSet& centers = ts.centers();
    double mu = 1.0;
    if (!centers.interior.empty()) {
        double mean = 0.0;
        for (const auto& p : centers.interior) {
            const double fv = problem.f(p.x(), p.y());
            if (!(fv > 0.0)) throw std::runtime_error("f not strictly positive");
            mean += fv;
        }
        mu = std::sqrt(mean / static_cast<double>(centers.interior.size()));
    }
    Eigen::Vector3d abc = Eigen::Vector3d::Zero();
    if (!centers.boundary.empty()) {
        const auto nb = static_cast<Eigen::Index>(centers.boundary.size());
        Eigen::MatrixXd b(nb, 3);
        Eigen::VectorXd t(nb);
        for (Eigen::Index i = 0; i < nb; ++i) {
            const Eigen::Vector2d& p = centers.boundary[static_cast<std::size_t>(i)];
            b.row(i) << 1.0, p.x(), p.y();
            t[i] = problem.g(p.x(), p.y()) - 0.5 * mu * p.squaredNorm();
        }
        abc = b.colPivHouseholderQr().solve(t);
    }
    const auto pts = centers.all_points();
    Eigen::VectorXd vals(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        vals[static_cast<Eigen::Index>(i)] =
            0.5 * mu * pts[i].squaredNorm() + abc[0] + abc[1] * pts[i].x() + abc[2] * pts[i].y();
    return interpolate(ts, vals);
}

namespace detail {

struct ResidualState {
    double l2 = 0.0;       // stacked norm (boundary block weighted)
    double inf_i = 0.0;    // unweighted block ∞-norms
    double inf_b = 0.0;
};

inline ResidualState residual_state(const Problem& problem, const TrialSpace& ts,
                                    const Coefficients& c, const PointSet& x, double w_b) {
    const CollocationSystem sys = assemble_collocation(problem, ts, c, x, false);
    ResidualState st;
    st.inf_i = sys.r_interior.size() ? sys.r_interior.lpNorm<Eigen::Infinity>() : 0.0;
    st.inf_b = sys.r_boundary.size() ? sys.r_boundary.lpNorm<Eigen::Infinity>() : 0.0;
    st.l2 = std::sqrt(sys.r_interior.squaredNorm() + w_b * w_b * sys.r_boundary.squaredNorm());
    return st;
}

}  // namespace detail

/// Damped Gauss–Newton on the stacked least-squares residual, stopping on
/// the ∞-norm criterion max(‖r_I‖∞, ‖r_B‖∞) ≤ tol. Steps solve
/// (JᵀJ + λI)d = −Jᵀr; rejected steps grow λ, accepted steps shrink it.
/// Metrics are only needed (and computed if absent) in theory-tol mode.
inline SolveReport gauss_newton_solve(const Problem& problem, const TrialSpace& ts,
                                      const PointSet& x, const SolverConfig& cfg,
                                      const MeshMetrics* trial_metrics = nullptr,
                                      const MeshMetrics* test_metrics = nullptr) {
    cfg.validate();
    SolveReport rep;
    if (cfg.tol_mode == TolMode::Absolute) {
        rep.tol_active = cfg.tol;
    } else {
        const MeshMetrics tm =
            trial_metrics ? *trial_metrics : metrics(problem.domain, ts.centers(), 256);
        const MeshMetrics xm = test_metrics ? *test_metrics : metrics(problem.domain, x, 256);
        rep.tol_active = tol_from_theory(cfg.theory_C, xm.s_B(), ts.kernel().delta,
                                         sobolev_order(ts.kernel().family), tm.h_Y, cfg.norm_u);
    }
    if (x.size() < ts.size()) rep.warning = "test set smaller than trial set (M < N)";

    const double w_b = cfg.boundary_weight;
    Coefficients c = initial_guess(problem, ts);
    detail::ResidualState cur = detail::residual_state(problem, ts, c, x, w_b);
    double lambda = cfg.lm_lambda0;
    rep.history.push_back({cur.l2, cur.inf_i, cur.inf_b, lambda});

    const auto met = [&](const detail::ResidualState& st) {
        return std::max(st.inf_i, st.inf_b) <= rep.tol_active;
    };
    if (cfg.max_iters > 0) {
        rep.converged = met(cur);
        while (!rep.converged && rep.iterations < cfg.max_iters) {
            CollocationSystem sys = assemble_collocation(problem, ts, c, x, true);
            const auto mi = sys.r_interior.size();
            const auto mb = sys.r_boundary.size();
            Eigen::MatrixXd j = std::move(sys.jacobian);
            if (w_b != 1.0 && mb > 0) j.bottomRows(mb) *= w_b;
            Eigen::VectorXd r(mi + mb);
            r.head(mi) = sys.r_interior;
            r.tail(mb) = w_b * sys.r_boundary;
            const Eigen::MatrixXd jtj = j.transpose() * j;
            const Eigen::VectorXd grad = j.transpose() * r;

            bool accepted = false;
            double step_inf = 0.0;
            for (int retry = 0; retry < 20 && !accepted; ++retry) {
                Eigen::MatrixXd damped = jtj;
                damped.diagonal().array() += lambda;
                const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
                if (ldlt.info() != Eigen::Success) {
                    if (retry == 19) throw std::runtime_error("solver stalled");
                    lambda *= cfg.lm_growth;
                    continue;
                }
                const Eigen::VectorXd d = ldlt.solve(-grad);
                Coefficients cand{c.c + d};
                const detail::ResidualState nxt =
                    detail::residual_state(problem, ts, cand, x, w_b);
                if (nxt.l2 < cur.l2) {
                    accepted = true;
                    step_inf = d.lpNorm<Eigen::Infinity>();
                    const double lambda_used = lambda;
                    c = std::move(cand);
                    cur = nxt;
                    lambda = std::max(lambda / cfg.lm_growth, 1e-12);
                    ++rep.iterations;
                    rep.history.push_back({cur.l2, cur.inf_i, cur.inf_b, lambda_used});
                } else {
                    lambda *= cfg.lm_growth;
                }
            }
            if (!accepted) {
                rep.warning = "no descent step found at maximum damping";
                break;
            }
            if (met(cur)) {
                rep.converged = true;
            } else if (step_inf < cfg.step_tol) {
                rep.warning = "step size below step_tol before reaching tolerance";
                break;
            }
        }
    }

    rep.coefficients = std::move(c);
    rep.res_l2 = cur.l2;
    rep.res_inf_interior = cur.inf_i;
    rep.res_inf_boundary = cur.inf_b;
    rep.convex_fraction = convex_fraction(ts, rep.coefficients, x.interior);
    return rep;
}

/// key = value serialization of a solve (coefficients go to their own CSV).
inline void write_report(std::ostream& os, const SolveReport& rep) {
    os.precision(17);
    os << std::boolalpha;
    os << "iterations = " << rep.iterations << '\n'
       << "converged = " << rep.converged << '\n'
       << "tol = " << rep.tol_active << '\n'
       << "res_inf_interior = " << rep.res_inf_interior << '\n'
       << "res_inf_boundary = " << rep.res_inf_boundary << '\n'
       << "res_l2 = " << rep.res_l2 << '\n'
       << "convex_fraction = " << rep.convex_fraction << '\n';
    if (!rep.warning.empty()) os << "warning = " << rep.warning << '\n';
    for (std::size_t k = 0; k < rep.history.size(); ++k) {
        const IterationRecord& h = rep.history[k];
        os << "history_" << k << " = " << h.res_l2 << ' ' << h.res_inf_interior << ' '
           << h.res_inf_boundary << ' ' << h.lambda << '\n';
    }
}

}  // namespace mameshfree
