#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mameshfree/fields.hpp"
#include "mameshfree/geometry.hpp"
#include "mameshfree/parallel.hpp"
#include "mameshfree/trialspace.hpp"

namespace mameshfree {

/// Second partials of a scalar function at a point.
struct HessianSample {
    double uxx = 0.0, uxy = 0.0, uyy = 0.0;
};

/// det(D²u) — the Monge-Ampère operator applied pointwise.
inline double ma_det(const HessianSample& h) { return h.uxx * h.uyy - h.uxy * h.uxy; }

/// Derivative of ma_det at u in direction v:
/// u_yy v_xx + u_xx v_yy − 2 u_xy v_xy.
inline double frechet_apply(const HessianSample& hu, const HessianSample& hv) {
    return hu.uyy * hv.uxx + hu.uxx * hv.uyy - 2.0 * hu.uxy * hv.uxy;
}

/// Positive definite 2×2 test: leading minor and determinant both positive.
inline bool convexity_indicator(const HessianSample& h) {
    return h.uxx > 0.0 && ma_det(h) > 0.0;
}

/// det(D²u) = f in Ω, u = g on ∂Ω, with an optional manufactured solution
/// for error reporting. f must be strictly positive wherever it is sampled.
struct Problem {
    std::string name;
    Domain domain = Domain::unit_square();
    ScalarField f;
    ScalarField g;
    ScalarField exact;    // optional
    JetField exact_jet;   // optional, consistent with exact

    bool has_exact() const { return static_cast<bool>(exact); }
};

namespace detail {

inline HessianSample hessian_of(const Jet2& j) { return {j.hxx, j.hxy, j.hyy}; }

}  // namespace detail

/// Stacked residual and (optionally) its exact Jacobian at coefficients c:
/// interior rows det(D²s) − f, boundary rows s − g, interior block first.
struct CollocationSystem {
    Eigen::VectorXd r_interior;
    Eigen::VectorXd r_boundary;
    Eigen::MatrixXd jacobian;  // (M_I + M_B) × N when requested, else 0×0
};

inline CollocationSystem assemble_collocation(const Problem& problem, const TrialSpace& ts,
                                              const Coefficients& coeff, const PointSet& x,
                                              bool want_jacobian) {
    const std::size_t mi = x.interior.size(), mb = x.boundary.size();
    const auto n = static_cast<Eigen::Index>(ts.size());
    CollocationSystem sys;
    sys.r_interior.resize(static_cast<Eigen::Index>(mi));
    sys.r_boundary.resize(static_cast<Eigen::Index>(mb));
    if (want_jacobian) sys.jacobian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mi + mb), n);

    std::vector<int> bad(mi, 0);
    parallel_for(mi, [&](std::size_t i) {
        const Eigen::Vector2d& p = x.interior[i];
        const double fv = problem.f(p.x(), p.y());
        if (!(fv > 0.0)) {
            bad[i] = 1;
            return;
        }
        thread_local std::vector<int> idx;
        ts.bins().query(p, ts.kernel().delta, idx);
        thread_local std::vector<KernelJet> jets;
        jets.clear();
        HessianSample hs;
        for (int j : idx) {
            jets.push_back(scaled_jet(ts.kernel(), p, ts.points()[j]));
            const KernelJet& kj = jets.back();
            hs.uxx += coeff.c[j] * kj.hessian(0, 0);
            hs.uxy += coeff.c[j] * kj.hessian(0, 1);
            hs.uyy += coeff.c[j] * kj.hessian(1, 1);
        }
        sys.r_interior[static_cast<Eigen::Index>(i)] = ma_det(hs) - fv;
        if (want_jacobian) {
            auto row = sys.jacobian.row(static_cast<Eigen::Index>(i));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const Eigen::Matrix2d& h = jets[k].hessian;
                row[idx[k]] = frechet_apply(hs, {h(0, 0), h(0, 1), h(1, 1)});
            }
        }
    });
    for (std::size_t i = 0; i < mi; ++i)
        if (bad[i]) throw std::runtime_error("f not strictly positive");

    parallel_for(mb, [&](std::size_t i) {
        const Eigen::Vector2d& p = x.boundary[i];
        thread_local std::vector<int> idx;
        ts.bins().query(p, ts.kernel().delta, idx);
        double s = 0.0;
        for (int j : idx) {
            const double v = scaled_eval(ts.kernel(), p, ts.points()[j]);
            s += coeff.c[j] * v;
            if (want_jacobian) sys.jacobian(static_cast<Eigen::Index>(mi + i), j) = v;
        }
        sys.r_boundary[static_cast<Eigen::Index>(i)] = s - problem.g(p.x(), p.y());
    });
    return sys;
}

/// Interior and boundary residual blocks of the collocation system.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> residuals(const Problem& problem,
                                                             const TrialSpace& ts,
                                                             const Coefficients& coeff,
                                                             const PointSet& x) {
    CollocationSystem sys = assemble_collocation(problem, ts, coeff, x, false);
    return {std::move(sys.r_interior), std::move(sys.r_boundary)};
}

/// Exact derivative of the stacked residual with respect to c. The boundary
/// block is constant in c; the interior block is linear in c.
inline Eigen::MatrixXd jacobian(const Problem& problem, const TrialSpace& ts,
                                const Coefficients& coeff, const PointSet& x) {
    return assemble_collocation(problem, ts, coeff, x, true).jacobian;
}

/// Fraction of the given interior points where D²s passes the positive
/// definite test.
inline double convex_fraction(const TrialSpace& ts, const Coefficients& coeff,
                              const std::vector<Eigen::Vector2d>& interior_pts) {
    if (interior_pts.empty()) return 0.0;
    std::vector<int> flags(interior_pts.size(), 0);
    parallel_for(interior_pts.size(), [&](std::size_t i) {
        const Jet2 j = eval_jet(ts, coeff, interior_pts[i]);
        flags[i] = convexity_indicator(detail::hessian_of(j)) ? 1 : 0;
    });
    long count = 0;
    for (int f : flags) count += f;
    return static_cast<double>(count) / static_cast<double>(interior_pts.size());
}

}  // namespace mameshfree
