#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mameshfree/bins.hpp"
#include "mameshfree/fields.hpp"
#include "mameshfree/geometry.hpp"
#include "mameshfree/kernel.hpp"
#include "mameshfree/parallel.hpp"

namespace mameshfree {

/// Coefficient vector of a trial function s = Σ c_j Φ_δ(· − y_j), aligned
/// with the owning space's center order (interior first, then boundary).
struct Coefficients {
    Eigen::VectorXd c;
};

/// Span of scaled kernel translates at a fixed set of trial centers.
class TrialSpace {
  public:
    TrialSpace(PointSet centers, ScaledKernel kernel)
        : centers_(std::move(centers)), kernel_(kernel), points_(centers_.all_points()) {
        if (centers_.role != PointRole::Trial)
            throw std::invalid_argument("TrialSpace: centers must have trial role");
        if (points_.empty()) throw std::invalid_argument("TrialSpace: need at least one center");
        if (points_.size() >= 2 && !(separation(points_) > 0.0))
            throw std::invalid_argument("TrialSpace: duplicate centers");
        bins_ = BinGrid(points_, kernel_.delta);
    }

    const PointSet& centers() const { return centers_; }
    const ScaledKernel& kernel() const { return kernel_; }
    const std::vector<Eigen::Vector2d>& points() const { return points_; }
    const BinGrid& bins() const { return bins_; }
    std::size_t size() const { return points_.size(); }

  private:
    PointSet centers_;
    ScaledKernel kernel_;
    std::vector<Eigen::Vector2d> points_;
    BinGrid bins_;
};

/// A[k][j] = Φ_δ(y_k − y_j). Symmetric by construction: only j <= k is
/// evaluated, the upper triangle is mirrored. Entries at distance >= δ are
/// exactly zero (compact support).
inline Eigen::MatrixXd gram_matrix(const TrialSpace& ts) {
    const auto& pts = ts.points();
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    parallel_for(pts.size(), [&](std::size_t k) {
        thread_local std::vector<int> idx;
        ts.bins().query(pts[k], ts.kernel().delta, idx);
        for (int j : idx)
            if (j <= static_cast<int>(k))
                a(static_cast<Eigen::Index>(k), j) = scaled_eval(ts.kernel(), pts[k], pts[j]);
    });
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < k; ++j) a(j, k) = a(k, j);
    return a;
}

/// Diagnostics of an interpolate() call.
struct InterpolateInfo {
    bool jitter_applied = false;
    double jitter = 0.0;
};

/// Solve the Gram system A c = values by Cholesky. Positive definiteness is
/// guaranteed in exact arithmetic; on numerical failure a disclosed diagonal
/// jitter of 1e−12·trace(A)/N is applied once. Iterative refinement pushes
/// the residual to ~machine level.
inline Coefficients interpolate(const TrialSpace& ts, const Eigen::VectorXd& values,
                                InterpolateInfo* info = nullptr) {
    const auto n = static_cast<Eigen::Index>(ts.size());
    if (values.size() != n)
        throw std::invalid_argument("interpolate: values length must equal center count");
    Eigen::MatrixXd a = gram_matrix(ts);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    InterpolateInfo local;
    if (llt.info() != Eigen::Success) {
        local.jitter_applied = true;
        local.jitter = 1e-12 * a.trace() / static_cast<double>(n);
        a.diagonal().array() += local.jitter;
        llt.compute(a);
    }
    if (llt.info() != Eigen::Success) {
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        throw std::runtime_error("interpolate: gram factorization failed; smallest pivot " +
                                 std::to_string(ldlt.vectorD().minCoeff()));
    }
    Eigen::VectorXd c = llt.solve(values);
    const double target = 1e-12 * (1.0 + values.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < 3; ++it) {
        const Eigen::VectorXd r = values - a * c;
        if (r.lpNorm<Eigen::Infinity>() <= target) break;
        c += llt.solve(r);
    }
    if (info) *info = local;
    return Coefficients{std::move(c)};
}

/// s(x): sums only the centers within the support radius.
inline double eval(const TrialSpace& ts, const Coefficients& coeff, const Eigen::Vector2d& x) {
    thread_local std::vector<int> idx;
    ts.bins().query(x, ts.kernel().delta, idx);
    double s = 0.0;
    for (int j : idx) s += coeff.c[j] * scaled_eval(ts.kernel(), x, ts.points()[j]);
    return s;
}

/// s(x) with gradient and Hessian; linear in the coefficients.
inline Jet2 eval_jet(const TrialSpace& ts, const Coefficients& coeff, const Eigen::Vector2d& x) {
    thread_local std::vector<int> idx;
    ts.bins().query(x, ts.kernel().delta, idx);
    Jet2 out;
    for (int j : idx) {
        const KernelJet kj = scaled_jet(ts.kernel(), x, ts.points()[j]);
        const double w = coeff.c[j];
        out.value += w * kj.value;
        out.gx += w * kj.gradient.x();
        out.gy += w * kj.gradient.y();
        out.hxx += w * kj.hessian(0, 0);
        out.hxy += w * kj.hessian(0, 1);
        out.hyy += w * kj.hessian(1, 1);
    }
    return out;
}

inline void write_coefficients_csv(std::ostream& os, const Coefficients& coeff) {
    os << "index,c\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < coeff.c.size(); ++i) os << i << ',' << coeff.c[i] << '\n';
}

inline void write_coefficients_csv(const std::string& path, const Coefficients& coeff) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_coefficients_csv(os, coeff);
}

}  // namespace mameshfree
