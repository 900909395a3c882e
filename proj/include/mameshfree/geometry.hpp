#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mameshfree/bins.hpp"
#include "mameshfree/parallel.hpp"

namespace mameshfree {

/// Convex planar domains with a periodic arclength boundary chart.
/// The boundary is parametrized by normalized arclength t in [0, 1); all
/// domains here have diameter <= 2 so fill distances stay below 1.
class Domain {
  public:
    enum class Shape { UnitDisk, Ellipse, UnitSquare };

    static Domain unit_disk() { return Domain(Shape::UnitDisk, 1.0, 1.0); }
    static Domain unit_square() { return Domain(Shape::UnitSquare, 1.0, 1.0); }

    /// Axis-aligned ellipse with semi-axes a, b in (0, 1].
    static Domain ellipse(double a, double b) {
        if (!(a > 0.0 && b > 0.0 && a <= 1.0 && b <= 1.0))
            throw std::invalid_argument("Domain::ellipse: semi-axes must lie in (0, 1]");
        return Domain(Shape::Ellipse, a, b);
    }

    Shape shape() const { return shape_; }
    double semi_a() const { return a_; }
    double semi_b() const { return b_; }
    int chart_count() const { return 1; }

    std::string name() const {
        switch (shape_) {
            case Shape::UnitDisk: return "unit_disk";
            case Shape::UnitSquare: return "unit_square";
            default: return "ellipse(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
        }
    }

    /// Strict interior membership. The curved shapes shave a hair off the
    /// radius so points produced by boundary_param (exact up to roundoff
    /// in cos/sin) are never classified as interior; the square's edges
    /// are exact in floating point and need no slack.
    bool inside(const Eigen::Vector2d& p) const {
        constexpr double slack = 1e-14;
        switch (shape_) {
            case Shape::UnitDisk: return p.squaredNorm() < 1.0 - slack;
            case Shape::UnitSquare:
                return p.x() > 0.0 && p.x() < 1.0 && p.y() > 0.0 && p.y() < 1.0;
            default: {
                const double u = p.x() / a_, v = p.y() / b_;
                return u * u + v * v < 1.0 - slack;
            }
        }
    }

    double area() const {
        switch (shape_) {
            case Shape::UnitDisk: return std::numbers::pi;
            case Shape::UnitSquare: return 1.0;
            default: return std::numbers::pi * a_ * b_;
        }
    }

    double perimeter() const {
        switch (shape_) {
            case Shape::UnitDisk: return 2.0 * std::numbers::pi;
            case Shape::UnitSquare: return 4.0;
            default: return arclen_.back();
        }
    }

    double diameter() const {
        switch (shape_) {
            case Shape::UnitDisk: return 2.0;
            case Shape::UnitSquare: return std::numbers::sqrt2;
            default: return 2.0 * std::max(a_, b_);
        }
    }

    void bbox(Eigen::Vector2d& lo, Eigen::Vector2d& hi) const {
        switch (shape_) {
            case Shape::UnitDisk:
                lo = {-1.0, -1.0};
                hi = {1.0, 1.0};
                break;
            case Shape::UnitSquare:
                lo = {0.0, 0.0};
                hi = {1.0, 1.0};
                break;
            default:
                lo = {-a_, -b_};
                hi = {a_, b_};
                break;
        }
    }

    /// Boundary point at normalized arclength t (periodic).
    Eigen::Vector2d boundary_param(double t) const {
        t -= std::floor(t);
        switch (shape_) {
            case Shape::UnitDisk: {
                const double th = 2.0 * std::numbers::pi * t;
                return {std::cos(th), std::sin(th)};
            }
            case Shape::UnitSquare: {
                const double s = 4.0 * t;
                if (s < 1.0) return {s, 0.0};
                if (s < 2.0) return {1.0, s - 1.0};
                if (s < 3.0) return {3.0 - s, 1.0};
                return {0.0, 4.0 - s};
            }
            default: {
                const double th = angle_at_arclength(t * arclen_.back());
                return {a_ * std::cos(th), b_ * std::sin(th)};
            }
        }
    }

    /// Normalized arclength of a point on the boundary; inverse of
    /// boundary_param up to the chart's periodic wrap.
    double boundary_param_of(const Eigen::Vector2d& p) const {
        switch (shape_) {
            case Shape::UnitDisk: {
                double t = std::atan2(p.y(), p.x()) / (2.0 * std::numbers::pi);
                return t - std::floor(t);
            }
            case Shape::UnitSquare: {
                const double x = p.x(), y = p.y();
                struct Side {
                    double dist, t;
                };
                const Side sides[4] = {
                    {std::abs(y), x / 4.0},
                    {std::abs(x - 1.0), (1.0 + y) / 4.0},
                    {std::abs(y - 1.0), (3.0 - x) / 4.0},
                    {std::abs(x), (4.0 - y) / 4.0},
                };
                int best = 0;
                for (int k = 1; k < 4; ++k)
                    if (sides[k].dist < sides[best].dist) best = k;
                double t = sides[best].t;
                return t - std::floor(t);
            }
            default: {
                double th = std::atan2(p.y() * a_, p.x() * b_);
                if (th < 0.0) th += 2.0 * std::numbers::pi;
                return arclength_at_angle(th) / arclen_.back();
            }
        }
    }

    /// Distance from p to the boundary curve (positive inside).
    double boundary_clearance(const Eigen::Vector2d& p) const {
        switch (shape_) {
            case Shape::UnitDisk: return 1.0 - p.norm();
            case Shape::UnitSquare:
                return std::min(std::min(p.x(), 1.0 - p.x()), std::min(p.y(), 1.0 - p.y()));
            default: {
                const double d = (p - nearest_boundary_point(p)).norm();
                const double u = p.x() / a_, v = p.y() / b_;
                return u * u + v * v < 1.0 ? d : -d;
            }
        }
    }

    /// Closest point on the ellipse boundary (valid for all shapes, but only
    /// needed where no closed form exists).
    Eigen::Vector2d nearest_boundary_point(const Eigen::Vector2d& p) const {
        if (shape_ == Shape::UnitDisk) {
            const double n = p.norm();
            return n > 0.0 ? Eigen::Vector2d(p / n) : Eigen::Vector2d(1.0, 0.0);
        }
        if (shape_ == Shape::UnitSquare) {
            const double x = std::clamp(p.x(), 0.0, 1.0), y = std::clamp(p.y(), 0.0, 1.0);
            const double gaps[4] = {y, 1.0 - x, 1.0 - y, x};
            int best = 0;
            for (int k = 1; k < 4; ++k)
                if (gaps[k] < gaps[best]) best = k;
            switch (best) {
                case 0: return {x, 0.0};
                case 1: return {1.0, y};
                case 2: return {x, 1.0};
                default: return {0.0, y};
            }
        }
        // Ellipse: coarse scan, then Newton on d/dθ |p - γ(θ)|² = 0.
        double best_th = 0.0, best_d2 = std::numeric_limits<double>::max();
        for (int k = 0; k < 128; ++k) {
            const double th = 2.0 * std::numbers::pi * k / 128.0;
            const double d2 = (p - Eigen::Vector2d(a_ * std::cos(th), b_ * std::sin(th))).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best_th = th;
            }
        }
        double th = best_th;
        for (int it = 0; it < 12; ++it) {
            const double c = std::cos(th), s = std::sin(th);
            const double f = (a_ * a_ - b_ * b_) * s * c - p.x() * a_ * s + p.y() * b_ * c;
            const double fp = (a_ * a_ - b_ * b_) * (c * c - s * s) - p.x() * a_ * c - p.y() * b_ * s;
            if (std::abs(fp) < 1e-30) break;
            const double step = f / fp;
            th -= step;
            if (std::abs(step) < 1e-15) break;
        }
        return {a_ * std::cos(th), b_ * std::sin(th)};
    }

  private:
    Domain(Shape s, double a, double b) : shape_(s), a_(a), b_(b) {
        if (shape_ == Shape::Ellipse) build_arclength_table();
    }

    // Cumulative arclength s(θ) on θ_k = 2πk/n via composite Simpson.
    void build_arclength_table() {
        const int n = 4096;
        arclen_.assign(n + 1, 0.0);
        const double dth = 2.0 * std::numbers::pi / n;
        auto speed = [&](double th) {
            const double c = std::cos(th), s = std::sin(th);
            return std::hypot(a_ * s, b_ * c);
        };
        for (int k = 0; k < n; ++k) {
            const double t0 = k * dth;
            arclen_[k + 1] = arclen_[k] +
                             dth / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * dth) + speed(t0 + dth));
        }
    }

    double angle_at_arclength(double s) const {
        const int n = static_cast<int>(arclen_.size()) - 1;
        s = std::clamp(s, 0.0, arclen_.back());
        const auto it = std::upper_bound(arclen_.begin(), arclen_.end(), s);
        int k = std::clamp(static_cast<int>(it - arclen_.begin()) - 1, 0, n - 1);
        const double seg = arclen_[k + 1] - arclen_[k];
        const double frac = seg > 0.0 ? (s - arclen_[k]) / seg : 0.0;
        return (k + frac) * 2.0 * std::numbers::pi / n;
    }

    double arclength_at_angle(double th) const {
        const int n = static_cast<int>(arclen_.size()) - 1;
        const double pos = th / (2.0 * std::numbers::pi) * n;
        const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 1);
        return arclen_[k] + (pos - k) * (arclen_[k + 1] - arclen_[k]);
    }

    Shape shape_;
    double a_, b_;
    std::vector<double> arclen_;
};

enum class PointRole { Trial, Test };

inline const char* role_name(PointRole r) { return r == PointRole::Trial ? "trial" : "test"; }

/// Interior and boundary samples of a domain, in a fixed order: coefficient
/// vectors and collocation rows index interior points first, then boundary.
struct PointSet {
    PointRole role = PointRole::Trial;
    std::vector<Eigen::Vector2d> interior;
    std::vector<Eigen::Vector2d> boundary;

    std::size_t n_interior() const { return interior.size(); }
    std::size_t n_boundary() const { return boundary.size(); }
    std::size_t size() const { return interior.size() + boundary.size(); }

    std::vector<Eigen::Vector2d> all_points() const {
        std::vector<Eigen::Vector2d> out = interior;
        out.insert(out.end(), boundary.begin(), boundary.end());
        return out;
    }
};

/// Fill/separation summary of a point set. For trial sets read h_*/q_*; for
/// test sets the same numbers are conventionally called s_I, s_B, s_X.
struct MeshMetrics {
    PointRole role = PointRole::Trial;
    double h_I = 0.0, h_B = 0.0;
    double q_I = 0.0, q_B = 0.0;
    double h_Y = 0.0, q_Y = 0.0;

    double s_I() const { return h_I; }
    double s_B() const { return h_B; }
    double s_X() const { return h_Y; }
};

/// Half the minimum pairwise distance.
inline double separation(const std::vector<Eigen::Vector2d>& pts) {
    const std::size_t n = pts.size();
    if (n < 2) throw std::invalid_argument("separation: need at least 2 points");
    std::vector<double> best(n, std::numeric_limits<double>::max());
    parallel_for(n - 1, [&](std::size_t i) {
        double b = std::numeric_limits<double>::max();
        for (std::size_t j = i + 1; j < n; ++j) b = std::min(b, (pts[i] - pts[j]).squaredNorm());
        best[i] = b;
    });
    double m = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i + 1 < n; ++i) m = std::min(m, best[i]);
    return 0.5 * std::sqrt(m);
}

/// sup over the domain of the distance to the nearest interior point,
/// estimated on a probe_resolution² grid of bbox cell centers.
inline double fill_distance_interior(const Domain& domain, const PointSet& pts, int probe_resolution) {
    if (pts.interior.empty())
        throw std::invalid_argument("fill_distance_interior: empty interior set");
    if (probe_resolution < 1)
        throw std::invalid_argument("fill_distance_interior: probe_resolution must be positive");
    Eigen::Vector2d lo, hi;
    domain.bbox(lo, hi);
    const double cell = domain.diameter() /
                        std::max(4.0, std::sqrt(static_cast<double>(pts.interior.size())));
    const BinGrid grid(pts.interior, cell);
    const int res = probe_resolution;
    const double wx = (hi.x() - lo.x()) / res, wy = (hi.y() - lo.y()) / res;
    std::vector<double> row_max(res, 0.0);
    parallel_for(res, [&](std::size_t iy) {
        double m = 0.0;
        const double y = lo.y() + (iy + 0.5) * wy;
        for (int ix = 0; ix < res; ++ix) {
            const Eigen::Vector2d p(lo.x() + (ix + 0.5) * wx, y);
            if (!domain.inside(p)) continue;
            m = std::max(m, grid.nearest_distance(p));
        }
        row_max[iy] = m;
    });
    double h = 0.0;
    for (double m : row_max) h = std::max(h, m);
    return h;
}

/// Consecutive gaps (in arclength units) between boundary points on the
/// periodic chart; a single point yields one full-perimeter gap.
inline std::vector<double> boundary_arc_gaps(const Domain& domain,
                                             const std::vector<Eigen::Vector2d>& boundary_pts) {
    if (boundary_pts.empty()) throw std::invalid_argument("boundary_arc_gaps: empty boundary set");
    std::vector<double> ts;
    ts.reserve(boundary_pts.size());
    for (const auto& p : boundary_pts) ts.push_back(domain.boundary_param_of(p));
    std::sort(ts.begin(), ts.end());
    const double P = domain.perimeter();
    std::vector<double> gaps;
    gaps.reserve(ts.size());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) gaps.push_back((ts[i + 1] - ts[i]) * P);
    gaps.push_back((ts.front() + 1.0 - ts.back()) * P);
    return gaps;
}

/// Half the largest arclength gap: the fill distance of the boundary chart.
inline double boundary_fill_distance(const Domain& domain,
                                     const std::vector<Eigen::Vector2d>& boundary_pts) {
    const auto gaps = boundary_arc_gaps(domain, boundary_pts);
    return 0.5 * *std::max_element(gaps.begin(), gaps.end());
}

/// All six fill/separation scalars of a point set.
inline MeshMetrics metrics(const Domain& domain, const PointSet& pts, int probe_resolution) {
    MeshMetrics m;
    m.role = pts.role;
    m.h_I = fill_distance_interior(domain, pts, probe_resolution);
    const auto gaps = boundary_arc_gaps(domain, pts.boundary);
    m.h_B = 0.5 * *std::max_element(gaps.begin(), gaps.end());
    m.q_B = 0.5 * *std::min_element(gaps.begin(), gaps.end());
    m.q_I = pts.interior.size() >= 2 ? separation(pts.interior)
                                     : std::numeric_limits<double>::infinity();
    m.h_Y = std::max(m.h_I, m.h_B);
    m.q_Y = std::min(m.q_I, m.q_B);
    return m;
}

/// Quasi-uniform interior/boundary samples with spacing ~ target_h:
/// a jittered grid of pitch target_h kept at clearance >= target_h/4 from
/// the boundary, plus ceil(perimeter/target_h) equispaced boundary points.
/// The seed perturbs the grid phase only (trial and test roles draw from
/// distinct streams so the two sets never collide).
inline PointSet generate_points(const Domain& domain, double target_h, PointRole role, long seed) {
    if (!(target_h > 0.0)) throw std::invalid_argument("generate_points: target_h must be positive");
    if (target_h >= domain.diameter()) throw std::runtime_error("degenerate discretization");

    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 2ull +
                        (role == PointRole::Test ? 1ull : 0ull));
    auto sym_unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0; };
    const double jx = sym_unit() * target_h / 8.0;
    const double jy = sym_unit() * target_h / 8.0;

    Eigen::Vector2d lo, hi;
    domain.bbox(lo, hi);
    const double clear = target_h / 4.0;
    // Lattice of pitch target_h centered in the clearance strip, phase
    // jittered but clamped so the end points stay inside the strip.
    auto axis_coords = [&](double a, double b, double j) {
        std::vector<double> xs;
        const double a2 = a + clear, b2 = b - clear;
        if (b2 < a2) return xs;
        const double w = b2 - a2;
        const int k = static_cast<int>(std::floor(w / target_h)) + 1;
        const double margin = 0.5 * (w - (k - 1) * target_h);
        const double start = a2 + margin + std::clamp(j, -margin, margin);
        xs.reserve(k);
        for (int i = 0; i < k; ++i) xs.push_back(start + i * target_h);
        return xs;
    };
    const std::vector<double> xs = axis_coords(lo.x(), hi.x(), jx);
    const std::vector<double> ys = axis_coords(lo.y(), hi.y(), jy);

    PointSet ps;
    ps.role = role;
    for (double y : ys) {
        for (double x : xs) {
            const Eigen::Vector2d p(x, y);
            if (domain.inside(p) && domain.boundary_clearance(p) >= clear * (1.0 - 1e-9))
                ps.interior.push_back(p);
        }
    }
    if (ps.interior.empty()) throw std::runtime_error("degenerate discretization");

    const int n_b = static_cast<int>(std::ceil(domain.perimeter() / target_h));
    ps.boundary.reserve(n_b);
    for (int i = 0; i < n_b; ++i)
        ps.boundary.push_back(domain.boundary_param(static_cast<double>(i) / n_b));

    const int res = std::clamp(static_cast<int>(8.0 * domain.diameter() / target_h), 128, 512);
    const MeshMetrics mm = metrics(domain, ps, res);
    if (!(mm.h_Y <= 4.0 * mm.q_Y * (1.0 + 1e-9)))
        throw std::logic_error("generate_points: quasi-uniformity h_Y <= 4 q_Y violated");
    return ps;
}

inline void write_points_csv(std::ostream& os, const PointSet& pts) {
    os << "role,x,y,on_boundary\n";
    os.precision(17);
    for (const auto& p : pts.interior)
        os << role_name(pts.role) << ',' << p.x() << ',' << p.y() << ",0\n";
    for (const auto& p : pts.boundary)
        os << role_name(pts.role) << ',' << p.x() << ',' << p.y() << ",1\n";
}

inline void write_points_csv(const std::string& path, const PointSet& pts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_points_csv(os, pts);
}

}  // namespace mameshfree
