#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace mameshfree {

/// Uniform spatial bins over a point cloud. Queries return candidate indices
/// in ascending order so downstream summations have a fixed order.
class BinGrid {
  public:
    BinGrid() = default;

    BinGrid(std::vector<Eigen::Vector2d> points, double cell)
        : pts_(std::move(points)), cell_(cell) {
        const std::vector<Eigen::Vector2d>& pts = pts_;
        Eigen::Vector2d lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
        Eigen::Vector2d hi = -lo;
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        if (pts.empty()) lo = hi = Eigen::Vector2d::Zero();
        origin_ = lo;
        nx_ = std::max(1, static_cast<int>(std::floor((hi.x() - lo.x()) / cell_)) + 1);
        ny_ = std::max(1, static_cast<int>(std::floor((hi.y() - lo.y()) / cell_)) + 1);
        std::vector<int> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        std::vector<int> cell_of(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cell_of[i] = cell_index(pts[i]);
            ++count[cell_of[i] + 1];
        }
        for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
        offsets_ = count;
        order_.resize(pts.size());
        std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i) order_[cursor[cell_of[i]]++] = static_cast<int>(i);
    }

    /// Indices of points with |p_i - q| < radius, ascending.
    void query(const Eigen::Vector2d& q, double radius, std::vector<int>& out) const {
        out.clear();
        if (pts_.empty()) return;
        const double r2 = radius * radius;
        const int cx = coord_x(q.x());
        const int cy = coord_y(q.y());
        const int reach = static_cast<int>(std::ceil(radius / cell_));
        for (int gy = std::max(0, cy - reach); gy <= std::min(ny_ - 1, cy + reach); ++gy) {
            for (int gx = std::max(0, cx - reach); gx <= std::min(nx_ - 1, cx + reach); ++gx) {
                const int c = gy * nx_ + gx;
                for (int k = offsets_[c]; k < offsets_[c + 1]; ++k) {
                    const int i = order_[k];
                    if ((pts_[i] - q).squaredNorm() < r2) out.push_back(i);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }

    /// Exact distance from q to the nearest point (expanding ring search).
    double nearest_distance(const Eigen::Vector2d& q) const {
        double radius = cell_;
        while (true) {
            double best2 = std::numeric_limits<double>::max();
            const int cx = coord_x(q.x());
            const int cy = coord_y(q.y());
            const int reach = static_cast<int>(std::ceil(radius / cell_));
            for (int gy = std::max(0, cy - reach); gy <= std::min(ny_ - 1, cy + reach); ++gy) {
                for (int gx = std::max(0, cx - reach); gx <= std::min(nx_ - 1, cx + reach); ++gx) {
                    const int c = gy * nx_ + gx;
                    for (int k = offsets_[c]; k < offsets_[c + 1]; ++k) {
                        best2 = std::min(best2, (pts_[order_[k]] - q).squaredNorm());
                    }
                }
            }
            if (best2 <= radius * radius) return std::sqrt(best2);
            // Nothing certain inside the ring yet; a candidate outside the
            // ring may still be beaten by an unseen cell, so widen.
            const bool covered = reach >= std::max(nx_, ny_);
            if (covered) {
                return best2 == std::numeric_limits<double>::max()
                           ? std::numeric_limits<double>::infinity()
                           : std::sqrt(best2);
            }
            radius *= 2.0;
        }
    }

  private:
    int coord_x(double x) const {
        return std::clamp(static_cast<int>(std::floor((x - origin_.x()) / cell_)), 0, nx_ - 1);
    }
    int coord_y(double y) const {
        return std::clamp(static_cast<int>(std::floor((y - origin_.y()) / cell_)), 0, ny_ - 1);
    }
    int cell_index(const Eigen::Vector2d& p) const { return coord_y(p.y()) * nx_ + coord_x(p.x()); }

    std::vector<Eigen::Vector2d> pts_;
    double cell_ = 1.0;
    Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
    int nx_ = 1, ny_ = 1;
    std::vector<int> offsets_;
    std::vector<int> order_;
};

}  // namespace mameshfree
