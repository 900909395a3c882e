#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mameshfree {

/// Wendland compactly supported radial profiles on [0,1], unnormalized,
/// positive definite on R^2:
///
///   C2: (1-r)^4 (4r+1)                phi(0)=1   smoothness k_c=1   sigma=2.5
///   C4: (1-r)^6 (35r^2+18r+3)         phi(0)=3   smoothness k_c=2   sigma=3.5
///   C6: (1-r)^8 (32r^3+25r^2+8r+1)    phi(0)=1   smoothness k_c=3   sigma=4.5
///
/// sigma = k_c + d/2 + 1/2 with d = 2 is the Sobolev order of the native
/// space under the algebraic Fourier decay of the profile.
enum class KernelFamily { C2, C4, C6 };

inline const char* family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::C2: return "C2";
        case KernelFamily::C4: return "C4";
        case KernelFamily::C6: return "C6";
    }
    return "?";
}

inline KernelFamily family_from_name(const std::string& s) {
    if (s == "C2") return KernelFamily::C2;
    if (s == "C4") return KernelFamily::C4;
    if (s == "C6") return KernelFamily::C6;
    throw std::invalid_argument("unknown kernel family '" + s + "'");
}

/// Profile smoothness exponent k_c; the profile is C^{2 k_c} on [0, inf).
inline int smoothness(KernelFamily f) {
    switch (f) {
        case KernelFamily::C2: return 1;
        case KernelFamily::C4: return 2;
        case KernelFamily::C6: return 3;
    }
    return 0;
}

/// Native-space Sobolev order sigma = k_c + 3/2 for d = 2.
inline double sobolev_order(KernelFamily f) { return smoothness(f) + 1.5; }

inline double profile_at_zero(KernelFamily f) { return f == KernelFamily::C4 ? 3.0 : 1.0; }

namespace detail {

// Closed forms for phi'(r)/r and phi''(r) - phi'(r)/r. Both vanish for
// r >= 1 and have finite limits at r = 0; the quotient forms below are the
// polynomial factorizations, so no numerical division by r ever happens.
//   C2: phi'/r = -20 (1-r)^3            w = 60 r (1-r)^2
//   C4: phi'/r = -56 (1-r)^5 (5r+1)     w = 1680 r^2 (1-r)^4
//   C6: phi'/r = -22 (1-r)^7 (16r^2+7r+1)   w = 528 r^2 (1-r)^6 (6r+1)
struct ProfileParts {
    double phi;        // phi(r)
    double dphi_over_r;  // phi'(r)/r, continuous extension at r = 0
    double w;          // phi''(r) - phi'(r)/r
};

inline ProfileParts profile_parts(KernelFamily f, double r) {
    if (r >= 1.0) return {0.0, 0.0, 0.0};
    const double u = 1.0 - r;
    const double u2 = u * u;
    switch (f) {
        case KernelFamily::C2: {
            const double u3 = u2 * u;
            return {u3 * u * (4.0 * r + 1.0), -20.0 * u3, 60.0 * r * u2};
        }
        case KernelFamily::C4: {
            const double u4 = u2 * u2;
            const double u5 = u4 * u;
            return {u5 * u * (r * (35.0 * r + 18.0) + 3.0), -56.0 * u5 * (5.0 * r + 1.0),
                    1680.0 * r * r * u4};
        }
        case KernelFamily::C6: {
            const double u6 = u2 * u2 * u2;
            const double u7 = u6 * u;
            return {u7 * u * (r * (r * (32.0 * r + 25.0) + 8.0) + 1.0),
                    -22.0 * u7 * (r * (16.0 * r + 7.0) + 1.0),
                    528.0 * r * r * u6 * (6.0 * r + 1.0)};
        }
    }
    return {0.0, 0.0, 0.0};
}

}  // namespace detail

struct ProfileJet {
    double phi;
    double dphi;
    double ddphi;
};

/// Profile value and first two radial derivatives; identically zero for
/// r >= 1. Throws on negative r.
inline ProfileJet radial_profile(KernelFamily f, double r) {
    if (r < 0.0) throw std::invalid_argument("radial_profile: r must be nonnegative");
    const auto p = detail::profile_parts(f, r);
    return {p.phi, r * p.dphi_over_r, p.dphi_over_r + p.w};
}

/// The delta-scaled kernel Phi_delta(x, y) = delta^{-2} phi(|x - y| / delta),
/// support radius exactly delta.
struct ScaledKernel {
    KernelFamily family;
    double delta;

    ScaledKernel(KernelFamily f, double d) : family(f), delta(d) {
        if (!(d > 0.0) || d > 1.0)
            throw std::invalid_argument("ScaledKernel: delta must lie in (0, 1]");
    }
};

inline double scaled_eval(const ScaledKernel& k, const Eigen::Vector2d& x,
                          const Eigen::Vector2d& y) {
    const double r = (x - y).norm() / k.delta;
    if (r >= 1.0) return 0.0;
    return detail::profile_parts(k.family, r).phi / (k.delta * k.delta);
}

struct KernelJet {
    double value = 0.0;
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

/// Value, gradient and Hessian of Phi_delta with respect to x. With
/// z = (x - y)/delta and r = |z| the Hessian is
///   delta^{-4} [ (phi'/r) I + (phi'' - phi'/r) u u^T ],   u = z / r,
/// which at r = 0 degenerates to delta^{-4} phi''(0) I since the second
/// factor vanishes there for every family.
inline KernelJet scaled_jet(const ScaledKernel& k, const Eigen::Vector2d& x,
                            const Eigen::Vector2d& y) {
    KernelJet out;
    const double inv_d = 1.0 / k.delta;
    const Eigen::Vector2d z = (x - y) * inv_d;
    const double r = z.norm();
    if (r >= 1.0) return out;
    const auto p = detail::profile_parts(k.family, r);
    const double d2 = inv_d * inv_d;
    const double d3 = d2 * inv_d;
    const double d4 = d3 * inv_d;
    out.value = d2 * p.phi;
    out.gradient = (d3 * p.dphi_over_r) * z;
    const Eigen::Vector2d u = r > 0.0 ? Eigen::Vector2d(z / r) : Eigen::Vector2d::Zero();
    // Assemble coefficient-wise so the off-diagonal entries share one
    // product u_x*u_y and the matrix is symmetric to the last bit.
    const double hxx = d4 * (p.dphi_over_r + p.w * (u.x() * u.x()));
    const double hxy = d4 * (p.w * (u.x() * u.y()));
    const double hyy = d4 * (p.dphi_over_r + p.w * (u.y() * u.y()));
    out.hessian << hxx, hxy, hxy, hyy;
    return out;
}

}  // namespace mameshfree
