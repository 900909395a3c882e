#pragma once

#include <functional>

namespace mameshfree {

/// A scalar function of (x, y).
using ScalarField = std::function<double(double, double)>;

/// Value, gradient, and symmetric Hessian of a scalar function at a point.
struct Jet2 {
    double value = 0.0;
    double gx = 0.0, gy = 0.0;
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};

/// A function of (x, y) returning its full second-order jet.
using JetField = std::function<Jet2(double, double)>;

}  // namespace mameshfree
