#pragma once

// Convex-hull membership by linear feasibility: is x a convex combination
// of the given points? Solved with a Phase-I simplex (Bland's rule), which
// returns a basic solution and so uses at most dim + 1 points.

#include <cstddef>
#include <span>
#include <vector>

namespace nearrep::hull {

struct Certificate {
    bool member = false;
    /// Indices into the point set and their convex weights (sum 1).
    std::vector<std::size_t> indices;
    std::vector<double> weights;
    /// Phase-I optimum: total residual infeasibility.
    double residual = 0.0;
};

/// Membership of x in conv(points). `tol` bounds the accepted residual.
Certificate membership(std::span<const std::vector<double>> points, const std::vector<double>& x,
                       double tol = 1e-9);

}  // namespace nearrep::hull
