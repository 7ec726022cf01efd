#include "nearrep/hull.hpp"

#include "nearrep/errors.hpp"

#include <cmath>
#include <numeric>

namespace nearrep::hull {

namespace {
constexpr double kPivotEps = 1e-11;
}

Certificate membership(std::span<const std::vector<double>> points, const std::vector<double>& x,
                       double tol) {
    const std::size_t dim = x.size();
    const std::size_t k = points.size();
    const std::size_t m = dim + 1;
    Certificate cert;
    if (k == 0) {
        cert.residual = 1.0;
        return cert;
    }
    for (const auto& p : points)
        if (p.size() != dim) throw InvalidInput("hull: point dimension mismatch");

    // Tableau rows: [original columns | artificial columns | rhs]. The last
    // row holds the reduced costs of the Phase-I objective (sum of artificials).
    const std::size_t cols = k + m + 1;
    const std::size_t rhs = k + m;
    std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double b = i < dim ? x[i] : 1.0;
        const double sign = b < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < k; ++j) t[i][j] = sign * (i < dim ? points[j][i] : 1.0);
        t[i][k + i] = 1.0;
        t[i][rhs] = sign * b;
        basis[i] = k + i;
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < m; ++i) t[m][j] += t[i][j];
    for (std::size_t i = 0; i < m; ++i) t[m][rhs] += t[i][rhs];

    const std::size_t max_pivots = 50 * (k + m);
    for (std::size_t iter = 0; iter < max_pivots; ++iter) {
        // Bland: lowest-index improving column.
        std::size_t enter = cols;
        for (std::size_t j = 0; j < k + m; ++j)
            if (t[m][j] > kPivotEps) {
                enter = j;
                break;
            }
        if (enter == cols) break;

        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= kPivotEps) continue;
            const double ratio = t[i][rhs] / t[i][enter];
            if (leave == m || ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave == m) break;  // unbounded direction; cannot happen for Phase I

        const double piv = t[leave][enter];
        for (double& v : t[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }

    cert.residual = std::max(0.0, t[m][rhs]);
    cert.member = cert.residual <= tol;
    if (!cert.member) return cert;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < k && t[i][rhs] > 0.0) {
            cert.indices.push_back(basis[i]);
            cert.weights.push_back(t[i][rhs]);
        }
    }
    const double total = std::accumulate(cert.weights.begin(), cert.weights.end(), 0.0);
    if (total > 0.0)
        for (double& w : cert.weights) w /= total;
    return cert;
}

}  // namespace nearrep::hull
