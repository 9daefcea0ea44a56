#include "loadclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace loadclust {

SymmetricEigen jacobi_eigen(const Matrix& input, double off_tol, int max_sweeps)
{
    if (input.rows() != input.cols()) {
        throw ArgumentError("jacobi_eigen needs a square matrix");
    }
    require_finite(input, "jacobi_eigen input");
    const Eigen::Index n = input.rows();
    Matrix a = input.triangularView<Eigen::Upper>();
    a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
    Matrix v = Matrix::Identity(n, n);

    // Rounding noise on large matrices can sit above an absolute 1e-12.
    const double tol = std::max(off_tol, 8.0 * std::numeric_limits<double>::epsilon() * a.norm());

    auto max_off = [&] {
        double m = 0.0;
        for (Eigen::Index q = 1; q < n; ++q) {
            for (Eigen::Index p = 0; p < q; ++p) {
                m = std::max(m, std::abs(a(p, q)));
            }
        }
        return m;
    };

    int sweep = 0;
    for (; sweep < max_sweeps && max_off() >= tol; ++sweep) {
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < tol * 1e-3) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r == p || r == q) {
                        continue;
                    }
                    const double g = a(r, p);
                    const double h = a(r, q);
                    a(r, p) = g - s * (h + g * tau);
                    a(r, q) = h + s * (g - h * tau);
                    a(p, r) = a(r, p);
                    a(q, r) = a(r, q);
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double g = v(r, p);
                    const double h = v(r, q);
                    v(r, p) = g - s * (h + g * tau);
                    v(r, q) = h + s * (g - h * tau);
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    out.sweeps = sweep;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

Matrix sample_covariance(const Matrix& x, const Vector& mean)
{
    if (x.rows() < 2) {
        throw ArgumentError("covariance needs at least 2 rows");
    }
    const Matrix centered = x.rowwise() - mean.transpose();
    return (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
}

Matrix pairwise_distances(const Matrix& x)
{
    const Eigen::Index n = x.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace loadclust
