#pragma once

#include "loadclust/types.hpp"

namespace loadclust {

struct SymmetricEigen {
    /// Eigenvalues sorted ascending.
    Vector values;
    /// Column i is the unit eigenvector for values[i].
    Matrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotations are applied until every off-diagonal magnitude is below
/// `off_tol`. Only the upper triangle of `a` is read. Equal eigenvalues keep
/// the order in which Jacobi leaves them on the diagonal, so the output is
/// deterministic for a given input.
SymmetricEigen jacobi_eigen(const Matrix& a, double off_tol = 1e-12, int max_sweeps = 100);

/// Sample covariance (divisor n - 1) of the rows of `x`.
Matrix sample_covariance(const Matrix& x, const Vector& mean);

/// Symmetric matrix of Euclidean distances between rows.
Matrix pairwise_distances(const Matrix& x);

}  // namespace loadclust
