// Shared fixtures for the unit and acceptance tests.
#pragma once

#include "loadclust/clusterers.hpp"
#include "loadclust/rng.hpp"
#include "loadclust/types.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace testing {

using loadclust::Matrix;
using loadclust::Vector;

// Same generator as tests/oracles/lcg.py.
inline Matrix lcg_matrix(int rows, int cols, std::uint64_t seed)
{
    Matrix out(rows, cols);
    std::uint64_t v = seed;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            v = (1103515245ULL * v + 12345ULL) % (1ULL << 31);
            out(r, c) = static_cast<double>(v) / static_cast<double>(1ULL << 31);
        }
    }
    return out;
}

inline Matrix column(std::initializer_list<double> values)
{
    Matrix m(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (double v : values) {
        m(i++, 0) = v;
    }
    return m;
}

struct Blobs {
    Matrix x;
    std::vector<int> truth;
};

/// `per` points around each center with isotropic normal noise of `sd`.
inline Blobs blobs(const Matrix& centers, int per, double sd, std::uint64_t seed)
{
    loadclust::Rng rng(seed);
    Blobs b;
    b.x.resize(centers.rows() * per, centers.cols());
    Eigen::Index row = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        for (int i = 0; i < per; ++i, ++row) {
            for (Eigen::Index d = 0; d < centers.cols(); ++d) {
                b.x(row, d) = centers(c, d) + sd * rng.normal();
            }
            b.truth.push_back(static_cast<int>(c));
        }
    }
    return b;
}

inline Matrix square_centers(double spacing)
{
    Matrix c(4, 2);
    c << 0, 0, spacing, 0, 0, spacing, spacing, spacing;
    return c;
}

inline Matrix triangle_centers(double spacing)
{
    Matrix c(3, 2);
    c << 0, 0, spacing, 0, spacing / 2, spacing * 0.866;
    return c;
}

/// True when the two labelings induce the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    std::map<int, int> ab;
    std::map<int, int> ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [it1, new1] = ab.emplace(a[i], b[i]);
        auto [it2, new2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i]) {
            return false;
        }
    }
    return true;
}

/// Best agreement over all label permutations (k <= 8).
inline double best_permutation_accuracy(const std::vector<int>& labels, const std::vector<int>& truth, int k)
{
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] >= 0 && labels[i] < k && perm[static_cast<std::size_t>(labels[i])] == truth[i]) {
                ++hits;
            }
        }
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(labels.size());
}

/// Uniformly random orthonormal matrix (QR of a Gaussian matrix, sign-fixed).
inline Matrix random_rotation(int d, loadclust::Rng& rng)
{
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        if (r(j, j) < 0) {
            q.col(j) *= -1.0;
        }
    }
    return q;
}

}  // namespace testing
