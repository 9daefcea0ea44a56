#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace loadclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Hard upper bound on the number of clusters any procedure may produce.
inline constexpr int kMaxClusters = 10;

// Strong wrappers for the alternative stopping targets of the reducers and
// the agglomerative clusterer.
struct OutputDims {
    int value;
};
struct CevrThreshold {
    double value;
};
struct MergeThreshold {
    double value;
};
struct ClusterCount {
    int value;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (bad header, unreadable file).
class FormatError : public Error {
public:
    using Error::Error;
};

class DuplicateKeyError : public Error {
public:
    using Error::Error;
};

/// Non-finite or out-of-domain numeric value.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Caller supplied an invalid parameter combination.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input data violates an operation precondition (too few days, too few households).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Geometry or profile that makes the requested computation undefined.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Bad configuration document or unknown framework name.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Throws ValueError when any entry of `m` is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace loadclust
