#pragma once

#include "fhereg/dataset.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fhereg {

/// Deterministic train/test split parameters.
struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 113;
};

struct SplitIndices {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

/// Reads a comma-separated numeric file; the target column is removed from
/// the feature matrix. Row order is preserved. Cell/shape problems throw
/// std::runtime_error naming the offending line and column.
std::pair<Matrix, Vector> load_csv(const std::string& path, bool has_header,
                                   Eigen::Index target_column);

/// Deterministic pseudo-random permutation of 0..n-1 from the seed; the last
/// ceil(test_fraction * n) entries form the test set. Uses a self-contained
/// generator so the split never depends on the standard library's shuffle.
SplitIndices split_indices(Eigen::Index n, const SplitSpec& spec);

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

/// Mean squared error, (1/n) sum (p_i - y_i)^2.
double mse(const Vector& predictions, const Vector& targets);

enum class LinkKind { linear, sigmoid };

/// Steepness of the sigmoid link for synthetic data; keeps the link visibly
/// non-linear on [-1, 1] features at small d.
inline constexpr double kSigmoidLinkSteepness = 4.0;

struct SyntheticSpec {
    Eigen::Index n = 100;
    Eigen::Index d = 4;
    double noise_sigma = 0.0;
    LinkKind link = LinkKind::linear;
    std::uint64_t seed = 113;
};

/// Generated regression problem plus the ground-truth coefficients, so tests
/// can check recovery.
struct SyntheticData {
    Dataset ds;
    Vector coefficients;   // r, length d
};

/// x ~ U[-1,1]^(n x d), r ~ U[-1,1]^d, Gaussian noise N(0, sigma^2);
/// linear: y = r.x + noise; sigmoid: y = sigmoid(4 r.x) + noise.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace fhereg
