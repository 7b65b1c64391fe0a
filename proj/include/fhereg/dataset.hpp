#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

namespace fhereg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultEpsilon = 1e-8;

/// Bias-augmented design matrix plus raw targets. Column 0 of x is all ones;
/// feature_range records the interval features were scaled into (metadata,
/// columns 1..d are expected to lie inside it).
struct Dataset {
    Matrix x;                                       // n x (1+d)
    Vector y;                                       // length n
    std::pair<double, double> feature_range{-1.0, 1.0};

    Eigen::Index n_samples() const { return x.rows(); }
    Eigen::Index n_features() const { return x.cols() - 1; }
};

/// Prepends a ones column: out = [1 | raw]. Throws std::invalid_argument on
/// an empty input.
Matrix augment_bias(const Matrix& raw);

/// Builds a Dataset from scaled features (without bias column) and targets,
/// checking the invariants.
Dataset make_dataset(const Matrix& features, const Vector& y,
                     std::pair<double, double> feature_range);

/// Throws std::invalid_argument if ds violates the Dataset invariants.
void validate_dataset(const Dataset& ds);

/// Per-column affine min-max map fitted on training features. Constant
/// columns map to the midpoint of [lo, hi]; the same map is reapplied to
/// unseen rows verbatim.
struct FeatureScaler {
    Vector col_min;
    Vector col_max;
    double lo = 0.0;
    double hi = 1.0;

    static FeatureScaler identity(Eigen::Index d);

    Eigen::Index n_features() const { return col_min.size(); }
    double transform_one(double v, Eigen::Index j) const;
    Vector transform(const Vector& row) const;
    Matrix transform(const Matrix& rows) const;
};

/// Fits and applies a min-max scaler mapping each column of raw into [lo, hi].
std::pair<Matrix, FeatureScaler> minmax_scale_features(const Matrix& raw,
                                                       double lo, double hi);

/// Target normalization state; owns every forward/inverse target transform.
/// gamma, when present, selects the windowed logit transform used by the
/// improved LFFR trainer.
struct TargetScaler {
    double y_min = 0.0;
    double y_max = 1.0;
    double epsilon = kDefaultEpsilon;
    std::optional<double> gamma;

    double range_eps() const { return y_max - y_min + epsilon; }
};

TargetScaler fit_target_scaler(const Vector& y,
                               std::optional<double> gamma = std::nullopt,
                               double epsilon = kDefaultEpsilon);

/// ybar = (y - y_min) / (y_max - y_min + eps); lands in [0, 1) on the fitted range.
double scale_target_unit(const TargetScaler& s, double y);

/// Inverse of scale_target_unit: y = (y_max - y_min + eps) * prob + y_min.
double unscale_target_unit(const TargetScaler& s, double prob);

/// ybar = logit(unit(y) * gamma + 0.5 - gamma/2). Requires gamma; the
/// windowed pre-logit value stays inside (0, 1) for y in the fitted range.
double logit_scale_target(const TargetScaler& s, double y);

/// Inverse of the windowed map:
/// y = (y_max - y_min + eps) * (prob - 0.5 + gamma/2) / gamma + y_min.
/// prob outside the window extrapolates past [y_min, y_max] by design.
double logit_unscale_target(const TargetScaler& s, double prob);

Vector scale_target_unit(const TargetScaler& s, const Vector& y);
Vector logit_scale_target(const TargetScaler& s, const Vector& y);

}  // namespace fhereg
