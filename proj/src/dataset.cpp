#include "fhereg/dataset.hpp"

#include "fhereg/core.hpp"

#include <cmath>
#include <stdexcept>

namespace fhereg {

Matrix augment_bias(const Matrix& raw) {
    if (raw.rows() < 1 || raw.cols() < 1)
        throw std::invalid_argument("augment_bias: input matrix is empty");
    Matrix out(raw.rows(), raw.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(raw.cols()) = raw;
    return out;
}

Dataset make_dataset(const Matrix& features, const Vector& y,
                     std::pair<double, double> feature_range) {
    if (features.rows() != y.size())
        throw std::invalid_argument("make_dataset: row count does not match target length");
    Dataset ds{augment_bias(features), y, feature_range};
    validate_dataset(ds);
    return ds;
}

void validate_dataset(const Dataset& ds) {
    if (ds.x.rows() < 1 || ds.x.cols() < 2)
        throw std::invalid_argument("dataset: need n >= 1 samples and d >= 1 features");
    if (ds.x.rows() != ds.y.size())
        throw std::invalid_argument("dataset: target length does not match sample count");
    if (!ds.x.allFinite() || !ds.y.allFinite())
        throw std::invalid_argument("dataset: non-finite entry");
    if ((ds.x.col(0).array() != 1.0).any())
        throw std::invalid_argument("dataset: first column must be all ones");
    const auto [a, b] = ds.feature_range;
    const double tol = 1e-12;
    const auto feats = ds.x.rightCols(ds.x.cols() - 1).array();
    if ((feats < a - tol).any() || (feats > b + tol).any())
        throw std::invalid_argument("dataset: feature outside declared feature_range");
}

FeatureScaler FeatureScaler::identity(Eigen::Index d) {
    FeatureScaler fs;
    fs.col_min = Vector::Zero(d);
    fs.col_max = Vector::Ones(d);
    fs.lo = 0.0;
    fs.hi = 1.0;
    return fs;
}

double FeatureScaler::transform_one(double v, Eigen::Index j) const {
    const double mn = col_min[j];
    const double mx = col_max[j];
    if (mx == mn) return 0.5 * (lo + hi);
    return lo + (v - mn) / (mx - mn) * (hi - lo);
}

Vector FeatureScaler::transform(const Vector& row) const {
    if (row.size() != col_min.size())
        throw std::invalid_argument("feature scaler: row has wrong feature count");
    Vector out(row.size());
    for (Eigen::Index j = 0; j < row.size(); ++j) out[j] = transform_one(row[j], j);
    return out;
}

Matrix FeatureScaler::transform(const Matrix& rows) const {
    if (rows.cols() != col_min.size())
        throw std::invalid_argument("feature scaler: matrix has wrong feature count");
    Matrix out(rows.rows(), rows.cols());
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            out(i, j) = transform_one(rows(i, j), j);
    return out;
}

std::pair<Matrix, FeatureScaler> minmax_scale_features(const Matrix& raw,
                                                       double lo, double hi) {
    if (hi <= lo)
        throw std::invalid_argument("minmax_scale_features: need hi > lo");
    if (raw.rows() < 1 || raw.cols() < 1)
        throw std::invalid_argument("minmax_scale_features: empty matrix");
    FeatureScaler fs;
    fs.lo = lo;
    fs.hi = hi;
    fs.col_min = raw.colwise().minCoeff();
    fs.col_max = raw.colwise().maxCoeff();
    return {fs.transform(raw), fs};
}

TargetScaler fit_target_scaler(const Vector& y, std::optional<double> gamma,
                               double epsilon) {
    if (y.size() < 1)
        throw std::invalid_argument("fit_target_scaler: empty target vector");
    if (epsilon <= 0.0)
        throw std::invalid_argument("fit_target_scaler: epsilon must be positive");
    if (gamma && (*gamma <= 0.0 || *gamma >= 1.0))
        throw std::invalid_argument("fit_target_scaler: gamma must lie in (0, 1)");
    TargetScaler s;
    s.y_min = y.minCoeff();
    s.y_max = y.maxCoeff();
    s.epsilon = epsilon;
    s.gamma = gamma;
    return s;
}

double scale_target_unit(const TargetScaler& s, double y) {
    return (y - s.y_min) / s.range_eps();
}

double unscale_target_unit(const TargetScaler& s, double prob) {
    return s.range_eps() * prob + s.y_min;
}

double logit_scale_target(const TargetScaler& s, double y) {
    if (!s.gamma)
        throw std::logic_error("logit_scale_target: scaler was fitted without gamma");
    const double g = *s.gamma;
    return logit(scale_target_unit(s, y) * g + 0.5 - g / 2.0);
}

double logit_unscale_target(const TargetScaler& s, double prob) {
    if (!s.gamma)
        throw std::logic_error("logit_unscale_target: scaler was fitted without gamma");
    const double g = *s.gamma;
    return s.range_eps() * (prob - 0.5 + g / 2.0) / g + s.y_min;
}

Vector scale_target_unit(const TargetScaler& s, const Vector& y) {
    return (y.array() - s.y_min) / s.range_eps();
}

Vector logit_scale_target(const TargetScaler& s, const Vector& y) {
    Vector out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = logit_scale_target(s, y[i]);
    return out;
}

}  // namespace fhereg
