#include "fhereg/core.hpp"

#include <cmath>
#include <stdexcept>

namespace fhereg {

namespace {

void check_dims(const Dataset& ds, const Vector& w) {
    if (ds.x.cols() != w.size())
        throw std::invalid_argument("weight length does not match design matrix columns");
    if (ds.x.rows() != ds.y.size())
        throw std::invalid_argument("target length does not match sample count");
}

// sum_j sum_i |x_ij x_ik| for every k, i.e. row sums of |X|^T |X|.
Vector abs_cross_sums(const Matrix& x) {
    const Matrix ax = x.cwiseAbs();
    const Vector row_sums = ax.rowwise().sum();
    return ax.transpose() * row_sums;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("logit: argument must lie strictly inside (0, 1)");
    return std::log(p) - std::log1p(-p);
}

double poly_sigmoid3(double z) {
    return 0.5 + kPolySigmoidC1 * z - kPolySigmoidC3 * z * z * z;
}

double lffr_hessian_weight(double s, double y) {
    return (4.0 * s - 6.0 * s * s - 2.0 * y + 4.0 * y * s) * s * (1.0 - s);
}

SfhDiagonal sfh_linear(const Dataset& ds, double epsilon) {
    SfhDiagonal b;
    b.flavor = SfhFlavor::linear;
    b.diag = (2.0 * abs_cross_sums(ds.x).array() + epsilon).matrix();
    b.inv_diag = b.diag.cwiseInverse();
    return b;
}

SfhDiagonal sfh_ridge(const Dataset& ds, double lambda, double epsilon) {
    if (lambda < 0.0)
        throw std::domain_error("sfh_ridge: lambda must be non-negative");
    const Vector row_sums = ds.x.rowwise().sum();
    Vector signed_sums = ds.x.transpose() * row_sums;
    signed_sums.tail(signed_sums.size() - 1).array() += lambda;
    SfhDiagonal b;
    b.flavor = SfhFlavor::ridge;
    b.diag = (signed_sums.array().abs() + epsilon).matrix();
    b.inv_diag = b.diag.cwiseInverse();
    return b;
}

SfhDiagonal sfh_lffr(const Dataset& ds, double epsilon) {
    SfhDiagonal b;
    b.flavor = SfhFlavor::lffr;
    b.diag = (kLffrCurvatureBound * abs_cross_sums(ds.x).array() + epsilon).matrix();
    b.inv_diag = b.diag.cwiseInverse();
    return b;
}

Vector sfh_update(const Vector& w, const Vector& g, const SfhDiagonal& b,
                  int sign) {
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("sfh_update: sign must be +1 or -1");
    if (w.size() != g.size() || w.size() != b.inv_diag.size())
        throw std::invalid_argument("sfh_update: length mismatch");
    return w + static_cast<double>(sign) * b.inv_diag.cwiseProduct(g);
}

double l0_cost(const Dataset& ds, const Vector& w) {
    check_dims(ds, w);
    return (ds.x * w - ds.y).squaredNorm();
}

Vector l0_gradient(const Dataset& ds, const Vector& w) {
    check_dims(ds, w);
    return 2.0 * (ds.x.transpose() * (ds.x * w - ds.y));
}

double l1_cost(const Dataset& ds, const Vector& w, double lambda) {
    check_dims(ds, w);
    if (lambda < 0.0)
        throw std::domain_error("l1_cost: lambda must be non-negative");
    return 0.5 * (ds.x * w - ds.y).squaredNorm() + 0.5 * lambda * w.squaredNorm();
}

Vector l1_gradient(const Dataset& ds, const Vector& w, double lambda) {
    check_dims(ds, w);
    if (lambda < 0.0)
        throw std::domain_error("l1_gradient: lambda must be non-negative");
    return lambda * w + ds.x.transpose() * (ds.x * w - ds.y);
}

double l2_cost(const Dataset& ds, const Vector& w, const SigmoidFn& sigmoid_fn) {
    check_dims(ds, w);
    const Vector s = (ds.x * w).unaryExpr([&](double z) { return sigmoid_fn(z); });
    return (s - ds.y).squaredNorm();
}

double l2_cost(const Dataset& ds, const Vector& w) {
    return l2_cost(ds, w, SigmoidFn(&sigmoid));
}

Vector l2_gradient(const Dataset& ds, const Vector& w,
                   const SigmoidFn& sigmoid_fn) {
    check_dims(ds, w);
    const Vector s = (ds.x * w).unaryExpr([&](double z) { return sigmoid_fn(z); });
    // per-sample weight 2 (s_i - y_i) s_i (1 - s_i)
    const Vector r =
        2.0 * (s - ds.y).array() * s.array() * (1.0 - s.array());
    return ds.x.transpose() * r;
}

Vector l2_gradient(const Dataset& ds, const Vector& w) {
    return l2_gradient(ds, w, SigmoidFn(&sigmoid));
}

}  // namespace fhereg
