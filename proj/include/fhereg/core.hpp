#pragma once

#include "fhereg/dataset.hpp"

#include <functional>

namespace fhereg {

/// Degree-3 least-squares fit of the sigmoid on [-5, 5].
inline constexpr double kPolySigmoidC1 = 0.19824;
inline constexpr double kPolySigmoidC3 = 0.0044650;

/// Global bound on the LFFR Hessian weight over sigma, y in [0, 1].
inline constexpr double kLffrCurvatureBound = 0.155;

/// Numerically stable logistic function, 1 / (1 + exp(-z)).
double sigmoid(double z);

/// Inverse sigmoid, ln(p / (1 - p)). Throws std::domain_error unless 0 < p < 1.
double logit(double p);

/// g(z) = 0.5 + 0.19824 z - 0.0044650 z^3, the encrypted-domain sigmoid stand-in.
double poly_sigmoid3(double z);

/// Hessian weight of the sigmoid squared-error loss at one sample:
/// (4 s - 6 s^2 - 2 y + 4 y s) * s * (1 - s).
double lffr_hessian_weight(double s, double y);

using SigmoidFn = std::function<double(double)>;

enum class SfhFlavor { linear, ridge, lffr };

/// Constant diagonal Hessian substitute with its elementwise reciprocal.
/// Entries depend only on the design matrix (and lambda), never on beta.
struct SfhDiagonal {
    Vector diag;
    Vector inv_diag;
    SfhFlavor flavor = SfhFlavor::linear;
};

/// diag[k] = eps + 2 sum_j sum_i |x_ij x_ik|; dominates the Hessian 2 X^T X.
SfhDiagonal sfh_linear(const Dataset& ds, double epsilon = kDefaultEpsilon);

/// diag[k] = |lambda [k != 0] + sum_j sum_i x_ij x_ik| + eps (signed inner
/// sums; the bias entry is never penalized).
SfhDiagonal sfh_ridge(const Dataset& ds, double lambda,
                      double epsilon = kDefaultEpsilon);

/// diag[k] = eps + 0.155 sum_j sum_i |x_ij x_ik|.
SfhDiagonal sfh_lffr(const Dataset& ds, double epsilon = kDefaultEpsilon);

/// w'[j] = w[j] + sign * g[j] / diag[j]; sign must be +1 or -1. All trainers
/// here minimize, so they pass -1.
Vector sfh_update(const Vector& w, const Vector& g, const SfhDiagonal& b,
                  int sign);

/// L0 = sum_i (beta^T x_i - y_i)^2.
double l0_cost(const Dataset& ds, const Vector& w);

/// grad L0 = 2 sum_i (beta^T x_i - y_i) x_i.
Vector l0_gradient(const Dataset& ds, const Vector& w);

/// L1 = 1/2 sum_i (beta^T x_i - y_i)^2 + lambda/2 sum_k beta_k^2 (bias included).
double l1_cost(const Dataset& ds, const Vector& w, double lambda);

/// grad L1 = lambda beta + sum_i (beta^T x_i - y_i) x_i.
Vector l1_gradient(const Dataset& ds, const Vector& w, double lambda);

/// L2 = sum_i (sigma(beta^T x_i) - y_i)^2, targets expected in [0, 1].
double l2_cost(const Dataset& ds, const Vector& w, const SigmoidFn& sigmoid_fn);
double l2_cost(const Dataset& ds, const Vector& w);

/// grad L2 = sum_i 2 (s_i - y_i) s_i (1 - s_i) x_i with s_i = sigmoid_fn(beta^T x_i).
/// The sigmoid is a parameter so the cleartext (exact) and encrypted (poly3)
/// paths share this code.
Vector l2_gradient(const Dataset& ds, const Vector& w,
                   const SigmoidFn& sigmoid_fn);
Vector l2_gradient(const Dataset& ds, const Vector& w);

}  // namespace fhereg
