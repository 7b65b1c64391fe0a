#pragma once

#include "fhereg/core.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fhereg {

enum class Algorithm { linear, ridge, lffr, improved_lffr };
enum class SigmoidKind { exact, poly3 };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

SigmoidFn sigmoid_fn_for(SigmoidKind kind);

struct TrainConfig {
    Algorithm algorithm = Algorithm::linear;
    int iterations = 30;
    double lambda = 0.0;             // ridge only
    double gamma = 0.5;              // improved LFFR only
    SigmoidKind sigmoid_kind = SigmoidKind::exact;
    double epsilon = kDefaultEpsilon;
};

/// Immutable training result; predictions are reproducible from
/// (weights, scaler, feature_scaler, algorithm) alone.
struct TrainedModel {
    Vector weights;
    std::optional<TargetScaler> scaler;   // absent for linear/ridge on raw targets
    FeatureScaler feature_scaler;
    Algorithm algorithm = Algorithm::linear;
    TrainConfig config;
    std::vector<double> trace;            // cost after each update
};

/// Fixed-Hessian linear regression: beta <- beta - Bbar^{-1} grad L0 for
/// cfg.iterations steps. With normalize_targets the targets are unit-scaled
/// first and the scaler is stored for inference.
TrainedModel train_linear(const Dataset& ds, const TrainConfig& cfg,
                          bool normalize_targets = false,
                          const FeatureScaler* fs = nullptr);

TrainedModel train_ridge(const Dataset& ds, const TrainConfig& cfg,
                         const FeatureScaler* fs = nullptr);

/// Sigmoid-output regression on unit-scaled targets, trained with the
/// constant 0.155-bound diagonal and grad L2 under cfg.sigmoid_kind.
TrainedModel train_lffr(const Dataset& ds, const TrainConfig& cfg,
                        const FeatureScaler* fs = nullptr);

/// Maps targets through the gamma-windowed logit and reuses the linear
/// trainer loop verbatim, so the result matches train_linear on the
/// transformed targets exactly.
TrainedModel train_improved_lffr(const Dataset& ds, const TrainConfig& cfg,
                                 const FeatureScaler* fs = nullptr);

/// Scales x_raw with the stored feature scaler, augments the bias, and maps
/// the score back to target units per the model's algorithm. Inference always
/// uses the exact sigmoid.
double predict(const TrainedModel& model, const Vector& x_raw);
Vector predict_many(const TrainedModel& model, const Matrix& rows);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

}  // namespace fhereg
