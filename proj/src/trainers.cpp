#include "fhereg/trainers.hpp"

#include <stdexcept>
#include <utility>

namespace fhereg {

namespace {

void check_config(const TrainConfig& cfg) {
    if (cfg.iterations < 1)
        throw std::invalid_argument("train: iterations must be >= 1");
    if (cfg.epsilon <= 0.0)
        throw std::invalid_argument("train: epsilon must be positive");
}

FeatureScaler scaler_or_identity(const FeatureScaler* fs, const Dataset& ds) {
    return fs ? *fs : FeatureScaler::identity(ds.n_features());
}

// The shared minimization loop: beta starts at zero and takes
// cfg.iterations fixed-Hessian steps; the trace records the cost after
// each update.
template <class GradFn, class CostFn>
std::pair<Vector, std::vector<double>> run_loop(Eigen::Index dim, int iterations,
                                                const SfhDiagonal& b,
                                                const GradFn& grad,
                                                const CostFn& cost) {
    Vector beta = Vector::Zero(dim);
    std::vector<double> trace;
    trace.reserve(static_cast<size_t>(iterations));
    for (int k = 0; k < iterations; ++k) {
        beta = sfh_update(beta, grad(beta), b, -1);
        trace.push_back(cost(beta));
    }
    return {std::move(beta), std::move(trace)};
}

// Linear regression core shared bitwise by train_linear and
// train_improved_lffr.
std::pair<Vector, std::vector<double>> run_linear_loop(const Dataset& ds,
                                                       int iterations,
                                                       double epsilon) {
    const SfhDiagonal b = sfh_linear(ds, epsilon);
    return run_loop(
        ds.x.cols(), iterations, b,
        [&](const Vector& w) { return l0_gradient(ds, w); },
        [&](const Vector& w) { return l0_cost(ds, w); });
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::linear: return "linear";
        case Algorithm::ridge: return "ridge";
        case Algorithm::lffr: return "lffr";
        case Algorithm::improved_lffr: return "improved-lffr";
    }
    throw std::logic_error("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "linear") return Algorithm::linear;
    if (name == "ridge") return Algorithm::ridge;
    if (name == "lffr") return Algorithm::lffr;
    if (name == "improved-lffr" || name == "improved_lffr")
        return Algorithm::improved_lffr;
    throw std::invalid_argument("unknown algorithm name: " + name);
}

SigmoidFn sigmoid_fn_for(SigmoidKind kind) {
    return kind == SigmoidKind::exact ? SigmoidFn(&sigmoid)
                                      : SigmoidFn(&poly_sigmoid3);
}

TrainedModel train_linear(const Dataset& ds, const TrainConfig& cfg,
                          bool normalize_targets, const FeatureScaler* fs) {
    validate_dataset(ds);
    check_config(cfg);
    TrainedModel model;
    model.algorithm = Algorithm::linear;
    model.config = cfg;
    model.config.algorithm = Algorithm::linear;
    model.feature_scaler = scaler_or_identity(fs, ds);

    Dataset work = ds;
    if (normalize_targets) {
        TargetScaler ts = fit_target_scaler(ds.y, std::nullopt, cfg.epsilon);
        work.y = scale_target_unit(ts, ds.y);
        model.scaler = ts;
    }
    std::tie(model.weights, model.trace) =
        run_linear_loop(work, cfg.iterations, cfg.epsilon);
    return model;
}

TrainedModel train_ridge(const Dataset& ds, const TrainConfig& cfg,
                         const FeatureScaler* fs) {
    validate_dataset(ds);
    check_config(cfg);
    const SfhDiagonal b = sfh_ridge(ds, cfg.lambda, cfg.epsilon);
    TrainedModel model;
    model.algorithm = Algorithm::ridge;
    model.config = cfg;
    model.config.algorithm = Algorithm::ridge;
    model.feature_scaler = scaler_or_identity(fs, ds);
    std::tie(model.weights, model.trace) = run_loop(
        ds.x.cols(), cfg.iterations, b,
        [&](const Vector& w) { return l1_gradient(ds, w, cfg.lambda); },
        [&](const Vector& w) { return l1_cost(ds, w, cfg.lambda); });
    return model;
}

TrainedModel train_lffr(const Dataset& ds, const TrainConfig& cfg,
                        const FeatureScaler* fs) {
    validate_dataset(ds);
    check_config(cfg);
    TrainedModel model;
    model.algorithm = Algorithm::lffr;
    model.config = cfg;
    model.config.algorithm = Algorithm::lffr;
    model.feature_scaler = scaler_or_identity(fs, ds);

    TargetScaler ts = fit_target_scaler(ds.y, std::nullopt, cfg.epsilon);
    Dataset work = ds;
    work.y = scale_target_unit(ts, ds.y);
    model.scaler = ts;

    const SfhDiagonal b = sfh_lffr(ds, cfg.epsilon);
    const SigmoidFn sig = sigmoid_fn_for(cfg.sigmoid_kind);
    std::tie(model.weights, model.trace) = run_loop(
        ds.x.cols(), cfg.iterations, b,
        [&](const Vector& w) { return l2_gradient(work, w, sig); },
        [&](const Vector& w) { return l2_cost(work, w, sig); });
    return model;
}

TrainedModel train_improved_lffr(const Dataset& ds, const TrainConfig& cfg,
                                 const FeatureScaler* fs) {
    validate_dataset(ds);
    check_config(cfg);
    TrainedModel model;
    model.algorithm = Algorithm::improved_lffr;
    model.config = cfg;
    model.config.algorithm = Algorithm::improved_lffr;
    model.feature_scaler = scaler_or_identity(fs, ds);

    TargetScaler ts = fit_target_scaler(ds.y, cfg.gamma, cfg.epsilon);
    Dataset work = ds;
    work.y = logit_scale_target(ts, ds.y);
    model.scaler = ts;

    std::tie(model.weights, model.trace) =
        run_linear_loop(work, cfg.iterations, cfg.epsilon);
    return model;
}

double predict(const TrainedModel& model, const Vector& x_raw) {
    const Vector scaled = model.feature_scaler.transform(x_raw);
    if (scaled.size() + 1 != model.weights.size())
        throw std::invalid_argument("predict: feature count does not match model");
    const double z =
        model.weights[0] + model.weights.tail(scaled.size()).dot(scaled);
    switch (model.algorithm) {
        case Algorithm::linear:
        case Algorithm::ridge:
            return model.scaler ? unscale_target_unit(*model.scaler, z) : z;
        case Algorithm::lffr:
        case Algorithm::improved_lffr: {
            if (!model.scaler)
                throw std::logic_error("predict: model is missing its target scaler");
            const double prob = sigmoid(z);
            return model.algorithm == Algorithm::lffr
                       ? unscale_target_unit(*model.scaler, prob)
                       : logit_unscale_target(*model.scaler, prob);
        }
    }
    throw std::logic_error("predict: unknown algorithm");
}

Vector predict_many(const TrainedModel& model, const Matrix& rows) {
    Vector out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        out[i] = predict(model, rows.row(i).transpose());
    return out;
}

nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json doc;
    doc["algorithm"] = algorithm_name(model.algorithm);
    doc["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    doc["iterations"] = model.config.iterations;
    doc["epsilon"] = model.scaler ? model.scaler->epsilon : model.config.epsilon;
    if (model.scaler) {
        doc["y_min"] = model.scaler->y_min;
        doc["y_max"] = model.scaler->y_max;
        if (model.scaler->gamma) doc["gamma"] = *model.scaler->gamma;
    }
    doc["feature_scaler"] = {
        {"mins", std::vector<double>(model.feature_scaler.col_min.begin(),
                                     model.feature_scaler.col_min.end())},
        {"maxs", std::vector<double>(model.feature_scaler.col_max.begin(),
                                     model.feature_scaler.col_max.end())},
        {"lo", model.feature_scaler.lo},
        {"hi", model.feature_scaler.hi},
    };
    return doc;
}

TrainedModel model_from_json(const nlohmann::json& doc) {
    TrainedModel model;
    model.algorithm = algorithm_from_name(doc.at("algorithm").get<std::string>());
    const auto w = doc.at("weights").get<std::vector<double>>();
    model.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    model.config.algorithm = model.algorithm;
    model.config.iterations = doc.value("iterations", 0);
    model.config.epsilon = doc.value("epsilon", kDefaultEpsilon);
    if (doc.contains("y_min")) {
        TargetScaler ts;
        ts.y_min = doc.at("y_min").get<double>();
        ts.y_max = doc.at("y_max").get<double>();
        ts.epsilon = doc.value("epsilon", kDefaultEpsilon);
        if (doc.contains("gamma")) {
            ts.gamma = doc.at("gamma").get<double>();
            model.config.gamma = *ts.gamma;
        }
        model.scaler = ts;
    }
    const auto& fsj = doc.at("feature_scaler");
    const auto mins = fsj.at("mins").get<std::vector<double>>();
    const auto maxs = fsj.at("maxs").get<std::vector<double>>();
    if (mins.size() != maxs.size())
        throw std::invalid_argument("model document: feature scaler mins/maxs length mismatch");
    model.feature_scaler.col_min =
        Eigen::Map<const Vector>(mins.data(), static_cast<Eigen::Index>(mins.size()));
    model.feature_scaler.col_max =
        Eigen::Map<const Vector>(maxs.data(), static_cast<Eigen::Index>(maxs.size()));
    model.feature_scaler.lo = fsj.at("lo").get<double>();
    model.feature_scaler.hi = fsj.at("hi").get<double>();
    if (model.weights.size() != model.feature_scaler.col_min.size() + 1)
        throw std::invalid_argument("model document: weight/scaler dimension mismatch");
    return model;
}

}  // namespace fhereg
