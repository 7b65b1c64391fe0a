#include "fhereg/encrypted.hpp"

#include <stdexcept>

namespace fhereg {

namespace ck = ckks;

namespace {

ck::CipherMatrix replicate_rows(const Vector& row, Eigen::Index rows,
                                const ck::HeParams& params) {
    Matrix grid = row.transpose().replicate(rows, 1);
    return ck::encode(grid, params);
}

void maybe_refresh(EncryptedTrainingState& state, int needed,
                   const std::string& label, bool auto_refresh) {
    if (state.ct_beta.level >= needed) return;
    if (!auto_refresh)
        throw ck::DepthError(label + ": level " +
                             std::to_string(state.ct_beta.level) +
                             " cannot cover " + std::to_string(needed));
    state.ct_beta = ck::refresh(state.ct_beta);
    state.report.refresh_events.emplace_back(state.iteration, label);
    if (state.ct_beta.level < needed)
        throw std::invalid_argument(
            "encrypted training: initial level budget below per-iteration cost");
}

ck::CipherMatrix counted_mult(EncryptedTrainingState& state,
                              const ck::CipherMatrix& a,
                              const ck::CipherMatrix& b,
                              std::string_view label) {
    ++state.report.total_mults;
    return ck::mult(a, b, label);
}

ck::CipherMatrix counted_mult_scalar(EncryptedTrainingState& state,
                                     const ck::CipherMatrix& a, double c,
                                     std::string_view label) {
    ++state.report.total_mults;
    return ck::mult_scalar(a, c, label);
}

// Shared tail of both steps: double the weighted residuals, reduce down the
// rows, accumulate across blocks, apply the inverted diagonal, update beta.
void finish_step(EncryptedTrainingState& state,
                 std::vector<ck::CipherMatrix>&& block_grads) {
    ck::CipherMatrix grad = std::move(block_grads.front());
    for (size_t k = 1; k < block_grads.size(); ++k)
        grad = ck::add(grad, block_grads[k]);
    const ck::CipherMatrix quad =
        counted_mult(state, state.ct_bbar, grad, "bbar*grad");
    state.ct_beta = ck::sub(state.ct_beta, quad);
    ++state.iteration;
}

}  // namespace

int levels_per_iteration(Algorithm a) {
    switch (a) {
        case Algorithm::linear:
        case Algorithm::improved_lffr:
            return kLinearLevelsPerIteration;
        case Algorithm::lffr:
            return kLffrLevelsPerIteration;
        case Algorithm::ridge:
            break;
    }
    throw std::invalid_argument("levels_per_iteration: no encrypted circuit for this algorithm");
}

int predicted_refreshes(int initial_levels, int levels_per_iter, int iterations) {
    if (levels_per_iter < 1 || iterations < 1)
        throw std::invalid_argument("predicted_refreshes: bad arguments");
    const int per_fill = initial_levels / levels_per_iter;
    if (per_fill < 1)
        throw std::invalid_argument(
            "predicted_refreshes: budget below per-iteration cost");
    return (iterations - 1) / per_fill;
}

Eigen::Index rows_per_ciphertext(Eigen::Index cols, const ck::HeParams& params) {
    const Eigen::Index padded = ck::next_pow2(cols);
    const Eigen::Index rows = params.slots / padded;
    if (rows < 1)
        throw ck::CapacityError("a single " + std::to_string(cols) +
                                "-column row (padded to " + std::to_string(padded) +
                                ") exceeds " + std::to_string(params.slots) + " slots");
    return rows;
}

std::vector<Dataset> shard_dataset(const Dataset& ds, const ck::HeParams& params) {
    const Eigen::Index n = ds.x.rows();
    const Eigen::Index block = rows_per_ciphertext(ds.x.cols(), params);
    std::vector<Dataset> out;
    for (Eigen::Index start = 0; start < n; start += block) {
        const Eigen::Index len = std::min(block, n - start);
        out.push_back(Dataset{ds.x.middleRows(start, len),
                              ds.y.segment(start, len), ds.feature_range});
    }
    return out;
}

EncryptedTrainingState pack_inputs(const Dataset& ds, const SfhDiagonal& b,
                                   const ck::HeParams& params,
                                   bool allow_sharding) {
    if (ds.x.rows() < 1 || ds.x.cols() < 1)
        throw std::invalid_argument("pack_inputs: empty dataset");
    if (b.inv_diag.size() != ds.x.cols())
        throw std::invalid_argument("pack_inputs: diagonal length mismatch");

    EncryptedTrainingState state;
    state.n = ds.x.rows();
    state.cols = ds.x.cols();

    const Eigen::Index per_ct = rows_per_ciphertext(state.cols, params);
    const std::vector<Dataset> blocks = shard_dataset(ds, params);
    if (blocks.size() > 1 && !allow_sharding)
        throw ck::CapacityError("dataset needs " + std::to_string(blocks.size()) +
                                " ciphertexts and sharding is disabled");

    // All blocks are packed at one common shape; short blocks get zero rows.
    const Eigen::Index block_rows = blocks.size() == 1 ? state.n : per_ct;
    for (const Dataset& blk : blocks) {
        Matrix xg = Matrix::Zero(block_rows, state.cols);
        xg.topRows(blk.x.rows()) = blk.x;
        Matrix yg = Matrix::Zero(block_rows, state.cols);
        yg.topRows(blk.y.size()) = blk.y.replicate(1, state.cols);
        state.ct_x.push_back(ck::encode(xg, params));
        state.ct_y.push_back(ck::encode(yg, params));
    }
    state.ct_beta = ck::encode(Matrix::Zero(block_rows, state.cols), params);
    state.ct_bbar = replicate_rows(b.inv_diag, block_rows, params);
    state.report.initial_levels = params.initial_levels();
    return state;
}

void encrypted_gradient_step_linear(EncryptedTrainingState& state,
                                    bool auto_refresh) {
    state.report.levels_per_iteration = kLinearLevelsPerIteration;
    maybe_refresh(state, kLinearLevelsPerIteration, "linear step", auto_refresh);
    std::vector<ck::CipherMatrix> grads;
    grads.reserve(state.ct_x.size());
    for (size_t k = 0; k < state.ct_x.size(); ++k) {
        const auto& x = state.ct_x[k];
        const ck::CipherMatrix z =
            ck::sum_cols(counted_mult(state, x, state.ct_beta, "x*beta"));
        const ck::CipherMatrix r = ck::sub(z, state.ct_y[k]);
        const ck::CipherMatrix t = counted_mult(state, r, x, "residual*x");
        grads.push_back(ck::sum_rows(ck::add(t, t)));
    }
    finish_step(state, std::move(grads));
}

void encrypted_gradient_step_lffr(EncryptedTrainingState& state,
                                  bool auto_refresh) {
    state.report.levels_per_iteration = kLffrLevelsPerIteration;
    maybe_refresh(state, kLffrLevelsPerIteration, "lffr step", auto_refresh);
    std::vector<ck::CipherMatrix> grads;
    grads.reserve(state.ct_x.size());
    for (size_t k = 0; k < state.ct_x.size(); ++k) {
        const auto& x = state.ct_x[k];
        const ck::CipherMatrix z =
            ck::sum_cols(counted_mult(state, x, state.ct_beta, "x*beta"));
        // g(z) = 0.5 + c1 z - c3 z^3 evaluated as 0.5 + z (c1 - c3 z^2)
        const ck::CipherMatrix z2 = counted_mult(state, z, z, "z^2");
        const ck::CipherMatrix inner = ck::add_scalar(
            counted_mult_scalar(state, z2, -kPolySigmoidC3, "c3*z^2"),
            kPolySigmoidC1);
        const ck::CipherMatrix s =
            ck::add_scalar(counted_mult(state, z, inner, "z*(c1-c3 z^2)"), 0.5);
        const ck::CipherMatrix r = ck::sub(s, state.ct_y[k]);
        const ck::CipherMatrix w1 = counted_mult(state, r, s, "(s-y)*s");
        const ck::CipherMatrix w2 =
            counted_mult(state, w1, ck::sub_from_scalar(1.0, s), "*(1-s)");
        const ck::CipherMatrix t = counted_mult(state, w2, x, "weight*x");
        grads.push_back(ck::sum_rows(ck::add(t, t)));
    }
    finish_step(state, std::move(grads));
}

std::pair<TrainedModel, ck::RefreshReport> train_encrypted(
    const Dataset& ds, const TrainConfig& cfg, const ck::HeParams& params,
    bool normalize_targets, const FeatureScaler* fs) {
    validate_dataset(ds);
    if (cfg.iterations < 1)
        throw std::invalid_argument("train_encrypted: iterations must be >= 1");
    if (cfg.algorithm == Algorithm::ridge)
        throw std::invalid_argument("train_encrypted: no encrypted ridge circuit");

    TrainedModel model;
    model.algorithm = cfg.algorithm;
    model.config = cfg;
    model.feature_scaler = fs ? *fs : FeatureScaler::identity(ds.n_features());

    // Step 1 is client-side: fit and apply the target transform in the clear.
    Dataset work = ds;
    SfhDiagonal b;
    switch (cfg.algorithm) {
        case Algorithm::linear:
            if (normalize_targets) {
                TargetScaler ts = fit_target_scaler(ds.y, std::nullopt, cfg.epsilon);
                work.y = scale_target_unit(ts, ds.y);
                model.scaler = ts;
            }
            b = sfh_linear(ds, cfg.epsilon);
            break;
        case Algorithm::lffr: {
            TargetScaler ts = fit_target_scaler(ds.y, std::nullopt, cfg.epsilon);
            work.y = scale_target_unit(ts, ds.y);
            model.scaler = ts;
            b = sfh_lffr(ds, cfg.epsilon);
            model.config.sigmoid_kind = SigmoidKind::poly3;
            break;
        }
        case Algorithm::improved_lffr: {
            TargetScaler ts = fit_target_scaler(ds.y, cfg.gamma, cfg.epsilon);
            work.y = logit_scale_target(ts, ds.y);
            model.scaler = ts;
            b = sfh_linear(ds, cfg.epsilon);
            break;
        }
        case Algorithm::ridge:
            break;  // rejected above
    }

    const int per_iter = levels_per_iteration(cfg.algorithm);
    if (params.initial_levels() < per_iter)
        throw std::invalid_argument(
            "train_encrypted: level budget cannot cover one iteration");

    EncryptedTrainingState state = pack_inputs(work, b, params);
    state.report.levels_per_iteration = per_iter;

    const bool lffr = cfg.algorithm == Algorithm::lffr;
    const SigmoidFn poly = sigmoid_fn_for(SigmoidKind::poly3);
    for (int k = 0; k < cfg.iterations; ++k) {
        if (lffr)
            encrypted_gradient_step_lffr(state);
        else
            encrypted_gradient_step_linear(state);
        const Vector beta =
            ck::decrypt(state.ct_beta).row(0).head(state.cols).transpose();
        model.trace.push_back(lffr ? l2_cost(work, beta, poly)
                                   : l0_cost(work, beta));
    }

    model.weights =
        ck::decrypt(state.ct_beta).row(0).head(state.cols).transpose();
    return {std::move(model), std::move(state.report)};
}

}  // namespace fhereg
