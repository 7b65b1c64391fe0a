#pragma once

#include "fhereg/ckks_sim.hpp"
#include "fhereg/trainers.hpp"

#include <utility>
#include <vector>

namespace fhereg {

/// Measured multiplicative depth of one training iteration on the weight
/// ciphertext chain (asserted by the test suite, not re-derived at runtime).
inline constexpr int kLinearLevelsPerIteration = 3;
inline constexpr int kLffrLevelsPerIteration = 8;

/// linear and improved-lffr run the same circuit; lffr adds the polynomial
/// sigmoid and residual-weighting stages.
int levels_per_iteration(Algorithm a);

/// Refresh count implied by the refresh-before-iteration rule: the budget
/// sustains floor(initial / per_iter) iterations per fill.
int predicted_refreshes(int initial_levels, int levels_per_iter, int iterations);

/// Rows of a (1 + d)-column dataset that fit one ciphertext after column
/// padding. Throws CapacityError when a single row does not fit.
Eigen::Index rows_per_ciphertext(Eigen::Index cols, const ckks::HeParams& params);

/// Row-wise blocks each fitting one ciphertext; a dataset that fits returns a
/// single block. Per-block gradients add up to the whole-dataset gradient.
std::vector<Dataset> shard_dataset(const Dataset& ds, const ckks::HeParams& params);

/// Packed ciphertexts: X blocks, per-row-replicated targets, and the weight
/// vector / inverted Hessian diagonal replicated down the rows. Blocks share
/// one shape so the weight ciphertext multiplies against any of them; rows
/// past a block's true samples are zero and contribute nothing to gradients.
struct EncryptedTrainingState {
    std::vector<ckks::CipherMatrix> ct_x;
    std::vector<ckks::CipherMatrix> ct_y;
    ckks::CipherMatrix ct_beta;
    ckks::CipherMatrix ct_bbar;
    ckks::RefreshReport report;
    int iteration = 0;
    Eigen::Index n = 0;
    Eigen::Index cols = 0;
};

/// Lays out the four ciphertexts; ct_bbar carries 1/diag (the factor applied
/// to the gradient, computed by the data owner since ciphertext division is
/// unavailable). ct_beta starts at zero with the full level budget.
EncryptedTrainingState pack_inputs(const Dataset& ds, const SfhDiagonal& b,
                                   const ckks::HeParams& params,
                                   bool allow_sharding = true);

/// One fixed-Hessian iteration on ciphertexts:
/// Z = rowsum(X (*) beta); g = colsum(2 (Z - Y) (*) X); beta -= Bbar^{-1} (*) g.
/// When the remaining level cannot cover the iteration, the weight ciphertext
/// is refreshed first (auto_refresh), otherwise a DepthError propagates.
void encrypted_gradient_step_linear(EncryptedTrainingState& state,
                                    bool auto_refresh = true);

/// Linear step with Z passed through the degree-3 polynomial sigmoid and the
/// residual weighted by 2 (g(z) - y) g(z) (1 - g(z)).
void encrypted_gradient_step_lffr(EncryptedTrainingState& state,
                                  bool auto_refresh = true);

/// Full encrypted training run: transforms targets client-side per the
/// algorithm, packs, iterates with automatic weight-ciphertext refreshes,
/// and decrypts the final weights. cfg.algorithm must be linear, lffr, or
/// improved_lffr; the encrypted lffr loop always uses the poly3 sigmoid.
std::pair<TrainedModel, ckks::RefreshReport> train_encrypted(
    const Dataset& ds, const TrainConfig& cfg, const ckks::HeParams& params,
    bool normalize_targets = false, const FeatureScaler* fs = nullptr);

}  // namespace fhereg
