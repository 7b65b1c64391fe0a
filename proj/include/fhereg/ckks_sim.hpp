#pragma once

#include "fhereg/dataset.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fhereg::ckks {

/// Grid does not fit the slot budget.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Multiplicative budget exhausted; the message names the operation.
struct DepthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HeParams {
    int log_n = 16;
    int log_q = 1200;
    int log_p = 30;
    Eigen::Index slots = 32768;
    bool noise_mode = false;   // adds ~2^(-log_p/2) per-mult perturbation

    /// slots = 2^(log_n - 1).
    static HeParams from_log_n(int log_n, int log_q, int log_p);
    /// Direct slot override for small tests; log_n is not consulted.
    static HeParams with_slots(Eigen::Index slots, int log_q, int log_p);

    int initial_levels() const { return log_q / log_p; }
};

bool operator==(const HeParams& a, const HeParams& b);

/// Simulated ciphertext: a row-major slot grid with a remaining
/// multiplicative level. Columns are zero-padded to a power of two at encode
/// time; logical_cols tracks the caller-visible width. Values are immutable;
/// every operation returns a new CipherMatrix.
struct CipherMatrix {
    Matrix grid;                    // rows x padded cols
    Eigen::Index logical_cols = 0;
    int level = 0;
    HeParams params;
    bool fresh = false;

    Eigen::Index rows() const { return grid.rows(); }
    Eigen::Index padded_cols() const { return grid.cols(); }
    Eigen::Index slot_count() const { return grid.size(); }
};

/// Ledger of level consumption and refresh events for one training run.
struct RefreshReport {
    int levels_per_iteration = 0;
    int initial_levels = 0;
    std::vector<std::pair<int, std::string>> refresh_events;  // (iteration, op label)
    long total_mults = 0;

    int total_refreshes() const {
        return static_cast<int>(refresh_events.size());
    }
};

Eigen::Index next_pow2(Eigen::Index v);

/// Packs m into a fresh ciphertext at the full level budget. Throws
/// CapacityError when rows * next_pow2(cols) exceeds params.slots.
CipherMatrix encode(const Matrix& m, const HeParams& params);

/// Exact grid contents (logical region); never consumes or alters levels.
Matrix decrypt(const CipherMatrix& a);

/// Slotwise sum/difference; result level is min(a.level, b.level), no level cost.
CipherMatrix add(const CipherMatrix& a, const CipherMatrix& b);
CipherMatrix sub(const CipherMatrix& a, const CipherMatrix& b);

/// Slotwise product with rescale folded in: costs one level off the min.
CipherMatrix mult(const CipherMatrix& a, const CipherMatrix& b,
                  std::string_view label = "mult");

/// Plaintext-ciphertext product; same level cost as mult. A plaintext at the
/// logical width is zero-extended into the padding slots.
CipherMatrix mult_plain(const CipherMatrix& a, const Matrix& m,
                        std::string_view label = "mult_plain");

/// Plaintext-constant product across every slot; costs one level.
CipherMatrix mult_scalar(const CipherMatrix& a, double c,
                         std::string_view label = "mult_scalar");

/// Plaintext-constant add/negate variants; free in this model.
CipherMatrix add_scalar(const CipherMatrix& a, double c);
CipherMatrix sub_from_scalar(double c, const CipherMatrix& a);

/// Cyclic left shift by k over the row-major flattened slot grid; free.
CipherMatrix rotate(const CipherMatrix& a, long k);

/// Every slot of row i becomes the sum of row i. Models the rotate-and-add
/// reduction (log2(cols) rotations); free under the zero-cost-rotation model.
CipherMatrix sum_cols(const CipherMatrix& a);

/// Every slot of column j becomes the sum of column j; free.
CipherMatrix sum_rows(const CipherMatrix& a);

/// Bootstrap stand-in: identical plaintext, full level budget restored.
CipherMatrix refresh(const CipherMatrix& a);

}  // namespace fhereg::ckks
