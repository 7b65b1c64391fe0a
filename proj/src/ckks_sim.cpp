#include "fhereg/ckks_sim.hpp"

#include <cmath>
#include <random>

namespace fhereg::ckks {

namespace {

void check_params(const HeParams& p) {
    if (p.log_p < 1 || p.log_q < p.log_p)
        throw std::invalid_argument("HeParams: need log_q >= log_p >= 1");
    if (p.initial_levels() < 2)
        throw std::invalid_argument("HeParams: initial level budget must be >= 2");
    if (p.slots < 1)
        throw std::invalid_argument("HeParams: slots must be positive");
}

void check_same_shape(const CipherMatrix& a, const CipherMatrix& b,
                      const char* op) {
    if (!(a.params == b.params))
        throw std::invalid_argument(std::string(op) + ": parameter mismatch");
    if (a.rows() != b.rows() || a.padded_cols() != b.padded_cols() ||
        a.logical_cols != b.logical_cols)
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

int consume_level(const CipherMatrix& a, const CipherMatrix& b,
                  std::string_view label) {
    const int lv = std::min(a.level, b.level);
    if (lv < 1)
        throw DepthError(std::string(label) +
                         ": multiplicative level budget exhausted");
    return lv - 1;
}

int consume_level(const CipherMatrix& a, std::string_view label) {
    if (a.level < 1)
        throw DepthError(std::string(label) +
                         ": multiplicative level budget exhausted");
    return a.level - 1;
}

CipherMatrix derived(const CipherMatrix& a, Matrix grid, int level) {
    CipherMatrix out;
    out.grid = std::move(grid);
    out.logical_cols = a.logical_cols;
    out.level = level;
    out.params = a.params;
    out.fresh = false;
    return out;
}

void apply_mult_noise(CipherMatrix& a) {
    if (!a.params.noise_mode) return;
    thread_local std::mt19937_64 rng(0x5eedf00ddeadbeefULL);
    const double mag = std::pow(2.0, -0.5 * a.params.log_p);
    std::uniform_real_distribution<double> u(-mag, mag);
    for (Eigen::Index i = 0; i < a.grid.size(); ++i) a.grid.data()[i] += u(rng);
}

}  // namespace

HeParams HeParams::from_log_n(int log_n, int log_q, int log_p) {
    HeParams p;
    p.log_n = log_n;
    p.log_q = log_q;
    p.log_p = log_p;
    if (log_n < 1 || log_n > 40)
        throw std::invalid_argument("HeParams: log_n out of range");
    p.slots = Eigen::Index(1) << (log_n - 1);
    check_params(p);
    return p;
}

HeParams HeParams::with_slots(Eigen::Index slots, int log_q, int log_p) {
    HeParams p;
    p.log_n = 0;                 // marks the override
    p.log_q = log_q;
    p.log_p = log_p;
    p.slots = slots;
    check_params(p);
    return p;
}

bool operator==(const HeParams& a, const HeParams& b) {
    return a.log_n == b.log_n && a.log_q == b.log_q && a.log_p == b.log_p &&
           a.slots == b.slots && a.noise_mode == b.noise_mode;
}

Eigen::Index next_pow2(Eigen::Index v) {
    Eigen::Index p = 1;
    while (p < v) p <<= 1;
    return p;
}

CipherMatrix encode(const Matrix& m, const HeParams& params) {
    check_params(params);
    if (m.rows() < 1 || m.cols() < 1)
        throw std::invalid_argument("encode: empty matrix");
    const Eigen::Index padded = next_pow2(m.cols());
    if (m.rows() * padded > params.slots)
        throw CapacityError("encode: grid of " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " (padded to " +
                            std::to_string(padded) + " columns) exceeds " +
                            std::to_string(params.slots) + " slots");
    CipherMatrix ct;
    ct.grid = Matrix::Zero(m.rows(), padded);
    ct.grid.leftCols(m.cols()) = m;
    ct.logical_cols = m.cols();
    ct.level = params.initial_levels();
    ct.params = params;
    ct.fresh = true;
    return ct;
}

Matrix decrypt(const CipherMatrix& a) {
    return a.grid.leftCols(a.logical_cols);
}

CipherMatrix add(const CipherMatrix& a, const CipherMatrix& b) {
    check_same_shape(a, b, "add");
    return derived(a, a.grid + b.grid, std::min(a.level, b.level));
}

CipherMatrix sub(const CipherMatrix& a, const CipherMatrix& b) {
    check_same_shape(a, b, "sub");
    return derived(a, a.grid - b.grid, std::min(a.level, b.level));
}

CipherMatrix mult(const CipherMatrix& a, const CipherMatrix& b,
                  std::string_view label) {
    check_same_shape(a, b, "mult");
    const int lv = consume_level(a, b, label);
    CipherMatrix out = derived(a, a.grid.cwiseProduct(b.grid), lv);
    apply_mult_noise(out);
    return out;
}

CipherMatrix mult_plain(const CipherMatrix& a, const Matrix& m,
                        std::string_view label) {
    if (m.rows() != a.rows() ||
        (m.cols() != a.padded_cols() && m.cols() != a.logical_cols))
        throw std::invalid_argument("mult_plain: plaintext shape mismatch");
    const int lv = consume_level(a, label);
    Matrix plain = Matrix::Zero(a.rows(), a.padded_cols());
    plain.leftCols(m.cols()) = m;
    CipherMatrix out = derived(a, a.grid.cwiseProduct(plain), lv);
    apply_mult_noise(out);
    return out;
}

CipherMatrix mult_scalar(const CipherMatrix& a, double c,
                         std::string_view label) {
    const int lv = consume_level(a, label);
    CipherMatrix out = derived(a, a.grid * c, lv);
    apply_mult_noise(out);
    return out;
}

CipherMatrix add_scalar(const CipherMatrix& a, double c) {
    return derived(a, a.grid.array() + c, a.level);
}

CipherMatrix sub_from_scalar(double c, const CipherMatrix& a) {
    return derived(a, (c - a.grid.array()).matrix(), a.level);
}

CipherMatrix rotate(const CipherMatrix& a, long k) {
    const long total = static_cast<long>(a.slot_count());
    const long shift = ((k % total) + total) % total;
    if (shift == 0) return a;
    const Eigen::Index cols = a.padded_cols();
    Matrix out(a.rows(), cols);
    for (long p = 0; p < total; ++p) {
        const long q = (p + shift) % total;   // slot q moves into position p
        out(p / cols, p % cols) = a.grid(q / cols, q % cols);
    }
    return derived(a, std::move(out), a.level);
}

CipherMatrix sum_cols(const CipherMatrix& a) {
    // sequential left-to-right accumulation keeps the reduction order exact
    Vector row_sums = Vector::Zero(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.padded_cols(); ++j)
            row_sums[i] += a.grid(i, j);
    Matrix out = row_sums.replicate(1, a.padded_cols());
    return derived(a, std::move(out), a.level);
}

CipherMatrix sum_rows(const CipherMatrix& a) {
    Eigen::RowVectorXd col_sums = Eigen::RowVectorXd::Zero(a.padded_cols());
    for (Eigen::Index j = 0; j < a.padded_cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) col_sums[j] += a.grid(i, j);
    Matrix out = col_sums.replicate(a.rows(), 1);
    return derived(a, std::move(out), a.level);
}

CipherMatrix refresh(const CipherMatrix& a) {
    CipherMatrix out = a;
    out.level = a.params.initial_levels();
    return out;
}

}  // namespace fhereg::ckks
