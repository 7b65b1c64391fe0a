#include "fhereg/data_io.hpp"

#include "fhereg/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace fhereg {

namespace {

// splitmix64; self-contained so splits and synthetic data are reproducible
// across standard libraries.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double unit() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double symmetric() { return 2.0 * unit() - 1.0; }  // [-1, 1)

    double gaussian() {  // Box-Muller
        const double u1 = 1.0 - unit();  // (0, 1]
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }
};

double parse_cell(const std::string& cell, std::size_t line_no,
                  std::size_t col_no) {
    std::size_t begin = cell.find_first_not_of(" \t\r");
    std::size_t end = cell.find_last_not_of(" \t\r");
    if (begin == std::string::npos)
        throw std::runtime_error("csv: empty cell at line " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(col_no + 1));
    const char* first = cell.data() + begin;
    const char* last = cell.data() + end + 1;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error("csv: cannot parse '" +
                                 cell.substr(begin, end - begin + 1) +
                                 "' at line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col_no + 1));
    return value;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string cell = comma == std::string::npos
                                     ? line.substr(start)
                                     : line.substr(start, comma - start);
        row.push_back(parse_cell(cell, line_no, col));
        ++col;
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return row;
}

bool blank_line(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::pair<Matrix, Vector> load_csv(const std::string& path, bool has_header,
                                   Eigen::Index target_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_line(line)) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> row = parse_row(line, line_no);
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("csv: line " + std::to_string(line_no) +
                                     " has " + std::to_string(row.size()) +
                                     " cells, expected " +
                                     std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }

    if (rows.empty()) return {Matrix(0, 0), Vector(0)};

    const Eigen::Index width = static_cast<Eigen::Index>(rows.front().size());
    if (target_column < 0 || target_column >= width)
        throw std::runtime_error("csv: target column " +
                                 std::to_string(target_column) +
                                 " out of range for " + std::to_string(width) +
                                 " columns");

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Matrix x(n, width - 1);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index out = 0;
        for (Eigen::Index j = 0; j < width; ++j) {
            const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (j == target_column)
                y[i] = v;
            else
                x(i, out++) = v;
        }
    }
    return {std::move(x), std::move(y)};
}

SplitIndices split_indices(Eigen::Index n, const SplitSpec& spec) {
    if (n < 2) throw std::invalid_argument("split: need at least 2 samples");
    if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0)
        throw std::invalid_argument("split: test_fraction must lie in (0, 1)");

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(spec.seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(
            rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }

    const auto n_test = static_cast<Eigen::Index>(
        std::ceil(spec.test_fraction * static_cast<double>(n)));
    SplitIndices out;
    out.train.assign(perm.begin(), perm.end() - n_test);
    out.test.assign(perm.end() - n_test, perm.end());
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
    const SplitIndices idx = split_indices(ds.x.rows(), spec);
    auto take = [&](const std::vector<Eigen::Index>& which) {
        Dataset part;
        part.feature_range = ds.feature_range;
        part.x.resize(static_cast<Eigen::Index>(which.size()), ds.x.cols());
        part.y.resize(static_cast<Eigen::Index>(which.size()));
        for (std::size_t i = 0; i < which.size(); ++i) {
            part.x.row(static_cast<Eigen::Index>(i)) = ds.x.row(which[i]);
            part.y[static_cast<Eigen::Index>(i)] = ds.y[which[i]];
        }
        return part;
    };
    return {take(idx.train), take(idx.test)};
}

double mse(const Vector& predictions, const Vector& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mse: length mismatch");
    if (predictions.size() < 1)
        throw std::invalid_argument("mse: empty vectors");
    return (predictions - targets).squaredNorm() /
           static_cast<double>(predictions.size());
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1)
        throw std::invalid_argument("generate_synthetic: need n >= 1, d >= 1");
    if (spec.noise_sigma < 0.0)
        throw std::invalid_argument("generate_synthetic: negative noise");

    Rng rng(spec.seed);
    Matrix features(spec.n, spec.d);
    for (Eigen::Index i = 0; i < spec.n; ++i)
        for (Eigen::Index j = 0; j < spec.d; ++j) features(i, j) = rng.symmetric();
    Vector r(spec.d);
    for (Eigen::Index j = 0; j < spec.d; ++j) r[j] = rng.symmetric();

    Vector y = features * r;
    if (spec.link == LinkKind::sigmoid)
        y = y.unaryExpr([](double t) { return sigmoid(kSigmoidLinkSteepness * t); });
    if (spec.noise_sigma > 0.0)
        for (Eigen::Index i = 0; i < spec.n; ++i)
            y[i] += spec.noise_sigma * rng.gaussian();

    SyntheticData out{make_dataset(features, y, {-1.0, 1.0}), std::move(r)};
    return out;
}

}  // namespace fhereg
