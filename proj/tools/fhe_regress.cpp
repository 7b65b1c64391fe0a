#include "fhereg/data_io.hpp"
#include "fhereg/encrypted.hpp"
#include "fhereg/trainers.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fhereg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct DataFlags {
    std::string csv_path;
    Eigen::Index target_col = -1;
    bool has_header = false;
    bool synthetic = false;
    Eigen::Index n = 1000;
    Eigen::Index d = 4;
    double noise = 0.0;
    std::string link = "linear";
};

struct HeFlags {
    int log_n = 16;
    int log_q = 1200;
    int log_p = 30;
    Eigen::Index slots = 0;  // 0: derive from log_n

    ckks::HeParams params() const {
        return slots > 0 ? ckks::HeParams::with_slots(slots, log_q, log_p)
                         : ckks::HeParams::from_log_n(log_n, log_q, log_p);
    }
};

void add_data_flags(CLI::App* cmd, DataFlags& data) {
    cmd->add_option("--csv", data.csv_path, "input CSV file");
    cmd->add_option("--target-col", data.target_col, "0-based target column in the CSV");
    cmd->add_flag("--has-header", data.has_header, "skip the first CSV line");
    cmd->add_flag("--synthetic", data.synthetic, "generate synthetic data instead of reading a CSV");
    cmd->add_option("--n", data.n, "synthetic sample count");
    cmd->add_option("--d", data.d, "synthetic feature count");
    cmd->add_option("--noise", data.noise, "synthetic Gaussian noise sigma");
    cmd->add_option("--link", data.link, "synthetic link: linear or sigmoid")
        ->check(CLI::IsMember({"linear", "sigmoid"}));
}

void add_he_flags(CLI::App* cmd, HeFlags& he) {
    cmd->add_option("--log-n", he.log_n, "ring-degree exponent");
    cmd->add_option("--log-q", he.log_q, "total modulus bits");
    cmd->add_option("--log-p", he.log_p, "scale bits consumed per rescale");
    cmd->add_option("--slots", he.slots, "slot-count override for small runs");
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FHE_REGRESS_OUT"); env && *env) return env;
    return ".";
}

// raw features + targets from either source; row order preserved
std::pair<Matrix, Vector> resolve_data(const DataFlags& data, std::uint64_t seed) {
    if (data.synthetic) {
        SyntheticSpec spec;
        spec.n = data.n;
        spec.d = data.d;
        spec.noise_sigma = data.noise;
        spec.link = data.link == "sigmoid" ? LinkKind::sigmoid : LinkKind::linear;
        spec.seed = seed;
        SyntheticData syn = generate_synthetic(spec);
        return {syn.ds.x.rightCols(syn.ds.n_features()), syn.ds.y};
    }
    return load_csv(data.csv_path, data.has_header, data.target_col);
}

json data_echo(const DataFlags& data) {
    json j;
    if (data.synthetic) {
        j["synthetic"] = {{"n", data.n},
                          {"d", data.d},
                          {"noise", data.noise},
                          {"link", data.link}};
    } else {
        j["csv"] = data.csv_path;
        j["target_col"] = data.target_col;
        j["has_header"] = data.has_header;
    }
    return j;
}

json refresh_echo(const ckks::RefreshReport& report) {
    std::vector<int> iterations;
    for (const auto& [iter, label] : report.refresh_events) iterations.push_back(iter);
    return json{{"levels_per_iteration", report.levels_per_iteration},
                {"initial_levels", report.initial_levels},
                {"total_refreshes", report.total_refreshes()},
                {"total_mults", report.total_mults},
                {"refresh_iterations", iterations}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_trace_csv(const fs::path& path,
                     const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& traces) {
    std::string text = "iteration";
    for (const auto& n : names) text += "," + n;
    text += "\n";
    size_t rows = 0;
    for (const auto& t : traces) rows = std::max(rows, t.size());
    for (size_t i = 0; i < rows; ++i) {
        text += std::to_string(i + 1);
        for (const auto& t : traces) {
            text += ",";
            if (i < t.size()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", t[i]);
                text += buf;
            }
        }
        text += "\n";
    }
    write_text(path, text);
}

struct Run {
    TrainedModel model;
    std::optional<ckks::RefreshReport> refresh;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double wall_seconds = 0.0;
};

Run run_training(Algorithm algo, bool normalize_targets, bool encrypted,
                 const TrainConfig& base_cfg, const HeFlags& he,
                 const Matrix& raw, const Vector& y, const SplitSpec& split_spec) {
    const SplitIndices idx = split_indices(raw.rows(), split_spec);
    auto gather = [&](const std::vector<Eigen::Index>& which) {
        Matrix xs(static_cast<Eigen::Index>(which.size()), raw.cols());
        Vector ys(static_cast<Eigen::Index>(which.size()));
        for (size_t i = 0; i < which.size(); ++i) {
            xs.row(static_cast<Eigen::Index>(i)) = raw.row(which[i]);
            ys[static_cast<Eigen::Index>(i)] = y[which[i]];
        }
        return std::make_pair(xs, ys);
    };
    const auto [train_raw, train_y] = gather(idx.train);
    const auto [test_raw, test_y] = gather(idx.test);

    auto [scaled, fs0] = minmax_scale_features(train_raw, -1.0, 1.0);
    const Dataset ds = make_dataset(scaled, train_y, {-1.0, 1.0});

    TrainConfig cfg = base_cfg;
    cfg.algorithm = algo;

    Run run;
    const auto t0 = std::chrono::steady_clock::now();
    if (encrypted) {
        auto [model, report] =
            train_encrypted(ds, cfg, he.params(), normalize_targets, &fs0);
        run.model = std::move(model);
        run.refresh = std::move(report);
    } else {
        switch (algo) {
            case Algorithm::linear:
                run.model = train_linear(ds, cfg, normalize_targets, &fs0);
                break;
            case Algorithm::ridge:
                run.model = train_ridge(ds, cfg, &fs0);
                break;
            case Algorithm::lffr:
                run.model = train_lffr(ds, cfg, &fs0);
                break;
            case Algorithm::improved_lffr:
                run.model = train_improved_lffr(ds, cfg, &fs0);
                break;
        }
    }
    run.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.train_mse = mse(predict_many(run.model, train_raw), train_y);
    run.test_mse = mse(predict_many(run.model, test_raw), test_y);
    return run;
}

int cmd_train(const DataFlags& data, const HeFlags& he, const TrainConfig& cfg,
              Algorithm algo, bool normalize_targets, bool encrypted,
              std::uint64_t seed, double test_fraction, const std::string& out_flag) {
    const auto [raw, y] = resolve_data(data, seed);
    if (raw.rows() < 2)
        throw std::runtime_error("need at least 2 samples to split and train");

    const Run run = run_training(algo, normalize_targets, encrypted, cfg, he,
                                 raw, y, SplitSpec{test_fraction, seed});

    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);

    const json model_doc = model_to_json(run.model);
    write_text(out_dir / "model.json", model_doc.dump(2) + "\n");

    json report;
    report["command"] = "train";
    report["config"] = {{"algo", algorithm_name(algo)},
                        {"normalize_targets", normalize_targets},
                        {"iters", cfg.iterations},
                        {"gamma", cfg.gamma},
                        {"lambda", cfg.lambda},
                        {"sigmoid", cfg.sigmoid_kind == SigmoidKind::poly3 ? "poly3" : "exact"},
                        {"encrypted", encrypted},
                        {"seed", seed},
                        {"test_fraction", test_fraction},
                        {"data", data_echo(data)}};
    if (encrypted) {
        report["config"]["he"] = {{"log_n", he.log_n},
                                  {"log_q", he.log_q},
                                  {"log_p", he.log_p},
                                  {"slots", he.params().slots}};
        report["refresh"] = refresh_echo(*run.refresh);
    }
    report["train_mse"] = run.train_mse;
    report["test_mse"] = run.test_mse;
    report["wall_seconds"] = run.wall_seconds;
    report["trace"] = run.model.trace;
    report["model"] = model_doc;
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    write_trace_csv(out_dir / "trace.csv", {algorithm_name(algo)}, {run.model.trace});

    std::cout << "trained " << algorithm_name(algo) << (encrypted ? " (encrypted)" : "")
              << ": train MSE " << run.train_mse << ", test MSE " << run.test_mse;
    if (run.refresh) std::cout << ", refreshes " << run.refresh->total_refreshes();
    std::cout << "\nwrote " << (out_dir / "model.json").string() << ", "
              << (out_dir / "report.json").string() << ", "
              << (out_dir / "trace.csv").string() << "\n";
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const DataFlags& data,
                const std::string& out_flag) {
    std::ifstream in(model_path);
    if (!in) throw std::runtime_error("cannot open model file " + model_path);
    json doc = json::parse(in);
    const TrainedModel model = model_from_json(doc);

    Matrix feats;
    if (data.target_col >= 0) {
        auto [x, y] = load_csv(data.csv_path, data.has_header, data.target_col);
        feats = std::move(x);
    } else {
        // no target column to drop: parse every column as a feature
        auto [x, y] = load_csv(data.csv_path, data.has_header, 0);
        if (x.rows() > 0) {
            feats.resize(x.rows(), x.cols() + 1);
            feats.col(0) = y;
            feats.rightCols(x.cols()) = x;
        }
    }

    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);
    const fs::path out_path = out_dir / "predictions.csv";

    if (feats.rows() == 0) {
        write_text(out_path, "");
        std::cout << "wrote " << out_path.string() << " (0 rows)\n";
        return kExitOk;
    }
    if (feats.cols() != model.feature_scaler.n_features())
        throw std::runtime_error(
            "schema error: CSV has " + std::to_string(feats.cols()) +
            " feature columns but the model expects " +
            std::to_string(model.feature_scaler.n_features()));

    const Vector preds = predict_many(model, feats);
    std::string text;
    for (Eigen::Index i = 0; i < preds.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g\n", preds[i]);
        text += buf;
    }
    write_text(out_path, text);
    std::cout << "wrote " << out_path.string() << " (" << preds.size() << " rows)\n";
    return kExitOk;
}

int cmd_bench(const DataFlags& data, const HeFlags& he, const TrainConfig& cfg,
              bool encrypted, std::uint64_t seed, double test_fraction,
              const std::string& out_flag) {
    const auto [raw, y] = resolve_data(data, seed);
    if (raw.rows() < 2)
        throw std::runtime_error("need at least 2 samples to split and bench");
    const SplitSpec split_spec{test_fraction, seed};

    struct Entry {
        std::string name;
        Algorithm algo;
        bool normalize;
        bool enc;
    };
    std::vector<Entry> entries = {
        {"lffr", Algorithm::lffr, false, false},
        {"improved-lffr", Algorithm::improved_lffr, false, false},
        {"linear", Algorithm::linear, false, false},
        {"linear-ynorm", Algorithm::linear, true, false},
    };
    if (encrypted) {
        entries.push_back({"enc-lffr", Algorithm::lffr, false, true});
        entries.push_back({"enc-improved-lffr", Algorithm::improved_lffr, false, true});
        entries.push_back({"enc-linear-ynorm", Algorithm::linear, true, true});
    }

    json rows = json::array();
    std::string csv = "algorithm,train_mse,test_mse,wall_seconds,refreshes,total_mults\n";
    std::vector<std::string> names;
    std::vector<std::vector<double>> traces;
    for (const Entry& e : entries) {
        const Run run = run_training(e.algo, e.normalize, e.enc, cfg, he, raw, y,
                                     split_spec);
        json row = {{"algorithm", e.name},
                    {"train_mse", run.train_mse},
                    {"test_mse", run.test_mse},
                    {"wall_seconds", run.wall_seconds},
                    {"iterations", cfg.iterations}};
        csv += e.name + "," + std::to_string(run.train_mse) + "," +
               std::to_string(run.test_mse) + "," + std::to_string(run.wall_seconds);
        if (run.refresh) {
            row["refresh"] = refresh_echo(*run.refresh);
            csv += "," + std::to_string(run.refresh->total_refreshes()) + "," +
                   std::to_string(run.refresh->total_mults);
        } else {
            csv += ",,";
        }
        csv += "\n";
        rows.push_back(row);
        names.push_back(e.name);
        traces.push_back(run.model.trace);
        std::cout << e.name << ": train MSE " << run.train_mse << ", test MSE "
                  << run.test_mse << "\n";
    }

    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);
    json report;
    report["command"] = "bench";
    report["config"] = {{"iters", cfg.iterations},
                        {"encrypted", encrypted},
                        {"seed", seed},
                        {"test_fraction", test_fraction},
                        {"data", data_echo(data)}};
    report["results"] = rows;
    write_text(out_dir / "bench.json", report.dump(2) + "\n");
    write_text(out_dir / "bench.csv", csv);
    write_trace_csv(out_dir / "bench_traces.csv", names, traces);
    std::cout << "wrote " << (out_dir / "bench.json").string() << ", "
              << (out_dir / "bench.csv").string() << ", "
              << (out_dir / "bench_traces.csv").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixed-Hessian regression training, in the clear or through a "
                 "CKKS-semantics ciphertext simulator"};
    app.require_subcommand(1);
    app.set_config("--config");

    DataFlags data;
    HeFlags he;
    std::string algo_name = "linear";
    std::string sigmoid_name = "exact";
    std::string out_dir;
    std::string model_path;
    bool normalize_targets = false;
    bool encrypted = false;
    int iters = 30;
    double lambda = 0.0;
    double gamma = 0.5;
    double test_fraction = 0.2;
    std::uint64_t seed = 113;

    CLI::App* train = app.add_subcommand("train", "fit a model and write model/report/trace files");
    train->add_option("--algo", algo_name, "linear | ridge | lffr | improved-lffr")
        ->required()
        ->check(CLI::IsMember({"linear", "ridge", "lffr", "improved-lffr"}));
    train->add_flag("--normalize-targets", normalize_targets,
                    "unit-scale targets before linear training");
    auto* lambda_opt = train->add_option("--lambda", lambda, "ridge penalty");
    train->add_option("--gamma", gamma, "improved-lffr window width in (0,1)");
    train->add_option("--iters", iters, "iteration count");
    train->add_option("--sigmoid", sigmoid_name, "exact | poly3")
        ->check(CLI::IsMember({"exact", "poly3"}));
    train->add_flag("--encrypted", encrypted, "train through the ciphertext simulator");
    add_he_flags(train, he);
    add_data_flags(train, data);
    train->add_option("--seed", seed, "seed for split and synthetic data");
    train->add_option("--test-fraction", test_fraction, "held-out fraction");
    train->add_option("--out-dir", out_dir, "output directory (or FHE_REGRESS_OUT)");

    CLI::App* predict_cmd = app.add_subcommand("predict", "apply a saved model to a CSV");
    predict_cmd->add_option("--model", model_path, "model.json path")->required();
    predict_cmd->add_option("--csv", data.csv_path, "input CSV")->required();
    predict_cmd->add_flag("--has-header", data.has_header, "skip the first CSV line");
    predict_cmd->add_option("--target-col", data.target_col,
                            "column to drop before predicting");
    predict_cmd->add_option("--out-dir", out_dir, "output directory");

    CLI::App* bench = app.add_subcommand(
        "bench", "compare lffr, improved-lffr, linear, and linear-ynorm on one split");
    bench->add_option("--iters", iters, "iteration count");
    bench->add_flag("--encrypted", encrypted, "also run the encrypted twins");
    add_he_flags(bench, he);
    add_data_flags(bench, data);
    bench->add_option("--seed", seed, "seed for split and synthetic data");
    bench->add_option("--test-fraction", test_fraction, "held-out fraction");
    bench->add_option("--out-dir", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const bool have_source = data.synthetic || !data.csv_path.empty();
        if ((train->parsed() || bench->parsed()) && !have_source) {
            std::cerr << "usage error: provide --csv or --synthetic\n";
            return kExitUsage;
        }
        if ((train->parsed() || bench->parsed()) && !data.synthetic &&
            data.target_col < 0) {
            std::cerr << "usage error: --csv requires --target-col\n";
            return kExitUsage;
        }

        if (train->parsed()) {
            const Algorithm algo = algorithm_from_name(algo_name);
            if (algo == Algorithm::ridge && lambda_opt->count() == 0) {
                std::cerr << "usage error: --algo ridge requires --lambda\n";
                return kExitUsage;
            }
            if (algo == Algorithm::ridge && encrypted) {
                std::cerr << "usage error: --encrypted supports linear, lffr, and "
                             "improved-lffr only\n";
                return kExitUsage;
            }
            TrainConfig cfg;
            cfg.algorithm = algo;
            cfg.iterations = iters;
            cfg.lambda = lambda;
            cfg.gamma = gamma;
            cfg.sigmoid_kind =
                sigmoid_name == "poly3" ? SigmoidKind::poly3 : SigmoidKind::exact;
            return cmd_train(data, he, cfg, algo, normalize_targets, encrypted,
                             seed, test_fraction, out_dir);
        }
        if (predict_cmd->parsed()) return cmd_predict(model_path, data, out_dir);
        if (bench->parsed()) {
            TrainConfig cfg;
            cfg.iterations = iters;
            return cmd_bench(data, he, cfg, encrypted, seed, test_fraction, out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
