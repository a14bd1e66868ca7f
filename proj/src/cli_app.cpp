#include "mlsvm/cli_app.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlsvm/bench.hpp"
#include "mlsvm/synth.hpp"

namespace mlsvm {

namespace {

struct CommonOpts {
    std::string data;
    std::string format = "sparse";
    std::string mode = "multilevel";
    std::uint64_t seed = 0;
    int reps = 20;
    int k = 10;
    double q = 0.5;
    double eta = 2.0;
    int caliber = 2;
    std::size_t stop_size = 500;
    std::size_t q_dt = 4000;
    std::string ud_c_range = "-5:15";
    std::string ud_g_range = "-15:3";
    int folds = 5;
    double tol = 1e-3;
    std::string coarse_edges = "knn";
    bool neighbor_expand = false;
    bool volume_weighting = false;
    int threads = 0;
    std::string out = "mlsvm_run";
};

std::pair<double, double> parse_range(const std::string& s, const std::string& flag) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError(flag, "expected LO:HI");
    try {
        const double lo = std::stod(s.substr(0, colon));
        const double hi = std::stod(s.substr(colon + 1));
        if (!(hi > lo)) throw CLI::ValidationError(flag, "range must satisfy LO < HI");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError(flag, "expected numeric LO:HI");
    }
}

DataFormat parse_format(const std::string& s) {
    if (s == "sparse" || s == "svm" || s == "sparse-svm-text") return DataFormat::SparseSvmText;
    if (s == "csv") return DataFormat::Csv;
    throw CLI::ValidationError("--format", "expected 'sparse' or 'csv'");
}

MultilevelConfig build_config(const CommonOpts& o) {
    MultilevelConfig cfg;
    cfg.knn_k = o.k;
    cfg.coupling_threshold = o.q;
    cfg.outlier_factor = o.eta;
    cfg.caliber = o.caliber;
    cfg.stop_size = o.stop_size;
    cfg.q_dt = o.q_dt;
    cfg.folds = o.folds;
    cfg.tol = o.tol;
    cfg.ud.stage1_runs = 9;
    cfg.ud.stage2_runs = 5;
    std::tie(cfg.ud.log2c_lo, cfg.ud.log2c_hi) = parse_range(o.ud_c_range, "--ud-c-range");
    std::tie(cfg.ud.log2g_lo, cfg.ud.log2g_hi) = parse_range(o.ud_g_range, "--ud-g-range");
    if (o.coarse_edges == "knn")
        cfg.coarse_edges = CoarseEdges::Knn;
    else if (o.coarse_edges == "algebraic")
        cfg.coarse_edges = CoarseEdges::Algebraic;
    else
        throw CLI::ValidationError("--coarse-edges", "expected 'knn' or 'algebraic'");
    cfg.neighbor_expand = o.neighbor_expand;
    cfg.volume_weighting = o.volume_weighting;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    return cfg;
}

std::vector<std::pair<std::string, std::string>> config_header(const CommonOpts& o) {
    auto b = [](bool v) { return v ? std::string("true") : std::string("false"); };
    return {
        {"data", o.data},
        {"format", o.format},
        {"mode", o.mode},
        {"seed", std::to_string(o.seed)},
        {"reps", std::to_string(o.reps)},
        {"k", std::to_string(o.k)},
        {"Q", std::to_string(o.q)},
        {"eta", std::to_string(o.eta)},
        {"R", std::to_string(o.caliber)},
        {"stop_size", std::to_string(o.stop_size)},
        {"qdt", std::to_string(o.q_dt)},
        {"ud_c_range", o.ud_c_range},
        {"ud_g_range", o.ud_g_range},
        {"folds", std::to_string(o.folds)},
        {"tol", std::to_string(o.tol)},
        {"coarse_edges", o.coarse_edges},
        {"neighbor_expand", b(o.neighbor_expand)},
        {"volume_weighting", b(o.volume_weighting)},
        {"threads", std::to_string(o.threads)},
        {"out", o.out},
    };
}

void add_common_options(CLI::App* cmd, CommonOpts& o, bool with_data) {
    if (with_data) {
        cmd->add_option("--data", o.data, "input dataset file");
        cmd->add_option("--format", o.format, "dataset format: sparse | csv");
    }
    cmd->add_option("--mode", o.mode, "multilevel | flat (benchmark also: both)");
    cmd->add_option("--seed", o.seed, "base random seed");
    cmd->add_option("--reps", o.reps, "benchmark repetitions");
    cmd->add_option("--k", o.k, "k-NN neighbor count");
    cmd->add_option("--Q", o.q, "seed coupling threshold");
    cmd->add_option("--eta", o.eta, "future-volume outlier factor");
    cmd->add_option("--R", o.caliber, "interpolation caliber");
    cmd->add_option("--stop-size", o.stop_size, "coarsest-level size threshold");
    cmd->add_option("--qdt", o.q_dt, "training-size bound for parameter refinement");
    cmd->add_option("--ud-c-range", o.ud_c_range, "log2 C search range LO:HI");
    cmd->add_option("--ud-g-range", o.ud_g_range, "log2 gamma search range LO:HI");
    cmd->add_option("--folds", o.folds, "cross-validation folds");
    cmd->add_option("--tol", o.tol, "solver KKT tolerance");
    cmd->add_option("--coarse-edges", o.coarse_edges, "coarse graph edges: knn | algebraic");
    cmd->add_flag("--neighbor-expand", o.neighbor_expand,
                  "expand refinement sets by fine-level neighborhoods");
    cmd->add_flag("--volume-weighting", o.volume_weighting,
                  "weight coarse points by aggregate volume");
    cmd->add_option("--threads", o.threads, "worker threads (0 = auto)");
    cmd->add_option("--out", o.out, "output path or prefix");
    cmd->add_option("--config", "key = value configuration file (flags take precedence)")
        ->type_name("FILE");
    // later occurrences win, so config-file values can be overridden by flags
    for (auto* opt : cmd->get_options())
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Expands `key = value` lines of a config file into --key=value tokens that
// are parsed before the explicit command-line flags.
std::vector<std::string> load_config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": expected `key = value`");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
        out.push_back("--" + key + "=" + value);
    }
    return out;
}

// Splices config-file tokens in right after the subcommand name.
std::vector<std::string> expand_config(const std::vector<std::string>& args, int& rc) {
    rc = 0;
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config_path.empty()) return rest;
    if (!std::filesystem::exists(config_path)) {
        std::cerr << "error: file not found: " << config_path << "\n";
        rc = 2;
        return rest;
    }
    const auto extra = load_config_args(config_path);
    std::vector<std::string> out;
    out.reserve(rest.size() + extra.size());
    if (!rest.empty()) out.push_back(rest[0]);  // subcommand
    out.insert(out.end(), extra.begin(), extra.end());
    if (rest.size() > 1) out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

int require_file(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        std::cerr << "error: file not found: " << path << "\n";
        return 2;
    }
    return 0;
}

int cmd_train(const CommonOpts& o) {
    if (o.data.empty()) {
        std::cerr << "error: --data is required\n";
        return 2;
    }
    if (int rc = require_file(o.data)) return rc;
    const Dataset full = load_dataset(o.data, parse_format(o.format));
    const MultilevelConfig cfg = build_config(o);
    const bool flat = o.mode == "flat";
    if (!flat && o.mode != "multilevel") {
        std::cerr << "error: --mode must be multilevel or flat\n";
        return 1;
    }
    const MultilevelResult res = flat ? train_flat(full, cfg) : train_multilevel(full, cfg);
    save_model(res.model, o.out + ".model");
    std::ofstream rep(o.out + ".report.csv");
    if (!rep) throw IoError("cannot write " + o.out + ".report.csv");
    write_report_csv(res.report, rep, config_header(o));
    std::cout << "model: " << o.out << ".model\nreport: " << o.out << ".report.csv\n";
    const auto& last = res.report.back();
    std::cout << "levels=" << res.report.size() << " n_sv=" << last.n_sv
              << " kappa_val=" << last.kappa_val << "\n";
    return 0;
}

int cmd_predict(const CommonOpts& o, const std::string& model_path) {
    if (int rc = require_file(model_path)) return rc;
    if (o.data.empty()) {
        std::cerr << "error: --data is required\n";
        return 2;
    }
    if (int rc = require_file(o.data)) return rc;
    TrainedModel model;
    try {
        model = load_model(model_path);
    } catch (const ParseError& e) {
        std::cerr << "error: corrupt model file: " << e.what() << "\n";
        return 3;
    }
    const Dataset ds = load_dataset(o.data, parse_format(o.format));
    if (ds.n_features() > model.n_features) {
        std::cerr << "error: data has " << ds.n_features() << " features, model expects "
                  << model.n_features << "\n";
        return 1;
    }
    std::vector<int> pred(ds.n());
    std::vector<double> x(static_cast<std::size_t>(model.n_features), 0.0);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        std::fill(x.begin(), x.end(), 0.0);
        for (const auto& e : ds.row(i)) x[static_cast<std::size_t>(e.index)] = e.value;
        pred[i] = model.predict(x);
    }
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (o.out != "-" && o.out != "mlsvm_run") {
        file.open(o.out);
        if (!file) throw IoError("cannot write " + o.out);
        out = &file;
    }
    for (int p : pred) *out << p << '\n';
    if (ds.has_labels())
        std::cout << format_metrics(compute_metrics(pred, ds.labels())) << "\n";
    return 0;
}

int cmd_benchmark(const CommonOpts& o, const std::string& list_path,
                  const std::string& sweep_r) {
    if (int rc = require_file(list_path)) return rc;
    // list file: one `name path format` per line, # comments
    std::vector<BenchDataset> datasets;
    {
        std::ifstream in(list_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto pos = line.find('#');
            if (pos != std::string::npos) line = line.substr(0, pos);
            std::istringstream ss(line);
            std::string name, path, fmt;
            if (!(ss >> name >> path)) continue;
            if (!(ss >> fmt)) fmt = "sparse";
            if (int rc = require_file(path)) return rc;
            datasets.push_back({name, load_dataset(path, parse_format(fmt))});
        }
    }
    if (datasets.empty()) {
        std::cerr << "error: dataset list is empty: " << list_path << "\n";
        return 2;
    }
    const MultilevelConfig cfg = build_config(o);
    BenchPlan plan;
    plan.reps = o.reps;
    plan.base_seed = o.seed;
    plan.progress = &std::cout;
    if (!sweep_r.empty()) {
        plan.modes = {RunMode::Multilevel};
        std::istringstream ss(sweep_r);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) plan.sweep_calibers.push_back(std::stoi(tok));
        if (plan.sweep_calibers.empty()) {
            std::cerr << "error: --sweep-R needs a comma-separated list\n";
            return 1;
        }
    } else if (o.mode == "multilevel") {
        plan.modes = {RunMode::Multilevel};
    } else if (o.mode == "flat") {
        plan.modes = {RunMode::Flat};
    } else if (o.mode == "both") {
        plan.modes = {RunMode::Multilevel, RunMode::Flat};
    } else {
        std::cerr << "error: benchmark --mode must be multilevel, flat or both\n";
        return 1;
    }

    std::vector<std::string> errors;
    const auto raw = run_benchmark(datasets, cfg, plan, &errors);
    for (const auto& e : errors) std::cerr << "run failed: " << e << "\n";

    const auto header = config_header(o);
    std::ofstream raw_out(o.out + ".raw.csv");
    if (!raw_out) throw IoError("cannot write " + o.out + ".raw.csv");
    write_raw_csv(raw, raw_out, header);
    std::ofstream agg_out(o.out + ".agg.csv");
    if (!agg_out) throw IoError("cannot write " + o.out + ".agg.csv");
    write_agg_csv(aggregate_rows(raw), agg_out, header);
    std::cout << "raw: " << o.out << ".raw.csv\naggregate: " << o.out << ".agg.csv\n";
    return errors.empty() ? 0 : 1;
}

int cmd_gen(const std::string& dist, std::size_t n, int dim, double separation,
            double minority_fraction, std::uint64_t seed, const std::string& out) {
    Dataset ds;
    if (dist == "ringnorm")
        ds = gen_ringnorm(n, dim, seed);
    else if (dist == "twonorm")
        ds = gen_twonorm(n, dim, seed);
    else if (dist == "threenorm")
        ds = gen_threenorm(n, dim, seed);
    else if (dist == "gauss2")
        ds = gen_two_gaussians(n, dim, separation, minority_fraction, seed);
    else {
        std::cerr << "error: unknown distribution '" << dist << "'\n";
        return 1;
    }
    save_dataset_sparse(ds, out);
    std::cout << "wrote " << out << " (n=" << ds.n() << " d=" << ds.n_features()
              << " n_plus=" << ds.n_plus() << " n_minus=" << ds.n_minus() << ")\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"multilevel weighted SVM trainer"};
    app.require_subcommand(1);

    CommonOpts train_o, pred_o, bench_o;
    std::string model_path, list_path, sweep_r;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model and write it with a per-level report");
    add_common_options(train_cmd, train_o, true);

    CLI::App* pred_cmd = app.add_subcommand("predict", "predict labels with a trained model");
    pred_cmd->add_option("--model", model_path, "model file")->required();
    add_common_options(pred_cmd, pred_o, true);

    CLI::App* bench_cmd =
        app.add_subcommand("benchmark", "dataset x mode x repetition benchmark sweep");
    bench_cmd->add_option("--list", list_path, "dataset list file: `name path format` lines")
        ->required();
    bench_cmd->add_option("--sweep-R", sweep_r, "comma-separated caliber sweep, e.g. 1,2,4,6,8,10");
    add_common_options(bench_cmd, bench_o, false);
    bench_o.mode = "both";

    std::string dist = "ringnorm", gen_out = "synthetic.svm";
    std::size_t gen_n = 7400;
    int gen_dim = 20;
    double gen_sep = 3.0, gen_minfrac = 0.5;
    std::uint64_t gen_seed = 0;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic benchmark dataset");
    gen_cmd->add_option("--dist", dist, "ringnorm | twonorm | threenorm | gauss2");
    gen_cmd->add_option("--n", gen_n, "sample count");
    gen_cmd->add_option("--dim", gen_dim, "feature count");
    gen_cmd->add_option("--separation", gen_sep, "gauss2 mean separation");
    gen_cmd->add_option("--minority-fraction", gen_minfrac, "gauss2 positive-class fraction");
    gen_cmd->add_option("--seed", gen_seed, "random seed");
    gen_cmd->add_option("--out", gen_out, "output file (sparse text format)");

    int rc = 0;
    std::vector<std::string> argv;
    try {
        argv = expand_config(args, rc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (rc != 0) return rc;
    try {
        app.parse(std::vector<std::string>(argv.rbegin(), argv.rend()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_o);
        if (pred_cmd->parsed()) return cmd_predict(pred_o, model_path);
        if (bench_cmd->parsed()) return cmd_benchmark(bench_o, list_path, sweep_r);
        if (gen_cmd->parsed())
            return cmd_gen(dist, gen_n, gen_dim, gen_sep, gen_minfrac, gen_seed, gen_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace mlsvm
