#include "mlsvm/bench.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>

namespace mlsvm {

RunResult run_once(const Dataset& full, RunMode mode, const MultilevelConfig& cfg,
                   double test_fraction, std::uint64_t split_seed, NormalizationMode norm) {
    auto [train_ds, test_ds] = stratified_split(full, test_fraction, split_seed);
    auto [train_norm, params] = normalize_features(train_ds, norm);
    const Dataset test_norm = apply_normalization(test_ds, params);

    const auto t0 = std::chrono::steady_clock::now();
    MultilevelResult res = mode == RunMode::Multilevel ? train_multilevel(train_norm, cfg)
                                                       : train_flat(train_norm, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunResult out;
    out.metrics = predict_final(res.model, test_norm);
    out.seconds = secs;
    out.detail = std::move(res);
    return out;
}

std::vector<AggRow> aggregate_rows(const std::vector<RawRow>& raw) {
    std::vector<AggRow> out;
    std::map<std::tuple<std::string, std::string, int>, std::size_t> slot;
    for (const auto& r : raw) {
        const auto key = std::make_tuple(r.dataset, r.mode, r.caliber);
        auto it = slot.find(key);
        if (it == slot.end()) {
            slot.emplace(key, out.size());
            AggRow a;
            a.dataset = r.dataset;
            a.mode = r.mode;
            a.caliber = r.caliber;
            out.push_back(a);
            it = slot.find(key);
        }
        AggRow& a = out[it->second];
        ++a.reps;
        a.acc += r.metrics.acc;
        a.sn += r.metrics.sn;
        a.sp += r.metrics.sp;
        a.kappa += r.metrics.kappa;
        a.seconds += r.seconds;
    }
    for (auto& a : out) {
        const double n = a.reps > 0 ? static_cast<double>(a.reps) : 1.0;
        a.acc /= n;
        a.sn /= n;
        a.sp /= n;
        a.kappa /= n;
        a.seconds /= n;
    }
    return out;
}

namespace {

// RFC 4180: quote fields containing commas, quotes or newlines
std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_header(std::ostream& out,
                  const std::vector<std::pair<std::string, std::string>>& header) {
    for (const auto& [k, v] : header) out << "# " << k << " = " << v << '\n';
}

}  // namespace

void write_raw_csv(const std::vector<RawRow>& rows, std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& header) {
    write_header(out, header);
    out << "dataset,mode,R,rep,acc,sn,sp,kappa,seconds\n";
    char buf[192];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), ",%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                      r.mode.c_str(), r.caliber, r.rep, r.metrics.acc, r.metrics.sn,
                      r.metrics.sp, r.metrics.kappa, r.seconds);
        out << csv_escape(r.dataset) << buf;
    }
}

void write_agg_csv(const std::vector<AggRow>& rows, std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& header) {
    write_header(out, header);
    out << "dataset,mode,R,reps,acc,sn,sp,kappa,seconds\n";
    char buf[192];
    for (const auto& a : rows) {
        std::snprintf(buf, sizeof(buf), ",%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                      a.mode.c_str(), a.caliber, a.reps, a.acc, a.sn, a.sp, a.kappa,
                      a.seconds);
        out << csv_escape(a.dataset) << buf;
    }
}

std::vector<RawRow> run_benchmark(const std::vector<BenchDataset>& datasets,
                                  const MultilevelConfig& cfg, const BenchPlan& plan,
                                  std::vector<std::string>* errors) {
    std::vector<RawRow> rows;
    std::vector<int> calibers = plan.sweep_calibers;
    if (calibers.empty()) calibers.push_back(cfg.caliber);
    for (const auto& bd : datasets) {
        for (RunMode mode : plan.modes) {
            for (int caliber : calibers) {
                for (int rep = 0; rep < plan.reps; ++rep) {
                    MultilevelConfig run_cfg = cfg;
                    run_cfg.caliber = caliber;
                    run_cfg.seed = plan.base_seed + static_cast<std::uint64_t>(rep);
                    try {
                        const RunResult rr =
                            run_once(bd.data, mode, run_cfg, plan.test_fraction,
                                     run_cfg.seed, plan.norm);
                        RawRow row;
                        row.dataset = bd.name;
                        row.mode = run_mode_name(mode);
                        row.caliber = caliber;
                        row.rep = rep;
                        row.metrics = rr.metrics;
                        row.seconds = rr.seconds;
                        rows.push_back(row);
                        if (plan.progress)
                            *plan.progress
                                << bd.name << ' ' << row.mode << " R=" << caliber
                                << " rep=" << rep << " kappa=" << rr.metrics.kappa
                                << " time=" << rr.seconds << "s\n";
                    } catch (const std::exception& e) {
                        if (errors)
                            errors->push_back(bd.name + "/" + run_mode_name(mode) +
                                              "/rep" + std::to_string(rep) + ": " +
                                              e.what());
                    }
                }
            }
        }
    }
    return rows;
}

}  // namespace mlsvm
