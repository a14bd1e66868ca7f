#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mlsvm/bench.hpp"
#include "mlsvm/multilevel.hpp"
#include "mlsvm/synth.hpp"

namespace py = pybind11;
using namespace mlsvm;

namespace {

Dataset dataset_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                           py::array_t<double, py::array::c_style | py::array::forcecast> y) {
    if (x.ndim() != 2) throw DomainError("X must be a 2-d array");
    if (y.ndim() != 1 || y.shape(0) != x.shape(0))
        throw DomainError("y must be 1-d with one label per row of X");
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto d = static_cast<std::size_t>(x.shape(1));
    auto xr = x.unchecked<2>();
    auto yr = y.unchecked<1>();
    std::vector<SparseRow> rows(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = xr(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j));
            if (v != 0.0) rows[i].push_back({static_cast<int>(j), v});
        }
        const double lv = yr(static_cast<py::ssize_t>(i));
        if (lv != 1.0 && lv != -1.0) throw DomainError("labels must be +1 or -1");
        labels[i] = lv > 0 ? +1 : -1;
    }
    return Dataset(std::move(rows), std::move(labels), static_cast<int>(d));
}

py::array_t<double> dataset_features(const Dataset& ds) {
    const Matrix m = ds.to_dense();
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

py::array_t<int> dataset_labels(const Dataset& ds) {
    py::array_t<int> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(ds.n())});
    int* w = out.mutable_data();
    for (std::size_t i = 0; i < ds.n(); ++i) w[i] = ds.label(i);
    return out;
}

Matrix matrix_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> x) {
    if (x.ndim() != 2) throw DomainError("X must be a 2-d array");
    Matrix m(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
    std::copy(x.data(), x.data() + m.rows * m.cols, m.data.begin());
    return m;
}

py::array_t<double> model_decision_values(const TrainedModel& m, py::array_t<double> x) {
    const Matrix pts = matrix_from_numpy(std::move(x));
    py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(pts.rows)});
    double* w = out.mutable_data();
    for (std::size_t i = 0; i < pts.rows; ++i) w[i] = m.decision_value(pts.row(i));
    return out;
}

py::array_t<int> model_predict(const TrainedModel& m, py::array_t<double> x) {
    const Matrix pts = matrix_from_numpy(std::move(x));
    py::array_t<int> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(pts.rows)});
    int* w = out.mutable_data();
    for (std::size_t i = 0; i < pts.rows; ++i) w[i] = m.predict(pts.row(i));
    return out;
}

DataFormat format_from_string(const std::string& s) {
    if (s == "sparse" || s == "svm") return DataFormat::SparseSvmText;
    if (s == "csv") return DataFormat::Csv;
    throw DomainError("format must be 'sparse' or 'csv'");
}

}  // namespace

PYBIND11_MODULE(_mlsvm, m) {
    m.doc() = "Multilevel weighted support vector machines";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<DomainError>(m, "DomainError");

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&dataset_from_numpy), py::arg("X"), py::arg("y"))
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("n_features", &Dataset::n_features)
        .def_property_readonly("n_plus", &Dataset::n_plus)
        .def_property_readonly("n_minus", &Dataset::n_minus)
        .def_property_readonly("imbalance_ratio", &Dataset::imbalance_ratio)
        .def_property_readonly("X", &dataset_features)
        .def_property_readonly("y", &dataset_labels)
        .def("__len__", &Dataset::n)
        .def("__repr__", [](const Dataset& ds) {
            std::ostringstream ss;
            ss << "Dataset(n=" << ds.n() << ", d=" << ds.n_features()
               << ", n_plus=" << ds.n_plus() << ", n_minus=" << ds.n_minus() << ")";
            return ss.str();
        });

    m.def("load_dataset",
          [](const std::string& path, const std::string& format, std::optional<int> label_column) {
              return load_dataset(path, format_from_string(format), label_column);
          },
          py::arg("path"), py::arg("format") = "sparse", py::arg("label_column") = std::nullopt);
    m.def("save_dataset", &save_dataset_sparse, py::arg("dataset"), py::arg("path"));

    m.def("gen_ringnorm", &gen_ringnorm, py::arg("n") = 7400, py::arg("d") = 20, py::arg("seed") = 0);
    m.def("gen_twonorm", &gen_twonorm, py::arg("n") = 7400, py::arg("d") = 20, py::arg("seed") = 0);
    m.def("gen_threenorm", &gen_threenorm, py::arg("n") = 7400, py::arg("d") = 20, py::arg("seed") = 0);
    m.def("gen_two_gaussians", &gen_two_gaussians, py::arg("n"), py::arg("d"),
          py::arg("separation"), py::arg("minority_fraction"), py::arg("seed") = 0,
          py::arg("sigma_plus") = 1.0, py::arg("sigma_minus") = 1.0);

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("tp", &Metrics::tp)
        .def_readonly("tn", &Metrics::tn)
        .def_readonly("fp", &Metrics::fp)
        .def_readonly("fn", &Metrics::fn)
        .def_readonly("sn", &Metrics::sn)
        .def_readonly("sp", &Metrics::sp)
        .def_readonly("acc", &Metrics::acc)
        .def_readonly("kappa", &Metrics::kappa)
        .def_readonly("sn_defined", &Metrics::sn_defined)
        .def_readonly("sp_defined", &Metrics::sp_defined)
        .def("__repr__", &format_metrics);

    m.def("compute_metrics", &compute_metrics, py::arg("predicted"), py::arg("actual"));

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double c_plus, double c_minus, double gamma) {
                 return ModelParams{c_plus, c_minus, gamma};
             }),
             py::arg("c_plus") = 1.0, py::arg("c_minus") = 1.0, py::arg("gamma") = 1.0)
        .def_readwrite("c_plus", &ModelParams::c_plus)
        .def_readwrite("c_minus", &ModelParams::c_minus)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream ss;
            ss << "ModelParams(c_plus=" << p.c_plus << ", c_minus=" << p.c_minus
               << ", gamma=" << p.gamma << ")";
            return ss.str();
        });

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_property_readonly("n_sv", [](const TrainedModel& t) { return t.dual_coefs.size(); })
        .def_readonly("bias", &TrainedModel::bias)
        .def_readonly("params", &TrainedModel::params)
        .def_readonly("n_features", &TrainedModel::n_features)
        .def_readonly("sv_indices", &TrainedModel::sv_indices)
        .def("predict", &model_predict, py::arg("X"))
        .def("decision_values", &model_decision_values, py::arg("X"))
        .def("save", [](const TrainedModel& t, const std::string& path) { save_model(t, path); },
             py::arg("path"));

    m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));

    m.def("train_wsvm",
          [](py::array_t<double> x, py::array_t<double> y, const ModelParams& params,
             std::optional<std::vector<double>> weights, double tol) {
              const Dataset ds = dataset_from_numpy(std::move(x), std::move(y));
              TrainOptions opts;
              opts.tol = tol;
              return train(ds.to_dense(), ds.labels(), weights.value_or(std::vector<double>{}),
                           params, opts);
          },
          py::arg("X"), py::arg("y"), py::arg("params") = ModelParams{},
          py::arg("instance_weights") = std::nullopt, py::arg("tol") = 1e-3);

    py::class_<SearchDomain>(m, "SearchDomain")
        .def(py::init<>())
        .def_readwrite("log2c_lo", &SearchDomain::log2c_lo)
        .def_readwrite("log2c_hi", &SearchDomain::log2c_hi)
        .def_readwrite("log2g_lo", &SearchDomain::log2g_lo)
        .def_readwrite("log2g_hi", &SearchDomain::log2g_hi)
        .def_readwrite("stage1_runs", &SearchDomain::stage1_runs)
        .def_readwrite("stage2_runs", &SearchDomain::stage2_runs);

    py::class_<MultilevelConfig>(m, "MultilevelConfig")
        .def(py::init<>())
        .def_readwrite("knn_k", &MultilevelConfig::knn_k)
        .def_readwrite("coupling_threshold", &MultilevelConfig::coupling_threshold)
        .def_readwrite("outlier_factor", &MultilevelConfig::outlier_factor)
        .def_readwrite("caliber", &MultilevelConfig::caliber)
        .def_readwrite("stop_size", &MultilevelConfig::stop_size)
        .def_readwrite("max_levels", &MultilevelConfig::max_levels)
        .def_readwrite("q_dt", &MultilevelConfig::q_dt)
        .def_readwrite("ud", &MultilevelConfig::ud)
        .def_readwrite("tol", &MultilevelConfig::tol)
        .def_readwrite("folds", &MultilevelConfig::folds)
        .def_readwrite("neighbor_expand", &MultilevelConfig::neighbor_expand)
        .def_readwrite("volume_weighting", &MultilevelConfig::volume_weighting)
        .def_readwrite("validation_fraction", &MultilevelConfig::validation_fraction)
        .def_readwrite("seed", &MultilevelConfig::seed)
        .def_readwrite("threads", &MultilevelConfig::threads);

    py::class_<LevelReportRow>(m, "LevelReportRow")
        .def_readonly("level", &LevelReportRow::level)
        .def_readonly("n_plus", &LevelReportRow::n_plus)
        .def_readonly("n_minus", &LevelReportRow::n_minus)
        .def_readonly("n_train", &LevelReportRow::n_train)
        .def_readonly("refined", &LevelReportRow::refined)
        .def_readonly("log2c_plus", &LevelReportRow::log2c_plus)
        .def_readonly("log2c_minus", &LevelReportRow::log2c_minus)
        .def_readonly("log2gamma", &LevelReportRow::log2gamma)
        .def_readonly("n_sv", &LevelReportRow::n_sv)
        .def_readonly("kappa_val", &LevelReportRow::kappa_val)
        .def_readonly("seconds", &LevelReportRow::seconds)
        .def("__repr__", [](const LevelReportRow& r) {
            std::ostringstream ss;
            ss << "LevelReportRow(level=" << r.level << ", n_train=" << r.n_train
               << ", refined=" << (r.refined ? "True" : "False") << ", n_sv=" << r.n_sv
               << ", kappa_val=" << r.kappa_val << ")";
            return ss.str();
        });

    py::class_<MultilevelResult>(m, "MultilevelResult")
        .def_readonly("model", &MultilevelResult::model)
        .def_readonly("params", &MultilevelResult::params)
        .def_readonly("report", &MultilevelResult::report)
        .def_readonly("sv_train_indices", &MultilevelResult::sv_train_indices);

    m.def("train_multilevel",
          [](const Dataset& ds, const MultilevelConfig& cfg) {
              py::gil_scoped_release release;
              return train_multilevel(ds, cfg);
          },
          py::arg("train"), py::arg("config") = MultilevelConfig{});
    m.def("train_flat",
          [](const Dataset& ds, const MultilevelConfig& cfg) {
              py::gil_scoped_release release;
              return train_flat(ds, cfg);
          },
          py::arg("train"), py::arg("config") = MultilevelConfig{});

    m.def("predict_final", &predict_final, py::arg("model"), py::arg("test"));

    m.def("stratified_split",
          [](const Dataset& ds, double test_fraction, std::uint64_t seed) {
              return stratified_split(ds, test_fraction, seed);
          },
          py::arg("dataset"), py::arg("test_fraction") = 0.2, py::arg("seed") = 0);

    m.def("normalize_features",
          [](const Dataset& ds, const std::string& mode) {
              NormalizationMode nm = NormalizationMode::None;
              if (mode == "minmax")
                  nm = NormalizationMode::MinMax;
              else if (mode == "zscore")
                  nm = NormalizationMode::ZScore;
              else if (mode != "none")
                  throw DomainError("mode must be none, minmax or zscore");
              auto [out, params] = normalize_features(ds, nm);
              return out;  // fitted on and applied to the same dataset
          },
          py::arg("dataset"), py::arg("mode") = "minmax");
}
