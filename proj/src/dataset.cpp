#include "mlsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mlsvm/rng.hpp"

namespace mlsvm {

namespace {

bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size() && std::isfinite(out);
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t\r\"");
        const auto e = f.find_last_not_of(" \t\r\"");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

[[noreturn]] void fail_line(const std::string& path, std::size_t lineno, const std::string& msg) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
}

// Maps raw label tokens onto {-1,+1}. Numeric label sets order numerically
// (so -1/+1 and 0/1 files keep their natural polarity), anything else
// lexicographically; the smaller value becomes -1. All-zero labels mean
// "unlabeled".
std::vector<int> normalize_labels(const std::vector<std::string>& raw,
                                  const std::string& path) {
    std::vector<double> nums(raw.size());
    bool all_numeric = true;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!parse_double(raw[i], nums[i])) {
            all_numeric = false;
            break;
        }
    }
    std::vector<int> out(raw.size());
    if (all_numeric) {
        std::vector<double> distinct;
        for (double v : nums)
            if (std::find(distinct.begin(), distinct.end(), v) == distinct.end())
                distinct.push_back(v);
        if (distinct.size() > 2)
            throw DomainError(path + ": more than two distinct labels");
        if (distinct.size() == 1 && distinct[0] == 0.0) {
            std::fill(out.begin(), out.end(), 0);
            return out;
        }
        if (distinct.size() == 1) {
            const int v = distinct[0] > 0 ? +1 : -1;
            std::fill(out.begin(), out.end(), v);
            return out;
        }
        const double lo = std::min(distinct[0], distinct[1]);
        for (std::size_t i = 0; i < nums.size(); ++i) out[i] = nums[i] == lo ? -1 : +1;
        return out;
    }
    std::vector<std::string> distinct;
    for (const auto& s : raw)
        if (std::find(distinct.begin(), distinct.end(), s) == distinct.end())
            distinct.push_back(s);
    if (distinct.size() > 2) throw DomainError(path + ": more than two distinct labels");
    if (distinct.size() == 1)
        throw DomainError(path + ": need two label values to assign classes");
    const std::string& lo = std::min(distinct[0], distinct[1]);
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] == lo ? -1 : +1;
    return out;
}

Dataset load_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<SparseRow> rows;
    std::vector<std::string> raw_labels;
    int max_index = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(strip_comment(line));
        if (toks.empty()) continue;
        raw_labels.push_back(toks[0]);
        SparseRow row;
        int prev_index = 0;
        for (std::size_t t = 1; t < toks.size(); ++t) {
            const auto colon = toks[t].find(':');
            if (colon == std::string::npos)
                fail_line(path, lineno, "expected <index>:<value>, got '" + toks[t] + "'");
            int idx = 0;
            const auto& tok = toks[t];
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
            if (ec != std::errc() || p != tok.data() + colon || idx < 1)
                fail_line(path, lineno, "bad feature index in '" + tok + "'");
            if (idx <= prev_index)
                fail_line(path, lineno, "feature indices must be ascending");
            double val = 0.0;
            if (!parse_double(tok.substr(colon + 1), val))
                fail_line(path, lineno, "bad feature value in '" + tok + "'");
            prev_index = idx;
            max_index = std::max(max_index, idx);
            if (val != 0.0) row.push_back({idx - 1, val});
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no rows");
    auto labels = normalize_labels(raw_labels, path);
    return Dataset(std::move(rows), std::move(labels), max_index);
}

Dataset load_csv(const std::string& path, std::optional<int> label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> records;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    std::vector<std::size_t> linenos;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = strip_comment(line);
        if (stripped.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv(stripped);
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            fail_line(path, lineno, "expected " + std::to_string(width) + " fields, got " +
                                        std::to_string(fields.size()));
        records.push_back(std::move(fields));
        linenos.push_back(lineno);
    }
    if (records.empty()) throw ParseError(path + ": no rows");
    const int label_col =
        label_column.has_value() ? *label_column : static_cast<int>(width) - 1;
    if (label_col < 0 || label_col >= static_cast<int>(width))
        throw DomainError(path + ": label column out of range");

    // header row: any non-label field that is not a number
    std::size_t first = 0;
    {
        double v;
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<int>(j) == label_col) continue;
            if (!parse_double(records[0][j], v)) {
                first = 1;
                break;
            }
        }
    }
    if (first >= records.size()) throw ParseError(path + ": no rows");

    std::vector<SparseRow> rows;
    std::vector<std::string> raw_labels;
    for (std::size_t r = first; r < records.size(); ++r) {
        SparseRow row;
        int fidx = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<int>(j) == label_col) continue;
            double v = 0.0;
            if (!parse_double(records[r][j], v))
                fail_line(path, linenos[r], "bad numeric value '" + records[r][j] + "'");
            if (v != 0.0) row.push_back({fidx, v});
            ++fidx;
        }
        rows.push_back(std::move(row));
        raw_labels.push_back(records[r][static_cast<std::size_t>(label_col)]);
    }
    auto labels = normalize_labels(raw_labels, path);
    return Dataset(std::move(rows), std::move(labels), static_cast<int>(width) - 1);
}

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

Dataset::Dataset(std::vector<SparseRow> rows, std::vector<int> labels, int n_features)
    : rows_(std::move(rows)), labels_(std::move(labels)), n_features_(n_features) {
    if (rows_.size() != labels_.size())
        throw DomainError("row/label count mismatch");
    for (const auto& r : rows_)
        for (const auto& e : r)
            if (!std::isfinite(e.value)) throw DomainError("non-finite feature value");
    recount();
}

void Dataset::recount() {
    n_plus_ = n_minus_ = 0;
    has_labels_ = !labels_.empty();
    for (int y : labels_) {
        if (y == +1)
            ++n_plus_;
        else if (y == -1)
            ++n_minus_;
        else
            has_labels_ = false;
    }
    if (!has_labels_) n_plus_ = n_minus_ = 0;
}

double Dataset::imbalance_ratio() const {
    if (n() == 0) return 0.0;
    return static_cast<double>(std::max(n_plus_, n_minus_)) / static_cast<double>(n());
}

Matrix Dataset::to_dense() const {
    Matrix m(n(), static_cast<std::size_t>(n_features_));
    for (std::size_t i = 0; i < n(); ++i) {
        auto out = m.row(i);
        for (const auto& e : rows_[i]) out[static_cast<std::size_t>(e.index)] = e.value;
    }
    return m;
}

Matrix Dataset::to_dense(const std::vector<int>& indices) const {
    Matrix m(indices.size(), static_cast<std::size_t>(n_features_));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto out = m.row(i);
        for (const auto& e : rows_[static_cast<std::size_t>(indices[i])])
            out[static_cast<std::size_t>(e.index)] = e.value;
    }
    return m;
}

std::vector<double> Dataset::dense_row(std::size_t i) const {
    std::vector<double> out(static_cast<std::size_t>(n_features_), 0.0);
    for (const auto& e : rows_[i]) out[static_cast<std::size_t>(e.index)] = e.value;
    return out;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
    std::vector<SparseRow> rows;
    std::vector<int> labels;
    rows.reserve(indices.size());
    labels.reserve(indices.size());
    for (int i : indices) {
        rows.push_back(rows_[static_cast<std::size_t>(i)]);
        labels.push_back(labels_[static_cast<std::size_t>(i)]);
    }
    return Dataset(std::move(rows), std::move(labels), n_features_);
}

std::vector<int> Dataset::indices_of_class(int label) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) out.push_back(static_cast<int>(i));
    return out;
}

Dataset load_dataset(const std::string& path, DataFormat format,
                     std::optional<int> label_column) {
    return format == DataFormat::SparseSvmText ? load_sparse(path)
                                               : load_csv(path, label_column);
}

void save_dataset_sparse(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    char buf[64];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        out << (ds.has_labels() ? ds.label(i) : 0);
        for (const auto& e : ds.row(i)) {
            std::snprintf(buf, sizeof(buf), " %d:%.17g", e.index + 1, e.value);
            out << buf;
        }
        out << '\n';
    }
}

std::pair<Dataset, NormalizationParams> normalize_features(const Dataset& ds,
                                                           NormalizationMode mode) {
    if (ds.n() == 0) throw DomainError("cannot normalize an empty dataset");
    const std::size_t d = static_cast<std::size_t>(ds.n_features());
    NormalizationParams p;
    p.mode = mode;
    if (mode == NormalizationMode::None) return {ds, p};
    p.shift.assign(d, 0.0);
    p.scale.assign(d, 0.0);

    if (mode == NormalizationMode::MinMax) {
        std::vector<double> mn(d, 0.0), mx(d, 0.0);
        std::vector<std::size_t> nnz(d, 0);
        std::vector<bool> seen(d, false);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            for (const auto& e : ds.row(i)) {
                const auto j = static_cast<std::size_t>(e.index);
                if (!seen[j]) {
                    mn[j] = mx[j] = e.value;
                    seen[j] = true;
                } else {
                    mn[j] = std::min(mn[j], e.value);
                    mx[j] = std::max(mx[j], e.value);
                }
                ++nnz[j];
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (nnz[j] < ds.n()) {  // implicit zeros take part
                mn[j] = seen[j] ? std::min(mn[j], 0.0) : 0.0;
                mx[j] = seen[j] ? std::max(mx[j], 0.0) : 0.0;
            }
            p.shift[j] = mn[j];
            p.scale[j] = mx[j] > mn[j] ? 1.0 / (mx[j] - mn[j]) : 0.0;
        }
    } else {  // ZScore, population convention (divide by n)
        std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            for (const auto& e : ds.row(i)) {
                const auto j = static_cast<std::size_t>(e.index);
                sum[j] += e.value;
                sumsq[j] += e.value * e.value;
            }
        }
        const double n = static_cast<double>(ds.n());
        for (std::size_t j = 0; j < d; ++j) {
            const double mean = sum[j] / n;
            const double var = std::max(0.0, sumsq[j] / n - mean * mean);
            const double sd = std::sqrt(var);
            p.shift[j] = mean;
            p.scale[j] = sd > 0.0 ? 1.0 / sd : 0.0;
        }
    }
    return {apply_normalization(ds, p), p};
}

Dataset apply_normalization(const Dataset& ds, const NormalizationParams& params) {
    if (params.mode == NormalizationMode::None) return ds;
    const std::size_t d = static_cast<std::size_t>(ds.n_features());
    std::vector<SparseRow> rows;
    rows.reserve(ds.n());
    std::vector<double> dense(d);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (const auto& e : ds.row(i)) dense[static_cast<std::size_t>(e.index)] = e.value;
        SparseRow row;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = (dense[j] - params.shift[j]) * params.scale[j];
            if (v != 0.0) row.push_back({static_cast<int>(j), v});
        }
        rows.push_back(std::move(row));
    }
    return Dataset(std::move(rows), ds.labels(), ds.n_features());
}

SplitIndices stratified_split_indices(const std::vector<int>& labels, double test_fraction,
                                      std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DomainError("test_fraction must lie in (0, 1)");
    SplitIndices out;
    Rng rng(mix_seed(seed, 0xa11ce));
    for (int cls : {+1, -1}) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(static_cast<int>(i));
        if (idx.size() < 2)
            throw DomainError("cannot stratify: class " + std::to_string(cls) +
                              " has fewer than 2 points");
        rng.shuffle(idx);
        const int n_test = round_half_up(test_fraction * static_cast<double>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (static_cast<int>(i) < n_test ? out.test : out.train).push_back(idx[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
    const auto idx = stratified_split_indices(ds.labels(), test_fraction, seed);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

std::vector<FoldPair> k_fold_indices(const std::vector<int>& labels, int k,
                                     std::uint64_t seed) {
    if (k < 2) throw DomainError("k-fold requires k >= 2");
    std::vector<std::vector<int>> fold_members(static_cast<std::size_t>(k));
    Rng rng(mix_seed(seed, 0xf01d));
    for (int cls : {+1, -1}) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(static_cast<int>(i));
        if (idx.size() < static_cast<std::size_t>(k))
            throw DomainError("class " + std::to_string(cls) + " smaller than k");
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold_members[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
    std::vector<FoldPair> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& val = fold_members[static_cast<std::size_t>(f)];
        std::sort(val.begin(), val.end());
        folds[static_cast<std::size_t>(f)].validation = val;
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            auto& tr = folds[static_cast<std::size_t>(f)].train;
            tr.insert(tr.end(), fold_members[static_cast<std::size_t>(g)].begin(),
                      fold_members[static_cast<std::size_t>(g)].end());
        }
        auto& tr = folds[static_cast<std::size_t>(f)].train;
        std::sort(tr.begin(), tr.end());
    }
    return folds;
}

std::vector<FoldPair> k_fold_indices(const Dataset& ds, int k, std::uint64_t seed) {
    return k_fold_indices(ds.labels(), k, seed);
}

}  // namespace mlsvm
