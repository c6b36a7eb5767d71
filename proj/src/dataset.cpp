#include "oop/dataset.hpp"

#include "oop/csv.hpp"
#include "oop/stats.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace oop {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

void check_finite(const Matrix& m) {
    if (!m.allFinite()) throw DataError("feature matrix contains NaN or infinite values");
}

}  // namespace

void validate_schema(const Dataset& d) {
    if (d.n_classes < 1) throw DataError("dataset '" + d.name + "': n_classes must be positive");
    if (d.features.rows() != d.labels.size())
        throw DataError("dataset '" + d.name + "': feature rows and label count differ");
    if (!d.feature_names.empty() && static_cast<Eigen::Index>(d.feature_names.size()) != d.features.cols())
        throw DataError("dataset '" + d.name + "': feature name count differs from column count");
    if (!d.origin.empty() && static_cast<Eigen::Index>(d.origin.size()) != d.features.rows())
        throw DataError("dataset '" + d.name + "': origin index count differs from row count");
    for (Eigen::Index i = 0; i < d.labels.size(); ++i) {
        if (d.labels(i) < 0 || d.labels(i) >= d.n_classes)
            throw DataError("dataset '" + d.name + "': label out of range at row " + std::to_string(i));
    }
    check_finite(d.features);
}

void Dataset::validate() const {
    validate_schema(*this);
    const auto counts = class_counts();
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw DataError("dataset '" + name + "': class " + std::to_string(c) + " has no instances");
    }
}

std::vector<Eigen::Index> Dataset::class_counts() const {
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int c = labels(i);
        if (c >= 0 && c < n_classes) ++counts[static_cast<std::size_t>(c)];
    }
    return counts;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& indices) const {
    Dataset out;
    out.name = name;
    out.n_classes = n_classes;
    out.feature_names = feature_names;
    out.class_names = class_names;
    const auto n = static_cast<Eigen::Index>(indices.size());
    out.features.resize(n, features.cols());
    out.labels.resize(n);
    out.origin.resize(indices.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index src = indices[static_cast<std::size_t>(r)];
        out.features.row(r) = features.row(src);
        out.labels(r) = labels(src);
        out.origin[static_cast<std::size_t>(r)] = origin.empty() ? static_cast<std::size_t>(src) : origin[static_cast<std::size_t>(src)];
    }
    return out;
}

void min_max_scale(Matrix& features) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        auto col = features.col(j);
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        if (hi > lo) {
            col = (col.array() - lo) / (hi - lo);
        } else {
            col.setZero();
        }
    }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, Scaling scaling) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing file: " + path.string());
    std::vector<csv::Row> rows;
    try {
        rows = csv::read(in);
    } catch (const std::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (rows.empty()) throw DataError(path.string() + ": empty file");

    const csv::Row header = rows.front();
    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == label_column) label_idx = j;
    }
    if (label_idx == header.size())
        throw DataError(path.string() + ": label column '" + label_column + "' not found");

    const auto n = static_cast<Eigen::Index>(rows.size() - 1);
    const auto d = static_cast<Eigen::Index>(header.size() - 1);
    if (n == 0) throw DataError(path.string() + ": no data rows");

    Dataset ds;
    ds.name = path.stem().string();
    ds.features.resize(n, d);
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) ds.feature_names.push_back(trim(header[j]));
    }

    std::vector<std::string> raw_labels(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const csv::Row& row = rows[static_cast<std::size_t>(r + 1)];
        if (row.size() != header.size())
            throw DataError(path.string() + ": row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(header.size()));
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j == label_idx) {
                raw_labels[static_cast<std::size_t>(r)] = trim(row[j]);
                continue;
            }
            double v = 0.0;
            if (!parse_double(row[j], v))
                throw DataError(path.string() + ": non-numeric feature '" + row[j] + "' in column '" + header[j] +
                                "' at row " + std::to_string(r + 1));
            if (!std::isfinite(v))
                throw DataError(path.string() + ": non-finite feature in column '" + header[j] + "' at row " +
                                std::to_string(r + 1));
            ds.features(r, col++) = v;
        }
    }

    // Dense class indices: numeric label text sorts numerically, anything else lexicographically.
    std::vector<std::string> unique = raw_labels;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    const bool numeric = std::all_of(unique.begin(), unique.end(), [](const std::string& s) {
        double v;
        return parse_double(s, v);
    });
    if (numeric) {
        std::stable_sort(unique.begin(), unique.end(), [](const std::string& a, const std::string& b) {
            double x = 0, y = 0;
            parse_double(a, x);
            parse_double(b, y);
            return x < y;
        });
    }
    if (unique.size() < 2) throw DataError(path.string() + ": single-class dataset; multiclass labels required");

    std::map<std::string, int> index;
    for (std::size_t c = 0; c < unique.size(); ++c) index[unique[c]] = static_cast<int>(c);
    ds.class_names = unique;
    ds.n_classes = static_cast<int>(unique.size());
    ds.labels.resize(n);
    ds.origin.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        ds.labels(r) = index.at(raw_labels[static_cast<std::size_t>(r)]);
        ds.origin[static_cast<std::size_t>(r)] = static_cast<std::size_t>(r);
    }
    if (scaling == Scaling::min_max) min_max_scale(ds.features);
    ds.validate();
    return ds;
}

namespace {

class GzReader {
public:
    explicit GzReader(const std::filesystem::path& path) : file_(gzopen(path.string().c_str(), "rb")), path_(path) {
        if (!file_) throw DataError("missing file: " + path.string());
    }
    ~GzReader() {
        if (file_) gzclose(file_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read(void* dst, std::size_t bytes) {
        auto* out = static_cast<unsigned char*>(dst);
        while (bytes > 0) {
            const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(bytes, 1u << 30));
            const int got = gzread(file_, out, chunk);
            if (got <= 0) throw DataError(path_.string() + ": truncated IDX file");
            out += got;
            bytes -= static_cast<std::size_t>(got);
        }
    }

    std::uint32_t read_u32_be() {
        std::array<unsigned char, 4> b{};
        read(b.data(), b.size());
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
    }

private:
    gzFile file_;
    std::filesystem::path path_;
};

}  // namespace

std::vector<Eigen::Index> stratified_sample(const Labels& labels, int n_classes, Eigen::Index count,
                                            std::uint64_t seed) {
    const Eigen::Index total = labels.size();
    if (count > total) throw DataError("subsample larger than population");
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_classes));
    for (Eigen::Index i = 0; i < total; ++i) members[static_cast<std::size_t>(labels(i))].push_back(i);

    // Largest-remainder apportionment of `count` across classes.
    std::vector<Eigen::Index> quota(members.size());
    std::vector<std::pair<double, int>> remainders;
    Eigen::Index assigned = 0;
    for (std::size_t c = 0; c < members.size(); ++c) {
        const double exact = static_cast<double>(count) * static_cast<double>(members[c].size()) / static_cast<double>(total);
        quota[c] = static_cast<Eigen::Index>(std::floor(exact));
        assigned += quota[c];
        remainders.emplace_back(exact - std::floor(exact), static_cast<int>(c));
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < count && k < remainders.size(); ++k) {
        const auto c = static_cast<std::size_t>(remainders[k].second);
        if (quota[c] < static_cast<Eigen::Index>(members[c].size())) {
            ++quota[c];
            ++assigned;
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> chosen;
    chosen.reserve(static_cast<std::size_t>(count));
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto m = members[c];
        std::shuffle(m.begin(), m.end(), rng);
        chosen.insert(chosen.end(), m.begin(), m.begin() + quota[c]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::optional<Eigen::Index> subsample, std::uint64_t seed) {
    GzReader images(images_path);
    GzReader labels(labels_path);

    const std::uint32_t image_magic = images.read_u32_be();
    if (image_magic != 0x00000803u) throw DataError(images_path.string() + ": magic-number mismatch (images)");
    const std::uint32_t label_magic = labels.read_u32_be();
    if (label_magic != 0x00000801u) throw DataError(labels_path.string() + ": magic-number mismatch (labels)");

    const std::uint32_t n_images = images.read_u32_be();
    const std::uint32_t height = images.read_u32_be();
    const std::uint32_t width = images.read_u32_be();
    const std::uint32_t n_labels = labels.read_u32_be();
    if (n_images != n_labels)
        throw DataError("IDX count mismatch: " + std::to_string(n_images) + " images vs " + std::to_string(n_labels) +
                        " labels");
    if (subsample && (*subsample <= 0 || *subsample > static_cast<Eigen::Index>(n_images)))
        throw DataError("subsample larger than file (" + std::to_string(n_images) + " rows)");

    const auto n = static_cast<Eigen::Index>(n_images);
    const auto d = static_cast<Eigen::Index>(height) * static_cast<Eigen::Index>(width);
    std::vector<unsigned char> pixels(static_cast<std::size_t>(n * d));
    std::vector<unsigned char> raw_labels(static_cast<std::size_t>(n));
    images.read(pixels.data(), pixels.size());
    labels.read(raw_labels.data(), raw_labels.size());

    Labels all_labels(n);
    int max_label = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        all_labels(i) = raw_labels[static_cast<std::size_t>(i)];
        max_label = std::max(max_label, all_labels(i));
    }
    const int n_classes = max_label + 1;

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    if (subsample) rows = stratified_sample(all_labels, n_classes, *subsample, seed);

    Dataset ds;
    ds.name = "mnist";
    ds.n_classes = n_classes;
    const auto m = static_cast<Eigen::Index>(rows.size());
    ds.features.resize(m, d);
    ds.labels.resize(m);
    ds.origin.resize(rows.size());
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index src = rows[static_cast<std::size_t>(r)];
        const unsigned char* px = pixels.data() + src * d;
        for (Eigen::Index j = 0; j < d; ++j) ds.features(r, j) = static_cast<double>(px[j]) / 255.0;
        ds.labels(r) = all_labels(src);
        ds.origin[static_cast<std::size_t>(r)] = static_cast<std::size_t>(src);
    }
    for (Eigen::Index j = 0; j < d; ++j) ds.feature_names.push_back("px" + std::to_string(j));
    for (int c = 0; c < n_classes; ++c) ds.class_names.push_back(std::to_string(c));
    ds.validate();
    return ds;
}

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed, std::string name) {
    if (spec.classes.size() < 2) throw DataError("synthetic spec needs at least 2 classes");
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5)) throw DataError("label-noise rate must be in [0, 0.5)");
    const Eigen::Index d = spec.classes.front().mean.size();
    if (d == 0) throw DataError("synthetic blob means must be non-empty");
    Eigen::Index n = 0;
    for (const auto& blob : spec.classes) {
        if (blob.count <= 0) throw DataError("synthetic blob counts must be positive");
        if (!(blob.scale > 0.0)) throw DataError("degenerate covariance: blob scale must be positive");
        if (blob.mean.size() != d) throw DataError("synthetic blob means differ in dimension");
        n += blob.count;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset ds;
    ds.name = std::move(name);
    ds.n_classes = static_cast<int>(spec.classes.size());
    ds.features.resize(n, d);
    ds.labels.resize(n);
    ds.origin.resize(static_cast<std::size_t>(n));
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& blob = spec.classes[c];
        for (Eigen::Index i = 0; i < blob.count; ++i, ++r) {
            for (Eigen::Index j = 0; j < d; ++j) ds.features(r, j) = blob.mean(j) + blob.scale * normal(rng);
            ds.labels(r) = static_cast<int>(c);
            ds.origin[static_cast<std::size_t>(r)] = static_cast<std::size_t>(r);
        }
    }

    const auto flips = static_cast<Eigen::Index>(std::llround(spec.noise_rate * static_cast<double>(n)));
    if (flips > 0) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        auto counts = ds.class_counts();
        std::uniform_int_distribution<int> other(1, ds.n_classes - 1);
        Eigen::Index done = 0;
        for (Eigen::Index idx : order) {
            if (done == flips) break;
            const int old = ds.labels(idx);
            // A class never loses its last instance to noise.
            if (counts[static_cast<std::size_t>(old)] <= 1) continue;
            const int next = (old + other(rng)) % ds.n_classes;
            --counts[static_cast<std::size_t>(old)];
            ++counts[static_cast<std::size_t>(next)];
            ds.labels(idx) = next;
            ++done;
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
    for (int c = 0; c < ds.n_classes; ++c) ds.class_names.push_back(std::to_string(c));
    ds.validate();
    return ds;
}

SplitPair split(const Dataset& dataset, double ratio, std::uint64_t seed, bool stratified) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must be in (0, 1)");
    const Eigen::Index n = dataset.rows();
    const auto target = static_cast<Eigen::Index>(std::floor(ratio * static_cast<double>(n)));
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> train_idx;

    if (stratified) {
        std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(dataset.n_classes));
        for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(dataset.labels(i))].push_back(i);
        for (std::size_t c = 0; c < members.size(); ++c) {
            if (members[c].size() == 1)
                throw DataError("class " + std::to_string(c) + " has a single instance; cannot stratify");
        }
        std::vector<Eigen::Index> quota(members.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        Eigen::Index assigned = 0;
        for (std::size_t c = 0; c < members.size(); ++c) {
            if (members[c].empty()) continue;
            const double exact = ratio * static_cast<double>(members[c].size());
            quota[c] = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(exact)));
            assigned += quota[c];
            remainders.emplace_back(exact - std::floor(exact), c);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; assigned < target && k < remainders.size(); ++k) {
            const std::size_t c = remainders[k].second;
            if (quota[c] < static_cast<Eigen::Index>(members[c].size())) {
                ++quota[c];
                ++assigned;
            }
        }
        for (std::size_t c = 0; c < members.size(); ++c) {
            auto m = members[c];
            std::shuffle(m.begin(), m.end(), rng);
            train_idx.insert(train_idx.end(), m.begin(), m.begin() + quota[c]);
        }
    } else {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        train_idx.assign(order.begin(), order.begin() + target);
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::vector<char> in_train(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i : train_idx) in_train[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> test_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!in_train[static_cast<std::size_t>(i)]) test_idx.push_back(i);
    }

    SplitPair out;
    out.train = dataset.subset(train_idx);
    out.test = dataset.subset(test_idx);
    out.ratio = ratio;
    out.seed = seed;
    return out;
}

CorrelationSummary correlation_summary(const Dataset& dataset) {
    const Eigen::Index d = dataset.cols();
    const Eigen::Index n = dataset.rows();
    if (d < 2) throw DataError("correlation summary needs at least 2 features");
    if (n < 3) throw DataError("correlation summary needs at least 3 rows");

    CorrelationSummary out;
    std::vector<char> constant(static_cast<std::size_t>(d), 0);
    Matrix ranks(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto col = dataset.features.col(j);
        constant[static_cast<std::size_t>(j)] = col.minCoeff() == col.maxCoeff();
        if (constant[static_cast<std::size_t>(j)]) out.constant_features.push_back(static_cast<int>(j));
        ranks.col(j) = stats::average_ranks(col);
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            double r = 0.0;
            if (!constant[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(j)])
                r = stats::pearson(ranks.col(i), ranks.col(j));
            out.per_pair.push_back({static_cast<int>(i), static_cast<int>(j), r});
            sum += r;
        }
    }
    out.spearman = sum / static_cast<double>(out.per_pair.size());
    out.p_value = stats::correlation_p_value(out.spearman, n);
    return out;
}

Projection pca_project(const Dataset& dataset) {
    if (dataset.cols() < 2) throw DataError("PCA projection needs at least 2 features");
    const Matrix centered = dataset.features.rowwise() - dataset.features.colwise().mean();
    const double denom = static_cast<double>(std::max<Eigen::Index>(dataset.rows() - 1, 1));
    const Matrix cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    const Eigen::Index d = cov.rows();

    Matrix axes(d, 2);
    Projection out;
    out.explained_variance.resize(2);
    for (Eigen::Index k = 0; k < 2; ++k) {
        // Eigen sorts eigenvalues ascending.
        Vector axis = solver.eigenvectors().col(d - 1 - k);
        Eigen::Index lead = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(axis(i)) > std::abs(axis(lead))) lead = i;
        }
        if (axis(lead) < 0) axis = -axis;
        axes.col(k) = axis;
        out.explained_variance(k) = std::max(0.0, solver.eigenvalues()(d - 1 - k));
    }
    out.coords = centered * axes;
    out.labels = dataset.labels;
    return out;
}

}  // namespace oop
