#include "oop/dataset.hpp"
#include "oop/models.hpp"
#include "oop/stats.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace oop;
using namespace oop::testing;

namespace {

std::string idx_header(std::uint32_t magic, std::initializer_list<std::uint32_t> dims) {
    std::string out;
    auto put = [&](std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
    };
    put(magic);
    for (auto d : dims) put(d);
    return out;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("IRIS loads with dense labels and metadata") {
    const Dataset& ds = iris();
    CHECK(ds.rows() == 150);
    CHECK(ds.cols() == 4);
    CHECK(ds.n_classes == 3);
    CHECK(ds.class_names == std::vector<std::string>{"setosa", "versicolor", "virginica"});
    CHECK(ds.feature_names.front() == "sepal_length");
    const auto counts = ds.class_counts();
    CHECK(counts == std::vector<Eigen::Index>{50, 50, 50});
    CHECK_NOTHROW(ds.validate());
}

TEST_CASE("loading the same file twice is bit-identical") {
    const Dataset a = load_csv(data_file("iris.csv"), "species");
    const Dataset b = load_csv(data_file("iris.csv"), "species");
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
}

TEST_CASE("minimal two-row file") {
    TempDir tmp;
    const auto path = tmp.write("two.csv", "a,b,label\n1,2,x\n3,4,y\n");
    const Dataset ds = load_csv(path, "label");
    CHECK(ds.n_classes == 2);
    CHECK(ds.labels(0) == 0);
    CHECK(ds.labels(1) == 1);
    CHECK(ds.features(1, 1) == 4.0);
}

TEST_CASE("numeric labels sort numerically") {
    TempDir tmp;
    const auto path = tmp.write("num.csv", "a,label\n1,10\n2,9\n3,10\n");
    const Dataset ds = load_csv(path, "label");
    CHECK(ds.class_names == std::vector<std::string>{"9", "10"});
    CHECK(ds.labels(0) == 1);
}

TEST_CASE("loader errors") {
    TempDir tmp;
    CHECK_THROWS_WITH_AS(load_csv(tmp.path / "absent.csv", "label"), doctest::Contains("missing file"), DataError);
    const auto text = tmp.write("text.csv", "a,label\n1,x\nfoo,y\n");
    CHECK_THROWS_WITH_AS(load_csv(text, "label"), doctest::Contains("non-numeric feature"), DataError);
    const auto single = tmp.write("single.csv", "a,label\n1,x\n2,x\n");
    CHECK_THROWS_WITH_AS(load_csv(single, "label"), doctest::Contains("single-class dataset"), DataError);
    const auto nolabel = tmp.write("nolabel.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(nolabel, "label"), DataError);
}

TEST_CASE("min-max scaling maps columns onto [0, 1]") {
    const Dataset ds = load_csv(data_file("iris.csv"), "species", Scaling::min_max);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        CHECK(ds.features.col(j).minCoeff() == 0.0);
        CHECK(ds.features.col(j).maxCoeff() == 1.0);
    }
    Matrix constant = Matrix::Constant(3, 1, 7.0);
    min_max_scale(constant);
    CHECK(constant.isZero());
}

TEST_CASE("IDX parsing, scaling and format errors") {
    TempDir tmp;
    std::string images = idx_header(0x00000803, {3, 1, 2});
    images += std::string{char(0), char(255), char(51), char(102), char(0), char(0)};
    std::string labels = idx_header(0x00000801, {3});
    labels += std::string{char(1), char(0), char(1)};
    const auto img = tmp.write("img.idx", images);
    const auto lab = tmp.write("lab.idx", labels);

    const Dataset ds = load_idx(img, lab);
    CHECK(ds.rows() == 3);
    CHECK(ds.cols() == 2);
    CHECK(ds.n_classes == 2);
    CHECK(ds.features(0, 1) == 1.0);
    CHECK(ds.features(1, 0) == doctest::Approx(0.2));
    CHECK(ds.labels(0) == 1);

    const auto bad = tmp.write("bad.idx", idx_header(0x00000802, {3, 1, 2}) + std::string(6, '\0'));
    CHECK_THROWS_WITH_AS(load_idx(bad, lab), doctest::Contains("magic-number mismatch"), DataError);
    const auto short_labels = tmp.write("short.idx", idx_header(0x00000801, {2}) + std::string(2, '\0'));
    CHECK_THROWS_WITH_AS(load_idx(img, short_labels), doctest::Contains("count mismatch"), DataError);
    CHECK_THROWS_WITH_AS(load_idx(img, lab, 4), doctest::Contains("subsample larger than file"), DataError);
}

TEST_CASE("MNIST subsample is stratified and seeded") {
    const auto images = data_file("mnist-10k-images-idx3-ubyte.gz");
    const auto labels = data_file("mnist-10k-labels-idx1-ubyte.gz");
    const Dataset full = load_idx(images, labels);
    CHECK(full.rows() == 10000);
    CHECK(full.cols() == 784);
    CHECK(full.n_classes == 10);
    CHECK(full.features.minCoeff() >= 0.0);
    CHECK(full.features.maxCoeff() <= 1.0);

    const Dataset sub = load_idx(images, labels, 5000, 7);
    CHECK(sub.rows() == 5000);
    const auto full_counts = full.class_counts();
    const auto sub_counts = sub.class_counts();
    for (std::size_t c = 0; c < 10; ++c) {
        // Histogram of the subsample against the proportional share.
        CHECK(std::abs(static_cast<double>(sub_counts[c]) - static_cast<double>(full_counts[c]) / 2.0) <= 1.0);
        CHECK(sub_counts[c] > 400);
        CHECK(sub_counts[c] < 600);
    }
    const Dataset again = load_idx(images, labels, 5000, 7);
    CHECK(again.origin == sub.origin);
    CHECK(std::set<std::size_t>(sub.origin.begin(), sub.origin.end()).size() == 5000);
}

TEST_CASE("synthetic blobs: separable, seeded, validated") {
    SynthSpec spec;
    for (int c = 0; c < 3; ++c) spec.classes.push_back({Vector::Constant(2, 10.0 * c), 0.5, 40});
    const Dataset a = synth_generate(spec, 5);
    const Dataset b = synth_generate(spec, 5);
    CHECK(a.features == b.features);
    CHECK(a.rows() == 120);

    const TrainedModel knn = train(ClassifierConfig::defaults(Family::knn), a);
    CHECK(accuracy(a.labels, predict(knn, a.features)) >= 0.99);

    // 1-NN leave-one-out, brute force.
    int correct = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double best = INFINITY;
        int label = -1;
        for (Eigen::Index j = 0; j < a.rows(); ++j) {
            if (i == j) continue;
            const double d = (a.features.row(i) - a.features.row(j)).squaredNorm();
            if (d < best) {
                best = d;
                label = a.labels(j);
            }
        }
        correct += label == a.labels(i);
    }
    CHECK(correct == a.rows());

    SynthSpec noisy;
    for (auto [count, mean] : {std::pair{120, 0.0}, {8, 3.0}, {4, 6.0}, {20, 9.0}})
        noisy.classes.push_back({Vector::Constant(3, mean), 1.0, count});
    noisy.noise_rate = 0.1;
    const Dataset skew = synth_generate(noisy, 11);
    CHECK(skew.n_classes == 4);
    CHECK(skew.rows() == 152);
    for (auto c : skew.class_counts()) CHECK(c > 0);
    Labels clean(152);
    clean << Labels::Constant(120, 0), Labels::Constant(8, 1), Labels::Constant(4, 2), Labels::Constant(20, 3);
    CHECK((skew.labels.array() != clean.array()).count() == 15);

    noisy.noise_rate = 0.5;
    CHECK_THROWS_WITH_AS(synth_generate(noisy, 1), doctest::Contains("label-noise rate"), DataError);
    noisy.noise_rate = 0.0;
    noisy.classes[0].scale = 0.0;
    CHECK_THROWS_WITH_AS(synth_generate(noisy, 1), doctest::Contains("degenerate covariance"), DataError);
}

TEST_CASE("stratified split of IRIS") {
    const SplitPair& sp = iris_split();
    CHECK(sp.train.rows() == 112);
    CHECK(sp.test.rows() == 38);
    const auto tr = sp.train.class_counts();
    const auto te = sp.test.class_counts();
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(static_cast<double>(tr[c]) - 0.75 * 50.0) <= 1.0);
        CHECK(tr[c] + te[c] == 50);
    }
    std::set<std::size_t> seen(sp.train.origin.begin(), sp.train.origin.end());
    for (auto o : sp.test.origin) CHECK(seen.insert(o).second);
    CHECK(seen.size() == 150);
    CHECK(std::is_sorted(sp.train.origin.begin(), sp.train.origin.end()));
}

TEST_CASE("split arithmetic, determinism and errors") {
    Matrix x(4, 1);
    x << 0, 1, 2, 3;
    Labels y(4);
    y << 0, 0, 1, 1;
    const Dataset four = make_dataset(x, y, 2);
    const SplitPair sp = split(four, 0.75, 3);
    CHECK(sp.train.rows() == 3);
    CHECK(sp.test.rows() == 1);

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SplitPair a = split(iris(), 0.75, seed);
        const SplitPair b = split(iris(), 0.75, seed);
        CHECK(a.train.origin == b.train.origin);
        CHECK(std::abs(a.train.rows() - 112) <= 2);
    }
    CHECK(split(iris(), 0.75, 1).train.origin != split(iris(), 0.75, 2).train.origin);

    Labels lonely(4);
    lonely << 0, 0, 0, 1;
    CHECK_THROWS_WITH_AS(split(make_dataset(x, lonely, 2), 0.5, 1), doctest::Contains("single instance"), DataError);
    CHECK_THROWS_AS(split(four, 1.0, 1), DataError);
}

TEST_CASE("correlation summary") {
    Matrix x(6, 3);
    x.col(0) << 1, 2, 3, 4, 5, 6;
    x.col(1) << 1, 4, 9, 16, 25, 36;
    x.col(2) = -x.col(0);
    Labels y(6);
    y << 0, 1, 0, 1, 0, 1;
    const CorrelationSummary s = correlation_summary(make_dataset(x, y, 2));
    REQUIRE(s.per_pair.size() == 3);
    CHECK(s.per_pair[0].coefficient == doctest::Approx(1.0));
    CHECK(s.per_pair[1].coefficient == doctest::Approx(-1.0));
    CHECK(s.spearman == doctest::Approx((1.0 - 1.0 - 1.0) / 3.0));
    CHECK(s.p_value >= 0.0);
    CHECK(s.p_value <= 1.0);

    // Rank based, so strictly monotone transforms leave it unchanged.
    Dataset warped = iris();
    warped.features = warped.features.array().exp().matrix();
    warped.features.col(1) = (warped.features.col(1).array() * 3.0 + 2.0).matrix();
    const auto a = correlation_summary(iris());
    const auto b = correlation_summary(warped);
    CHECK(a.spearman == doctest::Approx(b.spearman).epsilon(1e-12));
    CHECK(a.per_pair.size() == 6);
    CHECK(a.spearman > 0.0);

    Matrix c = x;
    c.col(1).setConstant(2.0);
    const auto flagged = correlation_summary(make_dataset(c, y, 2));
    CHECK(flagged.constant_features == std::vector<int>{1});
    CHECK(flagged.per_pair[0].coefficient == 0.0);
    CHECK(flagged.per_pair[2].coefficient == 0.0);
}

TEST_CASE("rank statistics") {
    Vector v(5);
    v << 3, 1, 3, 2, 5;
    const Vector r = stats::average_ranks(v);
    CHECK(r(0) == 3.5);
    CHECK(r(1) == 1.0);
    CHECK(r(2) == 3.5);
    CHECK(r(4) == 5.0);
    // Two-sided Student t tail at t = 2, df = 10.
    CHECK(stats::student_t_two_sided(2.0, 10.0) == doctest::Approx(0.0733880).epsilon(1e-5));
    CHECK(stats::correlation_p_value(0.0, 30) == doctest::Approx(1.0));
}

TEST_CASE("PCA projection") {
    Matrix x(4, 2);
    x << 1, 0, -1, 0, 0, 0.5, 0, -0.5;
    Labels y(4);
    y << 0, 0, 1, 1;
    const Projection p = pca_project(make_dataset(x, y, 2));
    // A rotation or reflection of the centred input keeps pairwise distances.
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
            CHECK((p.coords.row(i) - p.coords.row(j)).norm() == doctest::Approx((x.row(i) - x.row(j)).norm()));
    }
    CHECK(p.explained_variance(0) >= p.explained_variance(1));

    Matrix line(5, 3);
    for (int i = 0; i < 5; ++i) line.row(i) << i, 2.0 * i, -i;
    const Projection rank1 = pca_project(make_dataset(line, Labels::Zero(5), 1));
    CHECK(rank1.coords.col(1).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(rank1.coords(4, 0) > rank1.coords(0, 0));

    const Projection ip = pca_project(iris());
    CHECK(ip.coords.rows() == 150);
    // Setosa separates along the first axis from the other two classes.
    double setosa_max = -INFINITY;
    double others_min = INFINITY;
    for (Eigen::Index i = 0; i < 150; ++i) {
        if (ip.labels(i) == 0) setosa_max = std::max(setosa_max, ip.coords(i, 0));
        else others_min = std::min(others_min, ip.coords(i, 0));
    }
    CHECK(setosa_max < others_min);
}

}
