#include "oop/metrics.hpp"
#include "oop/table.hpp"

#include "doctest.h"
#include "support.hpp"

#include "json.hpp"

#include <cmath>
#include <random>

using namespace oop;
using namespace oop::testing;

namespace {

Labels labels(std::initializer_list<int> values) {
    Labels out(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (int v : values) out(i++) = v;
    return out;
}

MetricsReport bundle(const Labels& truth, const Labels& pred, int k) {
    return metrics_bundle(confusion(truth, pred, k), pred);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hand-tallied three-class fixture") {
    const Labels truth = labels({0, 0, 1, 1, 2, 2});
    const Labels pred = labels({0, 1, 1, 1, 2, 0});
    const ConfusionMatrix cm = confusion(truth, pred, 3);
    Eigen::MatrixXi expected(3, 3);
    expected << 1, 1, 0, 0, 2, 0, 1, 0, 1;
    CHECK(cm.counts == expected);
    CHECK(cm.total() == 6);

    const MetricsReport r = metrics_bundle(cm, pred);
    CHECK(r.accuracy == doctest::Approx(4.0 / 6.0));
    CHECK(r.correct_classification_rate == r.accuracy);
    CHECK(r.per_class[0].precision == doctest::Approx(0.5));
    CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.per_class[2].precision == doctest::Approx(1.0));
    CHECK(r.per_class[1].recall == doctest::Approx(1.0));
    CHECK(r.per_class[0].fpr == doctest::Approx(0.25));
    CHECK(r.per_class[2].fpr == 0.0);
    const double p = (0.5 + 2.0 / 3.0 + 1.0) / 3.0;
    const double rc = (0.5 + 1.0 + 0.5) / 3.0;
    CHECK(r.macro_precision == doctest::Approx(p));
    CHECK(r.macro_recall == doctest::Approx(rc));
    CHECK(r.macro_f1 == doctest::Approx(2.0 * p * rc / (p + rc)));
    CHECK(r.macro_fpr == doctest::Approx(0.5 / 3.0));
    CHECK(r.variance == doctest::Approx(17.0 / 36.0));
    CHECK_FALSE(r.degenerate());
}

TEST_CASE("binary case matches the textbook formulas") {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        Labels truth(50), pred(50);
        for (int i = 0; i < 50; ++i) {
            truth(i) = coin(rng);
            pred(i) = coin(rng);
        }
        truth(0) = 0, truth(1) = 1, pred(0) = 0, pred(1) = 1;
        long tp = 0, fp = 0, fn = 0, tn = 0;
        for (int i = 0; i < 50; ++i) {
            tp += truth(i) == 1 && pred(i) == 1;
            fp += truth(i) == 0 && pred(i) == 1;
            fn += truth(i) == 1 && pred(i) == 0;
            tn += truth(i) == 0 && pred(i) == 0;
        }
        const MetricsReport r = bundle(truth, pred, 2);
        CHECK(r.per_class[1].precision == doctest::Approx(double(tp) / double(tp + fp)));
        CHECK(r.per_class[1].recall == doctest::Approx(double(tp) / double(tp + fn)));
        CHECK(r.per_class[1].fpr == doctest::Approx(double(fp) / double(fp + tn)));
        // One-vs-rest symmetry: the positive class's FPR is one minus the negative class's recall.
        CHECK(r.per_class[1].fpr == doctest::Approx(1.0 - r.per_class[0].recall));
        CHECK(r.accuracy == doctest::Approx(double(tp + tn) / 50.0));
    }
}

TEST_CASE("metrics are invariant to a joint permutation of rows") {
    const Dataset ds = random_dataset(60, 1, 4, 2);
    Labels pred = ds.labels;
    for (Eigen::Index i = 0; i < 60; i += 3) pred(i) = (pred(i) + 1) % 4;
    const MetricsReport a = bundle(ds.labels, pred, 4);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(60);
    perm.setIdentity();
    std::mt19937_64 rng(1);
    std::shuffle(perm.indices().data(), perm.indices().data() + 60, rng);
    const Labels t2 = perm * ds.labels;
    const Labels p2 = perm * pred;
    const MetricsReport b = bundle(t2, p2, 4);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.macro_f1 == b.macro_f1);
    CHECK(a.macro_fpr == b.macro_fpr);
    CHECK(a.variance == doctest::Approx(b.variance));
}

TEST_CASE("bounds and perfect prediction") {
    const Dataset ds = random_dataset(40, 1, 3, 4);
    const MetricsReport perfect = bundle(ds.labels, ds.labels, 3);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    CHECK(perfect.macro_fpr == 0.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset noise = random_dataset(40, 1, 3, seed + 10);
        const MetricsReport r = bundle(ds.labels, noise.labels, 3);
        for (double v : {r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1, r.macro_fpr}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(r.macro_f1 <= std::max(r.macro_precision, r.macro_recall) + 1e-12);
        CHECK(r.macro_f1 >= std::min(r.macro_precision, r.macro_recall) - 1e-12);
    }
}

TEST_CASE("degenerate denominators read zero and are flagged") {
    // Class 2 never appears and is never predicted.
    const Labels truth = labels({0, 1, 0, 1});
    const Labels pred = labels({0, 0, 0, 0});
    const MetricsReport r = bundle(truth, pred, 3);
    CHECK(r.per_class[1].precision == 0.0);
    CHECK(r.per_class[1].precision_degenerate);
    CHECK(r.per_class[2].recall_degenerate);
    CHECK_FALSE(r.per_class[2].fpr_degenerate);
    CHECK(r.degenerate());
    CHECK(r.variance == 0.0);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(confusion(labels({0, 1}), labels({0}), 2), DataError);
    CHECK_THROWS_AS(confusion(labels({0, 2}), labels({0, 1}), 2), DataError);
    CHECK_THROWS_AS(confusion(labels({0, 1}), labels({0, -1}), 2), DataError);
    const ConfusionMatrix cm = confusion(labels({0, 1}), labels({0, 1}), 2);
    CHECK_THROWS_AS(metrics_bundle(cm, labels({0})), DataError);
}

TEST_CASE("degradation in percentage points") {
    MetricsReport clean, poisoned;
    clean.accuracy = 0.9737;
    poisoned.accuracy = 0.8684;
    clean.macro_fpr = 0.01;
    poisoned.macro_fpr = 0.07;
    const Degradation d = degradation(clean, poisoned);
    CHECK(d.lambda == doctest::Approx(10.53));
    CHECK(d.asr == d.lambda);
    CHECK(d.fpr_increase == doctest::Approx(0.06));
    CHECK(degradation(clean, clean).lambda == 0.0);
}

TEST_CASE("table text forms") {
    Table t{"demo", {"name", "value", "count", "empty"}, {}};
    t.add({std::string("a,b"), 0.1234567, std::int64_t{3}, std::monostate{}});
    t.add({std::string("say \"hi\""), NAN, std::int64_t{-1}, 1e-7});
    CHECK_THROWS_AS(t.add({std::string("short")}), std::invalid_argument);

    CHECK(format_number(0.1234567) == "0.123457");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(-INFINITY) == "-inf");
    CHECK(format_number(NAN) == "nan");
    CHECK(to_csv(t) == "name,value,count,empty\n\"a,b\",0.123457,3,\n\"say \"\"hi\"\"\",nan,-1,1e-07\n");

    const auto j = nlohmann::json::parse(to_json(t));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["value"].get<double>() == 0.123457);
    CHECK(j[0]["count"].get<int>() == 3);
    CHECK(j[0]["empty"].is_null());
    CHECK(j[1]["name"] == "say \"hi\"");
}

TEST_CASE("atomic writes leave no temporary behind") {
    TempDir tmp;
    Table t{"demo", {"x"}, {}};
    t.add({1.5});
    std::filesystem::create_directories(tmp.path / "nested");
    write_table(t, tmp.path / "nested", {Format::csv, Format::json});
    CHECK(std::filesystem::exists(tmp.path / "nested" / "demo.csv"));
    CHECK(std::filesystem::exists(tmp.path / "nested" / "demo.json"));
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path / "nested")) ++entries;
    CHECK(entries == 2);
    write_atomic(tmp.path / "nested" / "demo.csv", "replaced\n");
    std::ifstream in(tmp.path / "nested" / "demo.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "replaced");
}

}
