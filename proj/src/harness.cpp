#include "oop/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

namespace oop {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs fn(0..n-1) on up to `threads` workers. fn must not throw.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

const char* kind_name(DatasetSource::Kind kind) {
    switch (kind) {
        case DatasetSource::Kind::csv: return "csv";
        case DatasetSource::Kind::idx: return "idx";
        case DatasetSource::Kind::synthetic: return "synthetic";
    }
    return "";
}

ordered_json params_json(const std::map<Family, Hyperparameters>& params) {
    ordered_json out = ordered_json::object();
    for (const auto& [family, p] : params) {
        const auto cfg = nlohmann::json::parse(serialize_config(ClassifierConfig{p, 0}));
        out[std::string(to_string(family))] = cfg.at("params");
    }
    return out;
}

std::vector<Eigen::Index> rank_desc(const Vector& v) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) > v(b); });
    return order;
}

struct CellOutcome {
    PoisonPlan plan;
    PoisonedDataset poisoned;
    std::shared_ptr<const TrainedModel> victim;
};

CellOutcome run_cell(const Dataset& train_set, const GroupState& group, double level, const RelabelRule& rule,
                     const ClassifierConfig& victim_config, std::uint64_t seed) {
    CellOutcome out;
    out.plan = build_plan(group.report, train_set, level, rule, seed, group.proba ? &*group.proba : nullptr);
    out.poisoned = apply_plan(train_set, out.plan);
    if (out.plan.victims.empty() && serialize_config(victim_config) == serialize_config(group.surrogate->config())) {
        out.victim = group.surrogate;
    } else {
        out.victim = std::make_shared<const TrainedModel>(train(victim_config, out.poisoned.data));
    }
    return out;
}

std::string seed_text(std::uint64_t seed) { return std::to_string(seed); }

}  // namespace

Dataset load_source(const DatasetSource& source, std::uint64_t master_seed) {
    Dataset ds;
    switch (source.kind) {
        case DatasetSource::Kind::csv:
            ds = load_csv(source.path, source.label_column, source.scaling);
            break;
        case DatasetSource::Kind::idx:
            ds = load_idx(source.path, source.labels_path, source.subsample,
                          derive_seed(master_seed, "load/" + source.name));
            if (source.scaling == Scaling::min_max) min_max_scale(ds.features);
            break;
        case DatasetSource::Kind::synthetic:
            ds = synth_generate(source.synth, derive_seed(master_seed, "synth/" + source.name), source.name);
            if (source.scaling == Scaling::min_max) min_max_scale(ds.features);
            break;
    }
    ds.name = source.name;
    return ds;
}

void ExperimentSpec::validate() const {
    if (datasets.empty()) throw DataError("at least one dataset is required");
    std::set<std::string> names;
    for (const auto& d : datasets) {
        if (d.name.empty()) throw DataError("dataset name must not be empty");
        if (!names.insert(d.name).second) throw DataError("duplicate dataset name '" + d.name + "'");
    }
    if (families.empty()) throw DataError("at least one classifier family is required");
    if (std::set<Family>(families.begin(), families.end()).size() != families.size())
        throw DataError("duplicate classifier family");
    if (levels.empty() || levels.front() != 0.0) throw DataError("levels must start with the clean baseline 0");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] >= 0.0 && levels[i] < 100.0)) throw DataError("levels must lie in [0, 100)");
        if (i > 0 && !(levels[i] > levels[i - 1])) throw DataError("levels must be strictly ascending");
    }
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw DataError("split ratio must lie in (0, 1)");
    for (int k : k_values) {
        if (k < 1) throw DataError("k values must be positive");
    }
    if (importance_repeats < 1) throw DataError("importance repeats must be positive");
    for (const auto* table : {&surrogate_params, &victim_params}) {
        for (const auto& [family, params] : *table) {
            ClassifierConfig cfg{params, 0};
            if (cfg.family() != family) throw DataError("hyperparameters filed under the wrong family");
            cfg.validate();
        }
    }
}

ClassifierConfig ExperimentSpec::surrogate_config(Family family, std::uint64_t seed) const {
    ClassifierConfig cfg = ClassifierConfig::defaults(family, seed);
    if (auto it = surrogate_params.find(family); it != surrogate_params.end()) cfg.params = it->second;
    return cfg;
}

ClassifierConfig ExperimentSpec::victim_config(Family family, std::uint64_t seed) const {
    if (auto it = victim_params.find(family); it != victim_params.end()) return {it->second, seed};
    return surrogate_config(family, seed);
}

std::string spec_json(const ExperimentSpec& spec) {
    ordered_json doc;
    ordered_json datasets = ordered_json::array();
    for (const auto& d : spec.datasets) {
        ordered_json item{{"name", d.name}, {"type", kind_name(d.kind)}};
        if (d.kind != DatasetSource::Kind::synthetic) item["path"] = d.path.generic_string();
        if (d.kind == DatasetSource::Kind::csv) item["label_column"] = d.label_column;
        if (d.kind == DatasetSource::Kind::idx) {
            item["labels"] = d.labels_path.generic_string();
            if (d.subsample) item["subsample"] = *d.subsample;
        }
        if (d.kind == DatasetSource::Kind::synthetic) {
            ordered_json classes = ordered_json::array();
            for (const auto& blob : d.synth.classes) {
                classes.push_back({{"mean", std::vector<double>(blob.mean.data(), blob.mean.data() + blob.mean.size())},
                                   {"scale", blob.scale},
                                   {"count", blob.count}});
            }
            item["classes"] = std::move(classes);
            item["noise_rate"] = d.synth.noise_rate;
        }
        item["scaling"] = d.scaling == Scaling::min_max ? "min-max" : "none";
        datasets.push_back(std::move(item));
    }
    doc["datasets"] = std::move(datasets);
    ordered_json families = ordered_json::array();
    for (Family f : spec.families) families.push_back(std::string(to_string(f)));
    doc["families"] = std::move(families);
    doc["levels"] = spec.levels;
    doc["rule"] = spec.rule.to_string();
    doc["split_ratio"] = spec.split_ratio;
    doc["seed"] = spec.seed;
    const auto& a = spec.analyses;
    doc["analyses"] = {{"k_sweep", a.k_sweep},
                       {"class_probabilities", a.class_probabilities},
                       {"feature_importance", a.feature_importance},
                       {"margin_score", a.margin_score},
                       {"variance_table", a.variance_table},
                       {"disagreement", a.disagreement},
                       {"correlation", a.correlation},
                       {"pca", a.pca}};
    doc["k_values"] = spec.k_values;
    doc["importance_repeats"] = spec.importance_repeats;
    doc["models"] = params_json(spec.surrogate_params);
    doc["victim_models"] = params_json(spec.victim_params);
    return doc.dump();
}

std::string spec_hash(const ExperimentSpec& spec) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(spec_json(spec)));
    return buf;
}

std::uint64_t split_seed(std::uint64_t master, const std::string& dataset) {
    return derive_seed(master, "split/" + dataset);
}

std::uint64_t model_seed(std::uint64_t master, const std::string& dataset, Family family) {
    return derive_seed(master, "model/" + dataset + "/" + std::string(to_string(family)));
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, Family family, double level) {
    return derive_seed(master, "cell/" + dataset + "/" + std::string(to_string(family)) + "/" + format_number(level));
}

bool ExperimentResult::any_failed() const {
    return !analysis_errors.empty() || std::any_of(cells.begin(), cells.end(), [](const auto& c) { return !c.ok; });
}

const CellResult* ExperimentResult::find(const std::string& dataset, Family family, double level) const {
    for (const auto& c : cells) {
        if (c.dataset == dataset && c.family == family && c.level == level) return &c;
    }
    return nullptr;
}

GroupState prepare_group(const Dataset& train_set, const ClassifierConfig& config, const RelabelRule& rule) {
    GroupState g;
    g.surrogate = std::make_shared<const TrainedModel>(train(config, train_set));
    g.report = compute_distances(*g.surrogate, train_set);
    if (rule.kind == RelabelRule::Kind::least_likely) g.proba = predict_proba(*g.surrogate, train_set.features);
    return g;
}

ExperimentResult run_sweep(const ExperimentSpec& spec, const RunOptions& options) {
    spec.validate();
    auto log = [&](const std::string& msg) {
        if (options.log) options.log(msg);
    };

    ExperimentResult result;
    result.provenance.spec_hash = spec_hash(spec);
    result.provenance.master_seed = spec.seed;

    // Datasets and their single shared split.
    const std::size_t n_data = spec.datasets.size();
    std::vector<std::optional<Dataset>> full(n_data);
    std::vector<std::optional<SplitPair>> splits(n_data);
    std::vector<std::string> data_errors(n_data);
    for (std::size_t d = 0; d < n_data; ++d) {
        const auto& source = spec.datasets[d];
        try {
            full[d] = load_source(source, spec.seed);
            const std::uint64_t s = split_seed(spec.seed, source.name);
            splits[d] = split(*full[d], spec.split_ratio, s);
            result.provenance.seeds.push_back({"split/" + source.name, s});
            DatasetInfo info;
            info.name = source.name;
            info.rows = full[d]->rows();
            info.features = full[d]->cols();
            info.classes = full[d]->n_classes;
            info.train_rows = splits[d]->train.rows();
            info.test_rows = splits[d]->test.rows();
            info.feature_names = full[d]->feature_names;
            info.class_names = full[d]->class_names;
            result.datasets.push_back(std::move(info));
            log("loaded " + source.name + ": " + std::to_string(full[d]->rows()) + " rows");
        } catch (const std::exception& e) {
            data_errors[d] = e.what();
            log("dataset " + source.name + " failed: " + e.what());
        }
    }

    // Groups: one surrogate per (dataset, family).
    const std::size_t n_fam = spec.families.size();
    const std::size_t n_lvl = spec.levels.size();
    const std::size_t n_groups = n_data * n_fam;
    std::vector<std::optional<GroupState>> groups(n_groups);
    std::vector<std::optional<Labels>> clean_test_pred(n_groups);
    std::vector<std::string> group_errors(n_groups);
    std::vector<double> group_ms(n_groups, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const auto& name = spec.datasets[g / n_fam].name;
        const Family f = spec.families[g % n_fam];
        result.provenance.seeds.push_back({"model/" + name + "/" + std::string(to_string(f)),
                                           model_seed(spec.seed, name, f)});
    }
    parallel_for(n_groups, options.threads, [&](std::size_t g) {
        const std::size_t d = g / n_fam;
        const Family f = spec.families[g % n_fam];
        if (!splits[d]) {
            group_errors[g] = data_errors[d];
            return;
        }
        const auto& name = spec.datasets[d].name;
        const auto t0 = Clock::now();
        try {
            groups[g] = prepare_group(splits[d]->train, spec.surrogate_config(f, model_seed(spec.seed, name, f)),
                                      spec.rule);
            clean_test_pred[g] = predict(*groups[g]->surrogate, splits[d]->test.features);
        } catch (const std::exception& e) {
            group_errors[g] = e.what();
        }
        group_ms[g] = elapsed_ms(t0);
    });

    // Cells.
    result.cells.resize(n_groups * n_lvl);
    parallel_for(result.cells.size(), options.threads, [&](std::size_t idx) {
        const std::size_t g = idx / n_lvl;
        const std::size_t d = g / n_fam;
        const Family f = spec.families[g % n_fam];
        const double level = spec.levels[idx % n_lvl];
        const auto& name = spec.datasets[d].name;
        CellResult& cell = result.cells[idx];
        cell.dataset = name;
        cell.family = f;
        cell.level = level;
        cell.seed = cell_seed(spec.seed, name, f, level);
        cell.degradation = {std::nan(""), std::nan(""), std::nan("")};
        if (!groups[g]) {
            cell.error = group_errors[g];
            return;
        }
        const auto t0 = Clock::now();
        try {
            const Dataset& train_set = splits[d]->train;
            const Dataset& test_set = splits[d]->test;
            const auto victim_cfg = spec.victim_config(f, model_seed(spec.seed, name, f));
            const CellOutcome out = run_cell(train_set, *groups[g], level, spec.rule, victim_cfg, cell.seed);
            cell.train_rows = train_set.rows();
            cell.victims = out.plan.victims;
            for (Eigen::Index i = 0; i < train_set.rows(); ++i) {
                if (out.poisoned.data.labels(i) != train_set.labels(i)) cell.flipped.push_back(i);
            }
            const Labels pred = predict(*out.victim, test_set.features);
            cell.metrics = metrics_bundle(confusion(test_set.labels, pred, test_set.n_classes), pred);
            if (spec.analyses.disagreement) {
                cell.disagreement = static_cast<double>((pred.array() != clean_test_pred[g]->array()).count()) /
                                    static_cast<double>(pred.size());
            }
            if (f == Family::svm && spec.analyses.margin_score) cell.margin = svm_margin_score(*out.victim);
            if (f == Family::gnb && spec.analyses.class_probabilities)
                cell.priors = out.victim->state_as<GnbState>().priors;
            if ((f == Family::dt || f == Family::svm || f == Family::rf) && spec.analyses.feature_importance) {
                const auto scores = feature_importance(*out.victim, out.poisoned.data, spec.importance_repeats);
                Vector v(static_cast<Eigen::Index>(scores.size()));
                for (const auto& s : scores) v(s.feature) = s.score;
                cell.importance = std::move(v);
            }
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cell.wall_ms = elapsed_ms(t0) + (level == spec.levels.front() ? group_ms[g] : 0.0);
    });

    // Degradation against each group's clean cell.
    for (std::size_t g = 0; g < n_groups; ++g) {
        const CellResult& clean = result.cells[g * n_lvl];
        for (std::size_t l = 0; l < n_lvl; ++l) {
            CellResult& cell = result.cells[g * n_lvl + l];
            result.provenance.seeds.push_back({"cell/" + cell.dataset + "/" + std::string(to_string(cell.family)) +
                                                   "/" + format_number(cell.level),
                                               cell.seed});
            if (clean.ok && cell.ok) cell.degradation = degradation(clean.metrics, cell.metrics);
        }
        if (!result.cells[g * n_lvl].ok) log("group failed: " + result.cells[g * n_lvl].error);
    }

    // Analysis tables, in a fixed order.
    if (spec.analyses.k_sweep) {
        Table all{"k_sweep", {"dataset", "k", "level", "accuracy"}, {}};
        for (std::size_t d = 0; d < n_data; ++d) {
            if (!splits[d]) continue;
            const auto& name = spec.datasets[d].name;
            try {
                const Table t = k_sweep(name, *splits[d], spec.k_values, spec.levels, spec.rule,
                                        model_seed(spec.seed, name, Family::knn));
                all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
            } catch (const std::exception& e) {
                result.analysis_errors.push_back("k_sweep/" + name + ": " + e.what());
            }
        }
        result.tables.push_back(std::move(all));
    }
    if (spec.analyses.class_probabilities)
        result.tables.push_back(class_probability_drift(result.cells, result.datasets));
    if (spec.analyses.feature_importance) result.tables.push_back(importance_drift(result.cells, result.datasets));
    if (spec.analyses.margin_score) result.tables.push_back(margin_table(result.cells));
    if (spec.analyses.variance_table) result.tables.push_back(variance_table(result.cells));
    if (spec.analyses.correlation) {
        std::vector<std::pair<std::string, CorrelationSummary>> summaries;
        for (std::size_t d = 0; d < n_data; ++d) {
            if (!full[d]) continue;
            try {
                summaries.emplace_back(spec.datasets[d].name, correlation_summary(*full[d]));
            } catch (const std::exception& e) {
                result.analysis_errors.push_back("correlation/" + spec.datasets[d].name + ": " + e.what());
            }
        }
        result.tables.push_back(correlation_table(summaries));
    }
    if (spec.analyses.pca) {
        Table all{"pca", {}, {}};
        for (std::size_t d = 0; d < n_data; ++d) {
            if (!full[d]) continue;
            try {
                Table t = pca_table(spec.datasets[d].name, *full[d], pca_project(*full[d]));
                all.columns = t.columns;
                all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
            } catch (const std::exception& e) {
                result.analysis_errors.push_back("pca/" + spec.datasets[d].name + ": " + e.what());
            }
        }
        if (all.columns.empty()) all.columns = pca_table("", Dataset{}, Projection{}).columns;
        result.tables.push_back(std::move(all));
    }
    return result;
}

Table k_sweep(const std::string& dataset, const SplitPair& data, const std::vector<int>& k_values,
              const std::vector<double>& levels, const RelabelRule& rule, std::uint64_t seed) {
    const Eigen::Index rows = data.train.rows();
    for (int k : k_values) {
        if (k < 1 || k > rows)
            throw DataError("k = " + std::to_string(k) + " outside [1, " + std::to_string(rows) + "]");
    }
    // acc[k][level]
    std::vector<std::vector<double>> acc(k_values.size(), std::vector<double>(levels.size()));
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        const ClassifierConfig cfg{KnnParams{k_values[ki]}, seed};
        const GroupState group = prepare_group(data.train, cfg, rule);
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const CellOutcome out = run_cell(data.train, group, levels[li], rule, cfg, seed);
            acc[ki][li] = accuracy(data.test.labels, predict(*out.victim, data.test.features));
        }
    }
    Table t{"k_sweep", {"dataset", "k", "level", "accuracy"}, {}};
    for (std::size_t li = 0; li < levels.size(); ++li) {
        for (std::size_t ki = 0; ki < k_values.size(); ++ki)
            t.add({dataset, std::int64_t{k_values[ki]}, levels[li], acc[ki][li]});
    }
    return t;
}

Table class_probability_drift(const std::vector<CellResult>& cells, const std::vector<DatasetInfo>& datasets) {
    Table t{"class_probabilities",
            {"dataset", "level", "class", "class_name", "prior", "rank", "top_class", "top_changed"},
            {}};
    for (const auto& info : datasets) {
        std::optional<Eigen::Index> clean_top;
        for (const auto& c : cells) {
            if (c.dataset != info.name || c.family != Family::gnb || !c.priors) continue;
            const Vector& p = *c.priors;
            const Eigen::Index top = argmax_first(p);
            if (!clean_top) clean_top = top;
            const auto order = rank_desc(p);
            std::vector<std::int64_t> rank(static_cast<std::size_t>(p.size()));
            for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = std::int64_t(r) + 1;
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const auto name = static_cast<std::size_t>(k) < info.class_names.size()
                                      ? info.class_names[static_cast<std::size_t>(k)]
                                      : std::to_string(k);
                t.add({info.name, c.level, std::int64_t{k}, name, p(k), rank[static_cast<std::size_t>(k)],
                       std::int64_t{top}, std::int64_t{top != *clean_top}});
            }
        }
    }
    return t;
}

Table importance_drift(const std::vector<CellResult>& cells, const std::vector<DatasetInfo>& datasets) {
    Table t{"feature_importance",
            {"dataset", "family", "level", "clean_rank", "feature", "feature_name", "score", "rank", "rank_changed"},
            {}};
    for (const auto& info : datasets) {
        for (Family f : {Family::dt, Family::svm, Family::rf}) {
            std::vector<Eigen::Index> tracked;
            for (const auto& c : cells) {
                if (c.dataset != info.name || c.family != f || !c.importance) continue;
                const Vector& s = *c.importance;
                const auto order = rank_desc(s);
                if (tracked.empty()) {
                    // Zero-score features (constant columns included) are never tracked.
                    for (Eigen::Index j : order) {
                        if (tracked.size() == 3 || !(s(j) > 0.0)) break;
                        tracked.push_back(j);
                    }
                }
                for (std::size_t r = 0; r < tracked.size(); ++r) {
                    const Eigen::Index j = tracked[r];
                    const auto pos = std::find(order.begin(), order.end(), j) - order.begin() + 1;
                    const auto name = static_cast<std::size_t>(j) < info.feature_names.size()
                                          ? info.feature_names[static_cast<std::size_t>(j)]
                                          : std::to_string(j);
                    t.add({info.name, std::string(to_string(f)), c.level, std::int64_t(r) + 1, std::int64_t{j}, name,
                           s(j), std::int64_t{pos}, std::int64_t{pos != std::int64_t(r) + 1}});
                }
            }
        }
    }
    return t;
}

Table variance_table(const std::vector<CellResult>& cells) {
    Table t{"variance", {"dataset", "family", "level", "variance"}, {}};
    for (const auto& c : cells) {
        t.add({c.dataset, std::string(to_string(c.family)), c.level,
               c.ok ? Cell{c.metrics.variance} : Cell{std::monostate{}}});
    }
    return t;
}

Table margin_table(const std::vector<CellResult>& cells) {
    Table t{"margin_score", {"dataset", "level", "margin"}, {}};
    for (const auto& c : cells) {
        if (c.family == Family::svm && c.margin) t.add({c.dataset, c.level, *c.margin});
    }
    return t;
}

Table correlation_table(const std::vector<std::pair<std::string, CorrelationSummary>>& summaries) {
    Table t{"correlation", {"dataset", "spearman", "p_value", "pairs", "constant_features"}, {}};
    for (const auto& [name, s] : summaries) {
        t.add({name, s.spearman, s.p_value, static_cast<std::int64_t>(s.per_pair.size()),
               static_cast<std::int64_t>(s.constant_features.size())});
    }
    return t;
}

Table pca_table(const std::string& dataset, const Dataset& data, const Projection& projection) {
    Table t{"pca", {"dataset", "row", "origin", "label", "pc1", "pc2"}, {}};
    for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
        const auto origin = static_cast<std::size_t>(i) < data.origin.size() ? data.origin[static_cast<std::size_t>(i)]
                                                                             : static_cast<std::size_t>(i);
        t.add({dataset, std::int64_t{i}, static_cast<std::int64_t>(origin), std::int64_t{projection.labels(i)},
               projection.coords(i, 0), projection.coords(i, 1)});
    }
    return t;
}

Table cells_table(const ExperimentResult& result) {
    Table t{"cells",
            {"dataset", "family", "level", "status", "accuracy", "precision", "recall", "f1", "fpr", "variance",
             "lambda", "asr", "fpr_increase", "disagreement", "victims", "seed", "error"},
            {}};
    for (const auto& c : result.cells) {
        const Cell none = std::monostate{};
        auto num = [&](double v) { return c.ok && std::isfinite(v) ? Cell{v} : none; };
        t.add({c.dataset, std::string(to_string(c.family)), c.level, std::string(c.ok ? "ok" : "failed"),
               num(c.metrics.accuracy), num(c.metrics.macro_precision), num(c.metrics.macro_recall),
               num(c.metrics.macro_f1), num(c.metrics.macro_fpr), num(c.metrics.variance), num(c.degradation.lambda),
               num(c.degradation.asr), num(c.degradation.fpr_increase),
               c.disagreement ? num(*c.disagreement) : none,
               c.ok ? Cell{static_cast<std::int64_t>(c.victims.size())} : none, seed_text(c.seed), c.error});
    }
    return t;
}

Table timings_table(const ExperimentResult& result) {
    Table t{"timings", {"dataset", "family", "level", "wall_ms"}, {}};
    for (const auto& c : result.cells) t.add({c.dataset, std::string(to_string(c.family)), c.level, c.wall_ms});
    return t;
}

std::string provenance_json(const ExperimentResult& result, const ExperimentSpec& spec) {
    ordered_json doc;
    doc["version"] = result.provenance.version;
    doc["spec_hash"] = result.provenance.spec_hash;
    doc["master_seed"] = result.provenance.master_seed;
    doc["spec"] = ordered_json::parse(spec_json(spec));
    ordered_json seeds = ordered_json::array();
    for (const auto& s : result.provenance.seeds) seeds.push_back({{"scope", s.scope}, {"seed", s.seed}});
    doc["seeds"] = std::move(seeds);
    ordered_json datasets = ordered_json::array();
    for (const auto& d : result.datasets) {
        datasets.push_back({{"name", d.name},
                            {"rows", d.rows},
                            {"features", d.features},
                            {"classes", d.classes},
                            {"train_rows", d.train_rows},
                            {"test_rows", d.test_rows}});
    }
    doc["datasets"] = std::move(datasets);
    // Victims of each level are a prefix of the deepest level's list.
    ordered_json groups = ordered_json::array();
    const std::size_t n_lvl = spec.levels.size();
    for (std::size_t g = 0; g + n_lvl <= result.cells.size(); g += n_lvl) {
        const CellResult& first = result.cells[g];
        ordered_json levels = ordered_json::array();
        const std::vector<Eigen::Index>* deepest = nullptr;
        for (std::size_t l = 0; l < n_lvl; ++l) {
            const CellResult& c = result.cells[g + l];
            levels.push_back({{"level", c.level}, {"status", c.ok ? "ok" : "failed"}, {"victims", c.victims.size()}});
            if (c.ok) deepest = &c.victims;
        }
        ordered_json item{{"dataset", first.dataset}, {"family", std::string(to_string(first.family))}};
        item["levels"] = std::move(levels);
        item["victim_rows"] = deepest ? *deepest : std::vector<Eigen::Index>{};
        groups.push_back(std::move(item));
    }
    doc["groups"] = std::move(groups);
    doc["analysis_errors"] = result.analysis_errors;
    return doc.dump(2) + "\n";
}

}  // namespace oop
