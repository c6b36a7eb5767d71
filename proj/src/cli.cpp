#include "oop/cli.hpp"

#include "oop/boundary.hpp"
#include "oop/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace oop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T read(const json& obj, const char* key, const std::string& where, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

const json* member(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

Scaling parse_scaling(const std::string& s, const std::string& where) {
    if (s == "none") return Scaling::none;
    if (s == "min-max") return Scaling::min_max;
    throw ConfigError("scaling in " + where + " must be \"none\" or \"min-max\"");
}

DatasetSource parse_dataset(const json& j, const fs::path& base, std::size_t index) {
    const std::string where = "datasets[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const auto type = read<std::string>(j, "type", where, "csv");
    DatasetSource src;
    src.name = read<std::string>(j, "name", where, "");
    if (src.name.empty()) throw ConfigError(where + " needs a non-empty 'name'");
    src.scaling = parse_scaling(read<std::string>(j, "scaling", where, "none"), where);
    if (type == "csv") {
        check_keys(j, {"name", "type", "path", "label_column", "scaling"}, where);
        src.kind = DatasetSource::Kind::csv;
        src.path = resolve(base, read<std::string>(j, "path", where, ""));
        src.label_column = read<std::string>(j, "label_column", where, "label");
    } else if (type == "idx") {
        check_keys(j, {"name", "type", "path", "labels", "subsample", "scaling"}, where);
        src.kind = DatasetSource::Kind::idx;
        src.path = resolve(base, read<std::string>(j, "path", where, ""));
        src.labels_path = resolve(base, read<std::string>(j, "labels", where, ""));
        if (member(j, "subsample")) {
            const auto n = read<long long>(j, "subsample", where, 0);
            if (n < 1) throw ConfigError("'subsample' in " + where + " must be positive");
            src.subsample = static_cast<Eigen::Index>(n);
        }
    } else if (type == "synthetic") {
        check_keys(j, {"name", "type", "classes", "noise_rate", "scaling"}, where);
        src.kind = DatasetSource::Kind::synthetic;
        src.synth.noise_rate = read<double>(j, "noise_rate", where, 0.0);
        const json* classes = member(j, "classes");
        if (!classes || !classes->is_array() || classes->empty())
            throw ConfigError(where + " needs a non-empty 'classes' array");
        for (std::size_t c = 0; c < classes->size(); ++c) {
            const json& blob = (*classes)[c];
            const std::string bw = where + ".classes[" + std::to_string(c) + "]";
            check_keys(blob, {"mean", "scale", "count"}, bw);
            const auto mean = read<std::vector<double>>(blob, "mean", bw, {});
            if (mean.empty()) throw ConfigError(bw + " needs a 'mean' vector");
            BlobSpec spec;
            spec.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
            spec.scale = read<double>(blob, "scale", bw, 1.0);
            spec.count = read<long long>(blob, "count", bw, 0);
            src.synth.classes.push_back(std::move(spec));
        }
    } else {
        throw ConfigError("'type' in " + where + " must be csv, idx or synthetic");
    }
    return src;
}

std::map<Family, Hyperparameters> parse_models(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::map<Family, Hyperparameters> out;
    for (const auto& [name, params] : j.items()) {
        try {
            const Family f = parse_family(name);
            const json doc{{"family", std::string(to_string(f))}, {"seed", 0}, {"params", params}};
            out[f] = deserialize_config(doc.dump()).params;
        } catch (const std::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return out;
}

AnalysisFlags parse_analyses(const json& j) {
    check_keys(j,
               {"k_sweep", "class_probabilities", "feature_importance", "margin_score", "variance_table",
                "disagreement", "correlation", "pca"},
               "analyses");
    AnalysisFlags a;
    a.k_sweep = read<bool>(j, "k_sweep", "analyses", a.k_sweep);
    a.class_probabilities = read<bool>(j, "class_probabilities", "analyses", a.class_probabilities);
    a.feature_importance = read<bool>(j, "feature_importance", "analyses", a.feature_importance);
    a.margin_score = read<bool>(j, "margin_score", "analyses", a.margin_score);
    a.variance_table = read<bool>(j, "variance_table", "analyses", a.variance_table);
    a.disagreement = read<bool>(j, "disagreement", "analyses", a.disagreement);
    a.correlation = read<bool>(j, "correlation", "analyses", a.correlation);
    a.pca = read<bool>(j, "pca", "analyses", a.pca);
    return a;
}

std::string file_stem(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
    return out;
}

fs::path output_dir(const RunConfig& cfg, const CommandOptions& options) {
    if (options.output) return *options.output;
    if (const char* env = std::getenv(output_env_var); env && *env) return env;
    return cfg.output_dir;
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"datasets", "families", "levels", "rule", "split_ratio", "seed", "threads", "analyses", "k_values",
                "importance_repeats", "models", "victim_models", "output"},
               "config");
    RunConfig cfg;
    ExperimentSpec& spec = cfg.spec;

    const json* datasets = member(doc, "datasets");
    if (!datasets || !datasets->is_array()) throw ConfigError("config needs a 'datasets' array");
    for (std::size_t i = 0; i < datasets->size(); ++i) spec.datasets.push_back(parse_dataset((*datasets)[i], base_dir, i));

    if (member(doc, "families")) {
        spec.families.clear();
        for (const auto& name : read<std::vector<std::string>>(doc, "families", "config", {})) {
            try {
                spec.families.push_back(parse_family(name));
            } catch (const ModelError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    spec.levels = read<std::vector<double>>(doc, "levels", "config", spec.levels);
    try {
        spec.rule = RelabelRule::parse(read<std::string>(doc, "rule", "config", "cyclic-next"));
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    spec.split_ratio = read<double>(doc, "split_ratio", "config", spec.split_ratio);
    spec.seed = read<std::uint64_t>(doc, "seed", "config", spec.seed);
    cfg.threads = read<int>(doc, "threads", "config", cfg.threads);
    if (cfg.threads < 1) throw ConfigError("'threads' must be positive");
    if (const json* a = member(doc, "analyses")) spec.analyses = parse_analyses(*a);
    spec.k_values = read<std::vector<int>>(doc, "k_values", "config", spec.k_values);
    spec.importance_repeats = read<int>(doc, "importance_repeats", "config", spec.importance_repeats);
    if (const json* m = member(doc, "models")) spec.surrogate_params = parse_models(*m, "models");
    if (const json* m = member(doc, "victim_models")) spec.victim_params = parse_models(*m, "victim_models");

    if (const json* out = member(doc, "output")) {
        check_keys(*out, {"directory", "formats", "plot_series"}, "output");
        if (member(*out, "directory")) cfg.output_dir = resolve(base_dir, read<std::string>(*out, "directory", "output", ""));
        if (member(*out, "formats")) {
            cfg.formats.clear();
            for (const auto& f : read<std::vector<std::string>>(*out, "formats", "output", {})) {
                if (f == "csv") cfg.formats.push_back(Format::csv);
                else if (f == "json") cfg.formats.push_back(Format::json);
                else throw ConfigError("output format '" + f + "' must be csv or json");
            }
            if (cfg.formats.empty()) throw ConfigError("output formats must not be empty");
        }
        cfg.plot_series = read<bool>(*out, "plot_series", "output", cfg.plot_series);
    } else {
        cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal();
    }

    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::vector<Table> plot_series(std::istream& cells_csv) {
    const auto rows = csv::read(cells_csv);
    if (rows.empty()) throw DataError("cells file is empty");
    const auto& header = rows.front();
    auto col = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("cells file lacks column '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_ds = col("dataset"), c_fam = col("family"), c_lvl = col("level"), c_status = col("status");
    const std::array<std::pair<const char*, std::size_t>, 5> metrics{
        {{"accuracy", col("accuracy")}, {"precision", col("precision")}, {"recall", col("recall")},
         {"f1", col("f1")}, {"fpr", col("fpr")}}};

    std::vector<Table> out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) throw DataError("cells file row " + std::to_string(r) + " is ragged");
        if (row[c_status] != "ok") continue;
        const auto key = std::make_pair(row[c_ds], row[c_fam]);
        auto [it, inserted] = index.emplace(key, out.size());
        if (inserted) {
            out.push_back({"series_" + file_stem(row[c_ds]) + "_" + file_stem(row[c_fam]),
                           {"level", "accuracy", "precision", "recall", "f1", "fpr"},
                           {}});
        }
        std::vector<Cell> values{std::stod(row[c_lvl])};
        for (const auto& [name, c] : metrics) values.emplace_back(std::stod(row[c]));
        out[it->second].add(std::move(values));
    }
    return out;
}

int cmd_run(const CommandOptions& options, std::ostream& log) {
    RunConfig cfg;
    try {
        cfg = load_config(options.config);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_error;
    }
    const fs::path dir = output_dir(cfg, options);
    RunOptions run;
    run.threads = options.threads.value_or(cfg.threads);
    if (!options.quiet) run.log = [&](const std::string& msg) { log << msg << "\n"; };

    ExperimentResult result;
    try {
        result = run_sweep(cfg.spec, run);
        fs::create_directories(dir);
        const Table cells = cells_table(result);
        write_table(cells, dir, cfg.formats);
        write_table(timings_table(result), dir, cfg.formats);
        for (const auto& t : result.tables) write_table(t, dir, cfg.formats);
        write_atomic(dir / "provenance.json", provenance_json(result, cfg.spec));
        if (cfg.plot_series) {
            std::istringstream in(to_csv(cells));
            fs::create_directories(dir / "series");
            for (const auto& t : plot_series(in)) write_table(t, dir / "series", {Format::csv});
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_error;
    }
    const auto failed = std::count_if(result.cells.begin(), result.cells.end(), [](const auto& c) { return !c.ok; });
    for (const auto& e : result.analysis_errors) log << "analysis failed: " << e << "\n";
    log << "wrote " << result.cells.size() << " cells to " << dir.string();
    if (failed) log << " (" << failed << " failed)";
    log << "\n";
    return result.any_failed() ? exit_cell_failed : exit_ok;
}

int cmd_distances(const CommandOptions& options, const std::string& family, const std::string& dataset,
                  std::ostream& log) {
    try {
        const RunConfig cfg = load_config(options.config);
        const ExperimentSpec& spec = cfg.spec;
        const Family fam = parse_family(family);
        const auto it = std::find_if(spec.datasets.begin(), spec.datasets.end(),
                                     [&](const DatasetSource& s) { return s.name == dataset; });
        if (it == spec.datasets.end()) throw ConfigError("no dataset named '" + dataset + "' in the config");

        const Dataset data = load_source(*it, spec.seed);
        const SplitPair sp = split(data, spec.split_ratio, split_seed(spec.seed, dataset));
        const TrainedModel surrogate = train(spec.surrogate_config(fam, model_seed(spec.seed, dataset, fam)), sp.train);
        const DistanceReport report = compute_distances(surrogate, sp.train);
        const auto order = top_outliers(report, report.size());
        std::vector<std::int64_t> rank(order.size());
        for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = std::int64_t(r) + 1;

        Table t{"distances_" + file_stem(dataset) + "_" + file_stem(family), {"index", "origin", "label", "distance", "rank"}, {}};
        for (double level : spec.levels) t.columns.push_back("selected_" + format_number(level));
        for (Eigen::Index i = 0; i < report.size(); ++i) {
            std::vector<Cell> row{std::int64_t{i}, static_cast<std::int64_t>(sp.train.origin[static_cast<std::size_t>(i)]),
                                  std::int64_t{sp.train.labels(i)}, report.distances(i), rank[static_cast<std::size_t>(i)]};
            for (double level : spec.levels)
                row.emplace_back(std::int64_t{rank[static_cast<std::size_t>(i)] <= victim_count(level, report.size())});
            t.add(std::move(row));
        }
        const fs::path dir = output_dir(cfg, options);
        fs::create_directories(dir);
        write_table(t, dir, cfg.formats);
        log << "wrote " << (dir / t.name).string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_plotdata(const fs::path& result_dir, const std::optional<fs::path>& output, std::ostream& log) {
    try {
        std::ifstream in(result_dir / "cells.csv");
        if (!in) throw DataError("missing file " + (result_dir / "cells.csv").string());
        const auto series = plot_series(in);
        const fs::path dir = output.value_or(result_dir / "series");
        fs::create_directories(dir);
        for (const auto& t : series) write_table(t, dir, {Format::csv});
        log << "wrote " << series.size() << " series to " << dir.string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_error;
    }
}

}  // namespace oop
