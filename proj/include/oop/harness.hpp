#ifndef OOP_HARNESS_HPP
#define OOP_HARNESS_HPP

#include "oop/attack.hpp"
#include "oop/dataset.hpp"
#include "oop/metrics.hpp"
#include "oop/models.hpp"
#include "oop/table.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oop {

inline constexpr std::string_view artifact_version = "oop 1.0.0";

struct DatasetSource {
    enum class Kind { csv, idx, synthetic };

    std::string name;
    Kind kind = Kind::csv;
    std::filesystem::path path;  // CSV file, or IDX images
    std::filesystem::path labels_path;  // IDX labels
    std::string label_column = "label";
    Scaling scaling = Scaling::none;
    std::optional<Eigen::Index> subsample;  // IDX only
    SynthSpec synth;  // synthetic only
};

/// Subsampling and synthesis draw their seeds from `master_seed` and the source name.
Dataset load_source(const DatasetSource& source, std::uint64_t master_seed);

struct AnalysisFlags {
    bool k_sweep = false;
    bool class_probabilities = false;
    bool feature_importance = false;
    bool margin_score = false;
    bool variance_table = false;
    bool disagreement = true;
    bool correlation = false;
    bool pca = false;
};

struct ExperimentSpec {
    std::vector<DatasetSource> datasets;
    std::vector<Family> families{all_families.begin(), all_families.end()};
    std::vector<double> levels{0, 5, 10, 15, 20, 25};
    RelabelRule rule;
    double split_ratio = 0.75;
    std::uint64_t seed = 42;
    AnalysisFlags analyses;
    std::vector<int> k_values{3, 5, 10, 15};
    int importance_repeats = 5;
    // Replace the fixed per-family hyperparameters; victim entries model a
    // surrogate/victim configuration mismatch.
    std::map<Family, Hyperparameters> surrogate_params;
    std::map<Family, Hyperparameters> victim_params;

    /// Throws DataError naming the first broken constraint.
    void validate() const;

    ClassifierConfig surrogate_config(Family family, std::uint64_t seed) const;
    ClassifierConfig victim_config(Family family, std::uint64_t seed) const;
};

/// Canonical JSON text of the spec; its hash identifies a run.
std::string spec_json(const ExperimentSpec& spec);

std::string spec_hash(const ExperimentSpec& spec);

/// Seed tags. Training seeds are per (dataset, family) so every level shares
/// one surrogate ranking; the cell seed is recorded on the plan.
std::uint64_t split_seed(std::uint64_t master, const std::string& dataset);
std::uint64_t model_seed(std::uint64_t master, const std::string& dataset, Family family);
std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, Family family, double level);

struct CellResult {
    std::string dataset;
    Family family = Family::svm;
    double level = 0.0;
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    Eigen::Index train_rows = 0;
    MetricsReport metrics;
    Degradation degradation;
    std::optional<double> disagreement;
    double wall_ms = 0.0;
    std::vector<Eigen::Index> victims;  // training-row indices, farthest first
    std::vector<Eigen::Index> flipped;  // rows whose label differs from the clean set
    std::optional<double> margin;  // SVM
    std::optional<Vector> priors;  // GNB
    std::optional<Vector> importance;  // DT, SVM, RF
};

struct SeedRecord {
    std::string scope;
    std::uint64_t seed;
};

struct Provenance {
    std::string spec_hash;
    std::string version{artifact_version};
    std::uint64_t master_seed = 0;
    std::vector<SeedRecord> seeds;
};

struct DatasetInfo {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index features = 0;
    int classes = 0;
    Eigen::Index train_rows = 0;
    Eigen::Index test_rows = 0;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
};

struct ExperimentResult {
    std::vector<CellResult> cells;  // ordered by dataset, family, level as in the spec
    std::vector<Table> tables;  // analysis tables, in a fixed order
    std::vector<DatasetInfo> datasets;
    std::vector<std::string> analysis_errors;
    Provenance provenance;

    bool any_failed() const;
    const CellResult* find(const std::string& dataset, Family family, double level) const;
};

struct RunOptions {
    int threads = 1;
    std::function<void(const std::string&)> log;
};

/// Splits every dataset once, then runs each (dataset, family, level) cell:
/// surrogate, distances, plan, victim, evaluation on the clean test split.
/// Results do not depend on `options.threads`. A failing cell is recorded and
/// the sweep continues.
ExperimentResult run_sweep(const ExperimentSpec& spec, const RunOptions& options = {});

/// Surrogate-side view of one (dataset, family) group: the clean model, its
/// ranking, and the training set it was fitted on.
struct GroupState {
    std::shared_ptr<const TrainedModel> surrogate;
    DistanceReport report;
    std::optional<Matrix> proba;
};

GroupState prepare_group(const Dataset& train_set, const ClassifierConfig& config, const RelabelRule& rule);

// Analysis tables. Each takes the cells of a finished sweep unless noted.

/// KNN test accuracy per (k, level); runs its own KNN pipelines.
Table k_sweep(const std::string& dataset, const SplitPair& data, const std::vector<int>& k_values,
              const std::vector<double>& levels, const RelabelRule& rule, std::uint64_t seed);

/// GNB class priors per level, with each class's rank and a flag when the top class moved.
Table class_probability_drift(const std::vector<CellResult>& cells, const std::vector<DatasetInfo>& datasets);

/// The clean model's top three features tracked across levels (DT, SVM, RF).
Table importance_drift(const std::vector<CellResult>& cells, const std::vector<DatasetInfo>& datasets);

Table variance_table(const std::vector<CellResult>& cells);

Table margin_table(const std::vector<CellResult>& cells);

Table correlation_table(const std::vector<std::pair<std::string, CorrelationSummary>>& summaries);

Table pca_table(const std::string& dataset, const Dataset& data, const Projection& projection);

/// One row per cell: metrics, degradation against level 0, disagreement, seed.
/// Wall times are kept out so that the table is reproducible byte for byte.
Table cells_table(const ExperimentResult& result);

Table timings_table(const ExperimentResult& result);

/// Per-group victims (source-row origins, farthest first) and per-level counts.
std::string provenance_json(const ExperimentResult& result, const ExperimentSpec& spec);

}  // namespace oop

#endif  // OOP_HARNESS_HPP
