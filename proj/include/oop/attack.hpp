#ifndef OOP_ATTACK_HPP
#define OOP_ATTACK_HPP

#include "oop/boundary.hpp"
#include "oop/dataset.hpp"
#include "oop/models.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oop {

/// How a victim's new (wrong) class is chosen.
struct RelabelRule {
    enum class Kind { cyclic_next, least_likely, fixed_target };
    Kind kind = Kind::cyclic_next;
    int target = 0;  // fixed_target only

    static RelabelRule cyclic_next() { return {}; }
    static RelabelRule least_likely() { return {Kind::least_likely, 0}; }
    static RelabelRule fixed_target(int cls) { return {Kind::fixed_target, cls}; }

    /// "cyclic-next", "least-likely" or "fixed-target:<class>".
    static RelabelRule parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const RelabelRule&) const = default;
};

struct Reassignment {
    Eigen::Index index;
    int old_label;
    int new_label;
};

struct PoisonPlan {
    double level = 0.0;  // percent of training rows
    std::vector<Eigen::Index> victims;  // farthest first
    std::vector<Reassignment> reassignments;  // aligned to victims
    RelabelRule rule;
    std::uint64_t seed = 0;
};

/// floor(level / 100 * rows), robust to decimal levels such as 15.
Eigen::Index victim_count(double level, Eigen::Index rows);

/// Victims are top_outliers(report, victim_count(level, rows)). `surrogate_proba`
/// (rows x n_classes) is required by the least-likely rule and ignored otherwise.
PoisonPlan build_plan(const DistanceReport& report, const Dataset& train_set, double level, const RelabelRule& rule,
                      std::uint64_t seed, const Matrix* surrogate_proba = nullptr);

/// Training set with flipped labels; features are a verbatim copy of the base.
struct PoisonedDataset {
    Labels base_labels;
    PoisonPlan plan;
    Dataset data;
};

/// Pure; throws DataError if the plan's old labels do not match `train_set`.
PoisonedDataset apply_plan(const Dataset& train_set, const PoisonPlan& plan);

struct PipelineResult {
    std::shared_ptr<const TrainedModel> surrogate;
    DistanceReport report;
    PoisonPlan plan;
    PoisonedDataset poisoned;
    std::shared_ptr<const TrainedModel> victim;  // the surrogate itself when nothing was flipped
};

/// Surrogate with `surrogate_config`, distances, plan, retrained victim with
/// `victim_config` (defaults to the surrogate's).
PipelineResult poison_pipeline(const Dataset& train_set, const ClassifierConfig& surrogate_config, double level,
                               const RelabelRule& rule,
                               const std::optional<ClassifierConfig>& victim_config = std::nullopt);

PipelineResult poison_pipeline(const Dataset& train_set, Family family, double level, const RelabelRule& rule,
                               std::uint64_t seed);

/// The stages after the surrogate is known; lets callers share one surrogate across levels.
PipelineResult poison_with_surrogate(const Dataset& train_set, std::shared_ptr<const TrainedModel> surrogate,
                                     const DistanceReport& report, const Matrix* surrogate_proba, double level,
                                     const RelabelRule& rule, const ClassifierConfig& victim_config);

}  // namespace oop

#endif  // OOP_ATTACK_HPP
