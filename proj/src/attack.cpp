#include "oop/attack.hpp"

#include <cmath>
#include <unordered_set>

namespace oop {

RelabelRule RelabelRule::parse(std::string_view text) {
    if (text == "cyclic-next") return cyclic_next();
    if (text == "least-likely") return least_likely();
    constexpr std::string_view prefix = "fixed-target:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string digits(text.substr(prefix.size()));
        std::size_t used = 0;
        int cls = -1;
        try {
            cls = std::stoi(digits, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == digits.size() && !digits.empty() && cls >= 0) return fixed_target(cls);
    }
    throw DataError("unknown relabel rule '" + std::string(text) + "'");
}

std::string RelabelRule::to_string() const {
    switch (kind) {
        case Kind::cyclic_next: return "cyclic-next";
        case Kind::least_likely: return "least-likely";
        case Kind::fixed_target: return "fixed-target:" + std::to_string(target);
    }
    return {};
}

Eigen::Index victim_count(double level, Eigen::Index rows) {
    return static_cast<Eigen::Index>(std::floor(level * static_cast<double>(rows) / 100.0 + 1e-9));
}

PoisonPlan build_plan(const DistanceReport& report, const Dataset& train_set, double level, const RelabelRule& rule,
                      std::uint64_t seed, const Matrix* surrogate_proba) {
    if (!(level >= 0.0 && level < 100.0)) throw DataError("poisoning level must be in [0, 100)");
    if (report.size() != train_set.rows()) throw DataError("distance report is not aligned to the training set");
    const int k = train_set.n_classes;
    if (k < 2) throw DataError("relabeling needs at least two classes");
    if (rule.kind == RelabelRule::Kind::fixed_target && (rule.target < 0 || rule.target >= k))
        throw DataError("fixed-target class " + std::to_string(rule.target) + " outside the class inventory");
    if (rule.kind == RelabelRule::Kind::least_likely &&
        (!surrogate_proba || surrogate_proba->rows() != train_set.rows() || surrogate_proba->cols() != k))
        throw DataError("least-likely relabeling needs surrogate class probabilities for every training row");

    PoisonPlan plan;
    plan.level = level;
    plan.rule = rule;
    plan.seed = seed;
    plan.victims = top_outliers(report, victim_count(level, train_set.rows()));
    plan.reassignments.reserve(plan.victims.size());
    for (Eigen::Index i : plan.victims) {
        const int old_label = train_set.labels(i);
        const int cyclic = (old_label + 1) % k;
        int new_label = cyclic;
        if (rule.kind == RelabelRule::Kind::least_likely) {
            new_label = static_cast<int>(argmin_first(surrogate_proba->row(i)));
        } else if (rule.kind == RelabelRule::Kind::fixed_target) {
            new_label = rule.target;
        }
        if (new_label == old_label) new_label = cyclic;
        plan.reassignments.push_back({i, old_label, new_label});
    }
    return plan;
}

PoisonedDataset apply_plan(const Dataset& train_set, const PoisonPlan& plan) {
    if (plan.victims.size() != plan.reassignments.size()) throw DataError("malformed plan");
    std::unordered_set<Eigen::Index> seen;
    PoisonedDataset out{train_set.labels, plan, train_set};
    for (const auto& r : plan.reassignments) {
        if (r.index < 0 || r.index >= train_set.rows()) throw DataError("plan index out of range");
        if (!seen.insert(r.index).second) throw DataError("plan names a row twice");
        if (train_set.labels(r.index) != r.old_label)
            throw DataError("stale plan: row " + std::to_string(r.index) + " no longer has label " +
                            std::to_string(r.old_label));
        if (r.new_label == r.old_label || r.new_label < 0 || r.new_label >= train_set.n_classes)
            throw DataError("invalid reassignment for row " + std::to_string(r.index));
        out.data.labels(r.index) = r.new_label;
    }
    return out;
}

PipelineResult poison_with_surrogate(const Dataset& train_set, std::shared_ptr<const TrainedModel> surrogate,
                                     const DistanceReport& report, const Matrix* surrogate_proba, double level,
                                     const RelabelRule& rule, const ClassifierConfig& victim_config) {
    PipelineResult out;
    out.surrogate = std::move(surrogate);
    out.report = report;
    out.plan = build_plan(report, train_set, level, rule, victim_config.seed, surrogate_proba);
    out.poisoned = apply_plan(train_set, out.plan);
    const bool same_config = serialize_config(victim_config) == serialize_config(out.surrogate->config());
    if (out.plan.victims.empty() && same_config) {
        out.victim = out.surrogate;
    } else {
        out.victim = std::make_shared<const TrainedModel>(train(victim_config, out.poisoned.data));
    }
    return out;
}

PipelineResult poison_pipeline(const Dataset& train_set, const ClassifierConfig& surrogate_config, double level,
                               const RelabelRule& rule, const std::optional<ClassifierConfig>& victim_config) {
    auto surrogate = std::make_shared<const TrainedModel>(train(surrogate_config, train_set));
    const DistanceReport report = compute_distances(*surrogate, train_set);
    std::optional<Matrix> proba;
    if (rule.kind == RelabelRule::Kind::least_likely) proba = predict_proba(*surrogate, train_set.features);
    return poison_with_surrogate(train_set, std::move(surrogate), report, proba ? &*proba : nullptr, level, rule,
                                 victim_config.value_or(surrogate_config));
}

PipelineResult poison_pipeline(const Dataset& train_set, Family family, double level, const RelabelRule& rule,
                               std::uint64_t seed) {
    return poison_pipeline(train_set, ClassifierConfig::defaults(family, seed), level, rule);
}

}  // namespace oop
