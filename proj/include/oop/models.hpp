#ifndef OOP_MODELS_HPP
#define OOP_MODELS_HPP

#include "oop/common.hpp"
#include "oop/dataset.hpp"
#include "oop/models/forest.hpp"
#include "oop/models/gnb.hpp"
#include "oop/models/knn.hpp"
#include "oop/models/mlp.hpp"
#include "oop/models/svm.hpp"
#include "oop/models/tree.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace oop {

enum class Family { svm, dt, rf, knn, gnb, mlp };

inline constexpr std::array<Family, 6> all_families{Family::svm, Family::dt, Family::rf,
                                                     Family::knn, Family::gnb, Family::mlp};

std::string_view to_string(Family f);
/// Accepts "SVM", "DT", "RF", "KNN", "GNB", "MLP" (case-insensitive).
Family parse_family(std::string_view name);

// Variant alternatives are ordered like Family.
using Hyperparameters = std::variant<SvmParams, TreeParams, ForestParams, KnnParams, GnbParams, MlpParams>;

struct ClassifierConfig {
    Hyperparameters params;
    std::uint64_t seed = 0;

    Family family() const { return static_cast<Family>(params.index()); }

    /// Fixed surrogate configuration for a family.
    static ClassifierConfig defaults(Family family, std::uint64_t seed = 0);

    void validate() const;
};

using ModelState = std::variant<SvmState, TreeState, ForestState, KnnState, GnbState, MlpState>;

/// A fitted classifier. Immutable after train(); safe for concurrent prediction.
class TrainedModel {
public:
    TrainedModel(ClassifierConfig config, int n_classes, Eigen::Index n_features, ModelState state)
        : config_(std::move(config)), n_classes_(n_classes), n_features_(n_features), state_(std::move(state)) {}

    const ClassifierConfig& config() const { return config_; }
    Family family() const { return config_.family(); }
    int n_classes() const { return n_classes_; }
    Eigen::Index n_features() const { return n_features_; }
    const ModelState& state() const { return state_; }

    template <typename T>
    const T& state_as() const {
        const T* s = std::get_if<T>(&state_);
        if (!s) throw ModelError("model state does not match the requested family");
        return *s;
    }

private:
    ClassifierConfig config_;
    int n_classes_;
    Eigen::Index n_features_;
    ModelState state_;
};

TrainedModel train(const ClassifierConfig& config, const Dataset& train_set);

Labels predict(const TrainedModel& model, const Matrix& features);

/// Rows sum to one; argmax (lowest index on ties) agrees with predict().
Matrix predict_proba(const TrainedModel& model, const Matrix& features);

/// SVM: one-vs-rest signed margins. MLP: pre-softmax activations.
Matrix decision_scores(const TrainedModel& model, const Matrix& features);

struct FeatureScore {
    int feature;
    double score;
};

/// DT/RF: impurity decrease. Other families: permutation importance on `train_set`.
/// Scores are non-negative and sum to one (all zero if the model uses no feature).
std::vector<FeatureScore> feature_importance(const TrainedModel& model, const Dataset& train_set,
                                             int repeats = 5);

/// Mean accuracy drop over seeded column shuffles, one entry per feature (unclamped).
Vector permutation_importance(const TrainedModel& model, const Dataset& data, int repeats, std::uint64_t seed);

double accuracy(const Labels& truth, const Labels& predicted);

/// Row-wise argmax with lowest-index tie-break.
Labels argmax_rows(const Matrix& scores);

// Versioned text serialization; round trip preserves predictions exactly.
inline constexpr std::string_view model_format_version = "oop-model/1";
std::string serialize(const TrainedModel& model);
TrainedModel deserialize(const std::string& text);

/// Canonical JSON text of a configuration: {"family", "seed", "params"}.
std::string serialize_config(const ClassifierConfig& config);

/// Inverse of serialize_config. Missing parameters keep their defaults;
/// unknown parameter names throw ModelError.
ClassifierConfig deserialize_config(const std::string& text);

}  // namespace oop

#endif  // OOP_MODELS_HPP
