#ifndef OOP_DATASET_HPP
#define OOP_DATASET_HPP

#include "oop/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oop {

enum class Scaling { none, min_max };

/// Multiclass tabular data. Rows are instances, labels are dense class
/// indices in [0, n_classes).
struct Dataset {
    std::string name;
    Matrix features;
    Labels labels;
    int n_classes = 0;
    std::vector<std::string> feature_names;
    // Original label text for each dense class index.
    std::vector<std::string> class_names;
    // Row index in the source file / parent dataset for each row.
    std::vector<std::size_t> origin;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    /// Throws DataError if any Dataset invariant is broken.
    void validate() const;

    /// Per-class instance counts.
    std::vector<Eigen::Index> class_counts() const;

    /// Rows picked by `indices`, in that order; origin is carried through.
    Dataset subset(const std::vector<Eigen::Index>& indices) const;
};

/// Like validate() but does not require every class to be present.
void validate_schema(const Dataset& d);

struct SplitPair {
    Dataset train;
    Dataset test;
    double ratio = 0.75;
    std::uint64_t seed = 0;
};

struct PairCorrelation {
    int feature_i;
    int feature_j;
    double coefficient;
};

struct CorrelationSummary {
    double spearman = 0.0;
    double p_value = 1.0;
    std::vector<PairCorrelation> per_pair;
    // Features whose column is constant; their pairs are reported as 0.
    std::vector<int> constant_features;
};

struct BlobSpec {
    Vector mean;
    double scale = 1.0;
    Eigen::Index count = 0;
};

struct SynthSpec {
    std::vector<BlobSpec> classes;
    double noise_rate = 0.0;
};

struct Projection {
    Matrix coords;  // rows x 2
    Labels labels;
    Vector explained_variance;  // top two eigenvalues
};

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 Scaling scaling = Scaling::none);

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::optional<Eigen::Index> subsample = std::nullopt, std::uint64_t seed = 0);

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed, std::string name = "synthetic");

SplitPair split(const Dataset& dataset, double ratio, std::uint64_t seed, bool stratified = true);

CorrelationSummary correlation_summary(const Dataset& dataset);

Projection pca_project(const Dataset& dataset);

/// Maps each column to [0,1]; constant columns become 0.
void min_max_scale(Matrix& features);

/// Seeded stratified choice of `count` row indices (ascending order).
std::vector<Eigen::Index> stratified_sample(const Labels& labels, int n_classes, Eigen::Index count,
                                            std::uint64_t seed);

}  // namespace oop

#endif  // OOP_DATASET_HPP
