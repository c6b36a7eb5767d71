#ifndef OOP_TESTS_SUPPORT_HPP
#define OOP_TESTS_SUPPORT_HPP

#include "oop/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

namespace oop::testing {

inline std::filesystem::path source_dir() { return OOP_SOURCE_DIR; }

inline std::filesystem::path data_file(const std::string& name) { return source_dir() / "data" / name; }

inline const Dataset& iris() {
    static const Dataset ds = load_csv(data_file("iris.csv"), "species");
    return ds;
}

inline const SplitPair& iris_split() {
    static const SplitPair sp = split(iris(), 0.75, 42);
    return sp;
}

inline Dataset make_dataset(Matrix x, Labels y, int n_classes, std::string name = "fixture") {
    Dataset d;
    d.name = std::move(name);
    d.features = std::move(x);
    d.labels = std::move(y);
    d.n_classes = n_classes;
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
    for (int c = 0; c < n_classes; ++c) d.class_names.push_back(std::to_string(c));
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) d.origin.push_back(static_cast<std::size_t>(i));
    return d;
}

/// Gaussian blobs centred `spacing` apart along the diagonal.
inline Dataset blobs(int n_classes, Eigen::Index per_class, Eigen::Index dims, double spacing, double spread,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, spread);
    Matrix x(n_classes * per_class, dims);
    Labels y(n_classes * per_class);
    for (int c = 0; c < n_classes; ++c) {
        for (Eigen::Index i = 0; i < per_class; ++i) {
            const Eigen::Index r = c * per_class + i;
            for (Eigen::Index j = 0; j < dims; ++j) x(r, j) = spacing * c + normal(rng);
            y(r) = c;
        }
    }
    return make_dataset(std::move(x), std::move(y), n_classes, "blobs");
}

/// Random data with labels drawn uniformly; every class is forced present.
inline Dataset random_dataset(Eigen::Index rows, Eigen::Index dims, int n_classes, std::uint64_t seed,
                              bool integer_grid = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 4);
    std::uniform_int_distribution<int> label(0, n_classes - 1);
    Matrix x(rows, dims);
    Labels y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < dims; ++j) x(i, j) = integer_grid ? grid(rng) : u(rng);
        y(i) = i < n_classes ? static_cast<int>(i) : label(rng);
    }
    return make_dataset(std::move(x), std::move(y), n_classes, "random");
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("oop-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path write(const std::string& name, const std::string& content) const {
        std::ofstream(path / name, std::ios::binary) << content;
        return path / name;
    }
};

}  // namespace oop::testing

#endif  // OOP_TESTS_SUPPORT_HPP
