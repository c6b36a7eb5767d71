#include "oop/models.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace oop {

namespace {

constexpr std::array<std::string_view, 6> family_names{"SVM", "DT", "RF", "KNN", "GNB", "MLP"};

void check_columns(const TrainedModel& model, const Matrix& features) {
    if (features.cols() != model.n_features())
        throw ModelError("dimension mismatch: model expects " + std::to_string(model.n_features()) +
                         " features, got " + std::to_string(features.cols()));
}

}  // namespace

std::string_view to_string(Family f) { return family_names[static_cast<std::size_t>(f)]; }

Family parse_family(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (std::size_t i = 0; i < family_names.size(); ++i) {
        if (upper == family_names[i]) return static_cast<Family>(i);
    }
    throw ModelError("unknown classifier family '" + std::string(name) + "'");
}

ClassifierConfig ClassifierConfig::defaults(Family family, std::uint64_t seed) {
    ClassifierConfig cfg;
    cfg.seed = seed;
    switch (family) {
        case Family::svm: cfg.params = SvmParams{}; break;
        case Family::dt: cfg.params = TreeParams{}; break;
        case Family::rf: cfg.params = ForestParams{}; break;
        case Family::knn: cfg.params = KnnParams{}; break;
        case Family::gnb: cfg.params = GnbParams{}; break;
        case Family::mlp: cfg.params = MlpParams{}; break;
    }
    return cfg;
}

void ClassifierConfig::validate() const {
    struct Check {
        void operator()(const SvmParams& p) const {
            if (!(p.C > 0.0)) throw ModelError("SVM: C must be positive");
            if (p.degree < 1) throw ModelError("SVM: degree must be >= 1");
            if (!(p.tolerance > 0.0)) throw ModelError("SVM: tolerance must be positive");
        }
        void operator()(const TreeParams& p) const {
            if (p.min_samples_split < 2) throw ModelError("DT: min_samples_split must be >= 2");
        }
        void operator()(const ForestParams& p) const {
            if (p.trees < 1) throw ModelError("RF: trees must be >= 1");
            (*this)(p.tree);
        }
        void operator()(const KnnParams& p) const {
            if (p.k < 1) throw ModelError("KNN: k must be >= 1");
        }
        void operator()(const GnbParams& p) const {
            if (!(p.var_smoothing > 0.0)) throw ModelError("GNB: var_smoothing must be positive");
        }
        void operator()(const MlpParams& p) const {
            if (p.hidden < 1 || p.max_epochs < 0 || p.batch_size < 1 || !(p.learning_rate > 0.0))
                throw ModelError("MLP: invalid hyperparameters");
        }
    };
    std::visit(Check{}, params);
}

TrainedModel train(const ClassifierConfig& config, const Dataset& train_set) {
    config.validate();
    validate_schema(train_set);
    const auto counts = train_set.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw DataError("class " + std::to_string(c) + " missing from training set");
    }
    const Matrix& x = train_set.features;
    const Labels& y = train_set.labels;
    const int k = train_set.n_classes;

    ModelState state = std::visit(
        [&](const auto& p) -> ModelState {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SvmParams>) {
                return fit_svm(p, x, y, k);
            } else if constexpr (std::is_same_v<P, TreeParams>) {
                return grow_tree(p, x, y, k, Vector::Ones(x.rows()));
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return fit_forest(p, x, y, k, config.seed);
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                if (p.k > x.rows()) throw ModelError("KNN: k exceeds training-set size");
                return fit_knn(p, x, y);
            } else if constexpr (std::is_same_v<P, GnbParams>) {
                return fit_gnb(p, x, y, k);
            } else {
                return fit_mlp(p, x, y, k, config.seed);
            }
        },
        config.params);
    return TrainedModel(config, k, x.cols(), std::move(state));
}

Labels argmax_rows(const Matrix& scores) {
    Labels out(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) out(i) = static_cast<int>(argmax_first(scores.row(i)));
    return out;
}

Matrix predict_proba(const TrainedModel& model, const Matrix& features) {
    check_columns(model, features);
    const int k = model.n_classes();
    return std::visit(
        [&](const auto& s) -> Matrix {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SvmState>) {
                return softmax_rows(svm_decision(s, features));
            } else if constexpr (std::is_same_v<S, TreeState>) {
                return tree_proba(s, features);
            } else if constexpr (std::is_same_v<S, ForestState>) {
                return forest_votes(s, features, k);
            } else if constexpr (std::is_same_v<S, KnnState>) {
                return knn_votes(s, features, k);
            } else if constexpr (std::is_same_v<S, GnbState>) {
                return gnb_log_proba(s, features).array().exp().matrix();
            } else {
                return softmax_rows(mlp_logits(s, features));
            }
        },
        model.state());
}

Labels predict(const TrainedModel& model, const Matrix& features) {
    check_columns(model, features);
    switch (model.family()) {
        // Score-based families: argmax on raw scores avoids softmax rounding ties.
        case Family::svm: return argmax_rows(svm_decision(model.state_as<SvmState>(), features));
        case Family::mlp: return argmax_rows(mlp_logits(model.state_as<MlpState>(), features));
        case Family::gnb: return argmax_rows(gnb_joint_log_likelihood(model.state_as<GnbState>(), features));
        default: return argmax_rows(predict_proba(model, features));
    }
}

Matrix decision_scores(const TrainedModel& model, const Matrix& features) {
    check_columns(model, features);
    switch (model.family()) {
        case Family::svm: return svm_decision(model.state_as<SvmState>(), features);
        case Family::mlp: return mlp_logits(model.state_as<MlpState>(), features);
        default:
            throw ModelError("decision scores are defined for SVM and MLP only, not " +
                             std::string(to_string(model.family())));
    }
}

double accuracy(const Labels& truth, const Labels& predicted) {
    if (truth.size() == 0) return 0.0;
    return static_cast<double>((truth.array() == predicted.array()).count()) / static_cast<double>(truth.size());
}

Vector permutation_importance(const TrainedModel& model, const Dataset& data, int repeats, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const double baseline = accuracy(data.labels, predict(model, data.features));
    Vector drop = Vector::Zero(d);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    Matrix shuffled = data.features;
    for (Eigen::Index f = 0; f < d; ++f) {
        for (int r = 0; r < repeats; ++r) {
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            std::mt19937_64 rng(mix_seed(seed ^ static_cast<std::uint64_t>(f * repeats + r)));
            std::shuffle(perm.begin(), perm.end(), rng);
            for (Eigen::Index i = 0; i < n; ++i) shuffled(i, f) = data.features(perm[static_cast<std::size_t>(i)], f);
            drop(f) += baseline - accuracy(data.labels, predict(model, shuffled));
        }
        shuffled.col(f) = data.features.col(f);
        drop(f) /= static_cast<double>(repeats);
    }
    return drop;
}

std::vector<FeatureScore> feature_importance(const TrainedModel& model, const Dataset& train_set, int repeats) {
    Vector scores;
    switch (model.family()) {
        case Family::dt: scores = model.state_as<TreeState>().importance; break;
        case Family::rf: scores = forest_importance(model.state_as<ForestState>(), model.n_features()); break;
        default: {
            check_columns(model, train_set.features);
            scores = permutation_importance(model, train_set, repeats, model.config().seed).cwiseMax(0.0);
            const double total = scores.sum();
            if (total > 0.0) scores /= total;
        }
    }
    std::vector<FeatureScore> out;
    for (Eigen::Index f = 0; f < scores.size(); ++f) out.push_back({static_cast<int>(f), scores(f)});
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ModelError("corrupt matrix in model record");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)].get<double>();
    }
    return m;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json tree_to_json(const TreeState& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                         {"depth", n.depth}, {"impurity", n.impurity}, {"weight", n.weight}, {"value", to_json(n.value)}});
    }
    return {{"n_features", t.n_features}, {"n_classes", t.n_classes}, {"importance", to_json(t.importance)},
            {"nodes", std::move(nodes)}};
}

TreeState tree_from(const json& j) {
    TreeState t;
    t.n_features = j.at("n_features").get<Eigen::Index>();
    t.n_classes = j.at("n_classes").get<int>();
    t.importance = vector_from(j.at("importance"));
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature");
        node.threshold = n.at("threshold");
        node.left = n.at("left");
        node.right = n.at("right");
        node.depth = n.at("depth");
        node.impurity = n.at("impurity");
        node.weight = n.at("weight");
        node.value = vector_from(n.at("value"));
        t.nodes.push_back(std::move(node));
    }
    return t;
}

json params_to_json(const Hyperparameters& params) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SvmParams>) {
                return {{"degree", p.degree}, {"C", p.C}, {"gamma", p.gamma}, {"coef0", p.coef0},
                        {"tolerance", p.tolerance}, {"max_iter", p.max_iter}};
            } else if constexpr (std::is_same_v<P, TreeParams>) {
                return {{"impurity", "gini"}, {"min_samples_split", p.min_samples_split}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return {{"trees", p.trees}, {"bootstrap", p.bootstrap}, {"max_features", p.max_features},
                        {"min_samples_split", p.tree.min_samples_split}};
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                return {{"k", p.k}};
            } else if constexpr (std::is_same_v<P, GnbParams>) {
                return {{"var_smoothing", p.var_smoothing}};
            } else {
                return {{"hidden", p.hidden}, {"max_epochs", p.max_epochs}, {"batch_size", p.batch_size},
                        {"learning_rate", p.learning_rate}, {"l2", p.l2}, {"tol", p.tol}, {"patience", p.patience}};
            }
        },
        params);
}

template <typename T>
void take(const json& p, const char* key, T& field) {
    if (auto it = p.find(key); it != p.end()) field = it->get<T>();
}

ClassifierConfig config_from(const json& j) {
    ClassifierConfig cfg = ClassifierConfig::defaults(parse_family(j.at("family").get<std::string>()),
                                                      j.value("seed", std::uint64_t{0}));
    const json p = j.value("params", json::object());
    if (!p.is_object()) throw ModelError("classifier params must be an object");
    const json known = params_to_json(cfg.params);
    for (const auto& [key, value] : p.items()) {
        if (!known.contains(key))
            throw ModelError("unknown " + std::string(to_string(cfg.family())) + " parameter '" + key + "'");
    }
    std::visit(
        [&](auto& q) {
            using P = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<P, SvmParams>) {
                take(p, "degree", q.degree);
                take(p, "C", q.C);
                take(p, "gamma", q.gamma);
                take(p, "coef0", q.coef0);
                take(p, "tolerance", q.tolerance);
                take(p, "max_iter", q.max_iter);
            } else if constexpr (std::is_same_v<P, TreeParams>) {
                if (p.value("impurity", std::string("gini")) != "gini") throw ModelError("DT: only gini impurity");
                take(p, "min_samples_split", q.min_samples_split);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                take(p, "trees", q.trees);
                take(p, "bootstrap", q.bootstrap);
                take(p, "max_features", q.max_features);
                take(p, "min_samples_split", q.tree.min_samples_split);
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                take(p, "k", q.k);
            } else if constexpr (std::is_same_v<P, GnbParams>) {
                take(p, "var_smoothing", q.var_smoothing);
            } else {
                take(p, "hidden", q.hidden);
                take(p, "max_epochs", q.max_epochs);
                take(p, "batch_size", q.batch_size);
                take(p, "learning_rate", q.learning_rate);
                take(p, "l2", q.l2);
                take(p, "tol", q.tol);
                take(p, "patience", q.patience);
            }
        },
        cfg.params);
    return cfg;
}

json config_to_json(const ClassifierConfig& cfg) {
    return {{"family", to_string(cfg.family())}, {"seed", cfg.seed}, {"params", params_to_json(cfg.params)}};
}

}  // namespace

std::string serialize(const TrainedModel& model) {
    json state = std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SvmState>) {
                json machines = json::array();
                for (const auto& m : s.machines) {
                    machines.push_back({{"coef", to_json(m.coef)}, {"rho", m.rho}, {"w_norm_sq", m.w_norm_sq},
                                        {"iterations", m.iterations}, {"kkt_gap", m.kkt_gap}, {"alpha", to_json(m.alpha)}});
                }
                return {{"support", to_json(s.support)}, {"support_rows", s.support_rows}, {"gamma", s.gamma},
                        {"coef0", s.coef0}, {"degree", s.degree}, {"machines", std::move(machines)}};
            } else if constexpr (std::is_same_v<S, TreeState>) {
                return tree_to_json(s);
            } else if constexpr (std::is_same_v<S, ForestState>) {
                json trees = json::array();
                for (const auto& t : s.trees) trees.push_back(tree_to_json(t));
                return {{"trees", std::move(trees)}};
            } else if constexpr (std::is_same_v<S, KnnState>) {
                return {{"points", to_json(Matrix(s.points))},
                        {"labels", std::vector<int>(s.labels.data(), s.labels.data() + s.labels.size())},
                        {"k", s.k}};
            } else if constexpr (std::is_same_v<S, GnbState>) {
                return {{"means", to_json(s.means)}, {"variances", to_json(s.variances)}, {"priors", to_json(s.priors)},
                        {"class_count", to_json(s.class_count)}, {"epsilon", s.epsilon}};
            } else {
                return {{"w1", to_json(s.w1)}, {"b1", to_json(s.b1)}, {"w2", to_json(s.w2)}, {"b2", to_json(s.b2)},
                        {"loss_curve", s.loss_curve}};
            }
        },
        model.state());
    json doc = {{"format", model_format_version},
                {"config", config_to_json(model.config())},
                {"n_classes", model.n_classes()},
                {"n_features", model.n_features()},
                {"state", std::move(state)}};
    return doc.dump();
}

std::string serialize_config(const ClassifierConfig& config) { return config_to_json(config).dump(); }

ClassifierConfig deserialize_config(const std::string& text) {
    try {
        return config_from(json::parse(text));
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed classifier configuration: ") + e.what());
    }
}

TrainedModel deserialize(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ModelError(std::string("model record is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != model_format_version)
        throw ModelError("unsupported model record version '" + doc.value("format", "") + "'");
    try {
        ClassifierConfig cfg = config_from(doc.at("config"));
        const int n_classes = doc.at("n_classes");
        const auto n_features = doc.at("n_features").get<Eigen::Index>();
        const json& s = doc.at("state");
        ModelState state;
        switch (cfg.family()) {
            case Family::svm: {
                SvmState st;
                st.support = matrix_from(s.at("support"));
                st.support_rows = s.at("support_rows").get<std::vector<Eigen::Index>>();
                st.gamma = s.at("gamma");
                st.coef0 = s.at("coef0");
                st.degree = s.at("degree");
                for (const auto& m : s.at("machines")) {
                    BinarySvm b;
                    b.coef = vector_from(m.at("coef"));
                    b.rho = m.at("rho");
                    b.w_norm_sq = m.at("w_norm_sq");
                    b.iterations = m.at("iterations");
                    b.kkt_gap = m.at("kkt_gap");
                    b.alpha = vector_from(m.at("alpha"));
                    st.machines.push_back(std::move(b));
                }
                state = std::move(st);
                break;
            }
            case Family::dt: state = tree_from(s); break;
            case Family::rf: {
                ForestState f;
                for (const auto& t : s.at("trees")) f.trees.push_back(tree_from(t));
                state = std::move(f);
                break;
            }
            case Family::knn: {
                KnnState k;
                k.points = matrix_from(s.at("points"));
                const auto labels = s.at("labels").get<std::vector<int>>();
                k.labels = Eigen::Map<const Labels>(labels.data(), static_cast<Eigen::Index>(labels.size()));
                k.k = s.at("k");
                state = std::move(k);
                break;
            }
            case Family::gnb: {
                GnbState g;
                g.means = matrix_from(s.at("means"));
                g.variances = matrix_from(s.at("variances"));
                g.priors = vector_from(s.at("priors"));
                g.class_count = vector_from(s.at("class_count"));
                g.epsilon = s.at("epsilon");
                state = std::move(g);
                break;
            }
            case Family::mlp: {
                MlpState m;
                m.w1 = matrix_from(s.at("w1"));
                m.b1 = vector_from(s.at("b1"));
                m.w2 = matrix_from(s.at("w2"));
                m.b2 = vector_from(s.at("b2"));
                m.loss_curve = s.at("loss_curve").get<std::vector<double>>();
                state = std::move(m);
                break;
            }
        }
        return TrainedModel(std::move(cfg), n_classes, n_features, std::move(state));
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed model record: ") + e.what());
    }
}

}  // namespace oop
