#include "oop/cli.hpp"

#include "doctest.h"
#include "support.hpp"

#include "json.hpp"

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

using namespace oop;
using namespace oop::testing;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string knn_config(const std::string& extra = "") {
    return R"({"datasets": [{"name": "iris", "type": "csv", "path": ")" + data_file("iris.csv").string() +
           R"(", "label_column": "species"}], "families": ["KNN"], "levels": [0, 10])" + extra + "}";
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(OOP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct EnvGuard {
    EnvGuard(const char* value) { ::setenv(output_env_var, value, 1); }
    ~EnvGuard() { ::unsetenv(output_env_var); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(knn_config(R"(, "rule": "fixed-target:2", "seed": 7, "threads": 3,
        "analyses": {"k_sweep": true}, "models": {"KNN": {"k": 7}},
        "output": {"directory": "out", "formats": ["csv", "json"]})"),
                                       "/base");
    CHECK(cfg.spec.families == std::vector<Family>{Family::knn});
    CHECK(cfg.spec.levels == std::vector<double>{0, 10});
    CHECK(cfg.spec.rule == RelabelRule::fixed_target(2));
    CHECK(cfg.spec.seed == 7);
    CHECK(cfg.threads == 3);
    CHECK(cfg.spec.analyses.k_sweep);
    CHECK(cfg.spec.analyses.disagreement);
    CHECK(std::get<KnnParams>(cfg.spec.surrogate_params.at(Family::knn)).k == 7);
    CHECK(cfg.output_dir == fs::path("/base/out"));
    CHECK(cfg.formats.size() == 2);

    const RunConfig minimal = parse_config(knn_config(), "/base/configs");
    CHECK(minimal.output_dir == fs::path("/base/configs/results"));
    CHECK(minimal.spec.seed == 42);
    CHECK(minimal.formats == std::vector<Format>{Format::csv});
}

TEST_CASE("config errors name the problem") {
    CHECK_THROWS_WITH_AS(parse_config(knn_config(R"(, "lvels": [0])"), "."),
                         doctest::Contains("unknown key 'lvels' in config"), ConfigError);
    CHECK_THROWS_AS(parse_config("{", "."), ConfigError);
    CHECK_THROWS_AS(parse_config("{}", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "levels": "zero")"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "levels": [5, 10])"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "rule": "random")"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "models": {"KNN": {"kk": 3}})"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "output": {"formats": ["xml"]})"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(knn_config(R"(, "analyses": {"pcaa": true})"), "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"datasets": [{"name": "x", "type": "parquet"}]})", "."), ConfigError);
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"iris.json", "iris_knn.json", "mnist.json", "synthetic.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(source_dir() / "configs" / name));
    }
}

TEST_CASE("run writes every artifact") {
    TempDir tmp;
    const auto cfg = tmp.write("c.json", knn_config(R"(, "analyses": {"k_sweep": true, "variance_table": true},
        "output": {"directory": "res", "formats": ["csv", "json"], "plot_series": true})"));
    std::ostringstream log;
    CHECK(cmd_run({cfg, std::nullopt, std::nullopt, true}, log) == exit_ok);
    for (const char* f : {"cells.csv", "cells.json", "timings.csv", "k_sweep.csv", "variance.json", "provenance.json",
                          "series/series_iris_KNN.csv"})
        CHECK(fs::exists(tmp.path / "res" / f));
    const std::string cells = read_file(tmp.path / "res" / "cells.csv");
    CHECK(cells.rfind("dataset,family,level,status,", 0) == 0);
    CHECK(nlohmann::json::parse(read_file(tmp.path / "res" / "cells.json")).size() == 2);

    // A second run reproduces cells.csv exactly.
    CHECK(cmd_run({cfg, tmp.path / "again", 2, true}, log) == exit_ok);
    CHECK(read_file(tmp.path / "again" / "cells.csv") == cells);
}

TEST_CASE("output directory precedence") {
    TempDir tmp;
    const auto cfg = tmp.write("c.json", knn_config(R"(, "output": {"directory": "from_config"})"));
    std::ostringstream log;
    {
        EnvGuard env((tmp.path / "from_env").c_str());
        CHECK(cmd_run({cfg, std::nullopt, std::nullopt, true}, log) == exit_ok);
        CHECK(fs::exists(tmp.path / "from_env" / "cells.csv"));
        CHECK(cmd_run({cfg, tmp.path / "from_flag", std::nullopt, true}, log) == exit_ok);
        CHECK(fs::exists(tmp.path / "from_flag" / "cells.csv"));
    }
    CHECK_FALSE(fs::exists(tmp.path / "from_config"));
    CHECK(cmd_run({cfg, std::nullopt, std::nullopt, true}, log) == exit_ok);
    CHECK(fs::exists(tmp.path / "from_config" / "cells.csv"));
}

TEST_CASE("exit codes") {
    TempDir tmp;
    const auto good = tmp.write("good.json", knn_config(R"(, "output": {"directory": "ok"})"));
    const auto bad = tmp.write("bad.json", knn_config(R"(, "lvels": [0], "output": {"directory": "bad"})"));
    const auto failing = tmp.write(
        "fail.json", R"({"datasets": [{"name": "iris", "type": "csv", "path": ")" + data_file("iris.csv").string() +
                         R"(", "label_column": "species"}], "families": ["SVM"], "levels": [0, 5],
                         "victim_models": {"SVM": {"max_iter": 1}}, "output": {"directory": "fail"}})");
    CHECK(run_binary("run -q " + good.string()) == 0);
    CHECK(run_binary("run -q " + bad.string()) == 1);
    CHECK_FALSE(fs::exists(tmp.path / "bad"));
    CHECK(run_binary("run -q " + failing.string()) == 2);
    CHECK(fs::exists(tmp.path / "fail" / "cells.csv"));
    CHECK(run_binary("plotdata " + (tmp.path / "nowhere").string()) == 1);
    CHECK(run_binary("frobnicate") != 0);
}

TEST_CASE("plot series from cells") {
    std::istringstream in(
        "dataset,family,level,status,accuracy,precision,recall,f1,fpr\n"
        "iris,KNN,0,ok,0.9,0.8,0.7,0.75,0.05\n"
        "iris,KNN,5,failed,,,,,\n"
        "iris,KNN,10,ok,0.8,0.7,0.6,0.65,0.1\n"
        "iris,DT,0,ok,1,1,1,1,0\n");
    const auto series = plot_series(in);
    REQUIRE(series.size() == 2);
    CHECK(series[0].name == "series_iris_KNN");
    CHECK(series[0].rows.size() == 2);
    CHECK(to_csv(series[0]) == "level,accuracy,precision,recall,f1,fpr\n0,0.9,0.8,0.7,0.75,0.05\n10,0.8,0.7,0.6,0.65,0.1\n");

    std::istringstream missing("dataset,family\niris,KNN\n");
    CHECK_THROWS_AS(plot_series(missing), DataError);
}

TEST_CASE("plotdata command") {
    TempDir tmp;
    const auto cfg = tmp.write("c.json", knn_config(R"(, "output": {"directory": "res"})"));
    std::ostringstream log;
    REQUIRE(cmd_run({cfg, std::nullopt, std::nullopt, true}, log) == exit_ok);
    CHECK(cmd_plotdata(tmp.path / "res", std::nullopt, log) == exit_ok);
    CHECK(fs::exists(tmp.path / "res" / "series" / "series_iris_KNN.csv"));
    CHECK(cmd_plotdata(tmp.path / "empty", std::nullopt, log) == exit_error);
}

TEST_CASE("distances command") {
    TempDir tmp;
    const auto cfg = tmp.write("c.json", knn_config(R"(, "output": {"directory": "res"})"));
    std::ostringstream log;
    CHECK(cmd_distances({cfg, tmp.path / "d", std::nullopt, true}, "KNN", "iris", log) == exit_ok);
    const fs::path file = tmp.path / "d" / "distances_iris_KNN.csv";
    REQUIRE(fs::exists(file));
    std::istringstream text(read_file(file));
    std::string header;
    std::getline(text, header);
    CHECK(header == "index,origin,label,distance,rank,selected_0,selected_10");
    int rows = 0, selected = 0;
    for (std::string line; std::getline(text, line);) {
        ++rows;
        selected += line.back() == '1';
    }
    CHECK(rows == 112);
    CHECK(selected == 11);
    CHECK(cmd_distances({cfg, tmp.path / "d", std::nullopt, true}, "XGB", "iris", log) == exit_error);
    CHECK(cmd_distances({cfg, tmp.path / "d", std::nullopt, true}, "KNN", "nope", log) == exit_error);
}

}
