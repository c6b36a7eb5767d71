#include "oop/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Outlier-oriented label-flipping experiments"};
    app.require_subcommand(1);

    oop::CommandOptions run_opts;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
    run->add_option("config", run_opts.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", out_dir, "Output directory (overrides config and OOP_OUTPUT_DIR)");
    run->add_option("-j,--threads", run_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("-q,--quiet", run_opts.quiet, "Only report the summary line");

    oop::CommandOptions dist_opts;
    std::string family;
    std::string dataset;
    auto* dist = app.add_subcommand("distances", "Write the surrogate's boundary distances for one dataset");
    dist->add_option("config", dist_opts.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    dist->add_option("-f,--family", family, "SVM, DT, RF, KNN, GNB or MLP")->required();
    dist->add_option("-d,--dataset", dataset, "Dataset name from the config")->required();
    dist->add_option("-o,--output", out_dir, "Output directory");

    std::string result_dir;
    auto* plot = app.add_subcommand("plotdata", "Write per-panel metric series from a finished run");
    plot->add_option("result_dir", result_dir, "Directory holding cells.csv")->required();
    plot->add_option("-o,--output", out_dir, "Series directory (default <result_dir>/series)");

    CLI11_PARSE(app, argc, argv);

    std::optional<std::filesystem::path> output;
    if (!out_dir.empty()) output = out_dir;
    if (*run) {
        run_opts.output = output;
        return oop::cmd_run(run_opts, std::cerr);
    }
    if (*dist) {
        dist_opts.output = output;
        return oop::cmd_distances(dist_opts, family, dataset, std::cerr);
    }
    return oop::cmd_plotdata(result_dir, output, std::cerr);
}
