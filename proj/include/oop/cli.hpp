#ifndef OOP_CLI_HPP
#define OOP_CLI_HPP

#include "oop/harness.hpp"
#include "oop/table.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oop {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ExperimentSpec spec;
    std::filesystem::path output_dir = "results";
    std::vector<Format> formats{Format::csv};
    bool plot_series = false;
    int threads = 1;
};

/// Parses a JSON run configuration. Relative paths resolve against `base_dir`.
/// Unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path);

/// Environment variable that replaces the configured output directory.
inline constexpr const char* output_env_var = "OOP_OUTPUT_DIR";

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_cell_failed = 2 };

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> output;  // beats the environment and the config
    std::optional<int> threads;
    bool quiet = false;
};

int cmd_run(const CommandOptions& options, std::ostream& log);

int cmd_distances(const CommandOptions& options, const std::string& family, const std::string& dataset,
                  std::ostream& log);

int cmd_plotdata(const std::filesystem::path& result_dir, const std::optional<std::filesystem::path>& output,
                 std::ostream& log);

/// (level, accuracy, precision, recall, f1, fpr) series, one table per
/// (dataset, family) among the successful cells of a cells.csv document.
std::vector<Table> plot_series(std::istream& cells_csv);

}  // namespace oop

#endif  // OOP_CLI_HPP
