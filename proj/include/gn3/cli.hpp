#pragma once

// Batch front end. Configs are flat `key = value` text with `#` comments;
// scenario parameters use dotted keys (`scenario.rate = 0.5`). Every key can
// also be set through the environment as GN3_<KEY>, upper case with dots
// replaced by underscores (GN3_SCENARIO_RATE); environment values win over
// the file.
//
// Exit codes: 0 ok, 1 check failure, 2 usage or config error, 3 numerical failure.

#include "gn3/error.hpp"
#include "gn3/experiments.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gn3 {

enum class Command { Simulate, Sweep, Rates, Mms, Energy };

[[nodiscard]] std::string to_string(Command c);

class ConfigError : public Error {
public:
    ConfigError(const std::string& message, std::string key, int line = 0);
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

struct ScenarioOverrides {
    std::optional<std::string> graph;
    std::optional<double> beta, rate, kappa, kappa0, kappa1, lo, hi, length, epsilon;
    friend bool operator==(const ScenarioOverrides&, const ScenarioOverrides&) = default;
};

struct RunConfig {
    Command command = Command::Simulate;
    std::string scenario;
    ScenarioOverrides overrides;
    std::size_t n_nodes = 257;
    double tau = 1e-3;
    std::optional<std::size_t> steps;
    std::optional<double> final_time;
    double alpha = 0.0;
    std::vector<double> alphas = default_alphas();
    std::vector<std::string> norms{"all"};
    std::string output = ".";
    unsigned workers = 1;
    std::uint64_t seed = 0;  ///< reserved; the solver is deterministic
    std::size_t stride = 1;  ///< time levels written to trajectory.csv
    std::vector<double> mms_taus = MmsOptions{}.taus;
    std::vector<std::size_t> mms_nodes = MmsOptions{}.node_counts;
    double mms_space_tau = MmsOptions{}.space_study_tau;
    double mms_alpha = MmsOptions{}.alpha;

    /// Number of steps implied by (M, T, tau).
    [[nodiscard]] std::size_t resolved_steps() const;
    /// Registry scenario with the overrides and the grid/time keys applied.
    [[nodiscard]] Scenario build_scenario() const;
    [[nodiscard]] MmsOptions mms_options() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Throws ConfigError naming the key (and the line, for file entries).
[[nodiscard]] RunConfig parse_config(const std::string& text, const EnvLookup& env = {});
/// Text that parse_config maps back to the same RunConfig.
[[nodiscard]] std::string render(const RunConfig& config);
/// GN3_ environment name of a config key.
[[nodiscard]] std::string env_name(const std::string& key);
[[nodiscard]] std::vector<std::string> config_keys();

struct RunOptions {
    bool check = false;
    std::optional<std::string> out_dir;
    std::optional<unsigned> workers;
};

/// Executes the command, writes its CSV under the output directory and one
/// summary line per check to `out`. Returns the exit code; never throws.
int run(const RunConfig& config, const RunOptions& options, std::ostream& out, std::ostream& err);

/// argv front end: [command] --config <path> [--check] [--out <dir>] [--workers <n>].
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gn3
