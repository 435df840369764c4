#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shotlab/config.hpp"
#include "shotlab/errors.hpp"
#include "shotlab/version.hpp"

namespace {

constexpr int kExitCheckFailure = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitNumeric = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shotlab: Monte-Carlo laboratory for shot-noise processes with "
                 "random arrival streams"};
    app.set_version_flag("--version", shotlab::kVersion);

    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::uint64_t replicates = 0;
    unsigned threads = 0;
    bool list_presets = false;

    app.add_option("--config", config_path, "Path to an experiment config (JSON)");
    app.add_option("--preset", preset, "Built-in experiment preset name");
    app.add_option("--seed", seed, "Override the master seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--replicates", replicates, "Override the replicate count");
    app.add_option("--threads", threads,
                   "Worker threads (outputs do not depend on this)");
    app.add_flag("--list-presets", list_presets, "List preset names and exit");

    CLI11_PARSE(app, argc, argv);

    if (list_presets) {
        for (const auto& name : shotlab::preset_names()) std::cout << name << "\n";
        return 0;
    }

    try {
        if (config_path.empty() == preset.empty())
            throw shotlab::config_error("exactly one of --config or --preset is required");

        nlohmann::json doc;
        if (!preset.empty()) {
            doc = shotlab::preset_config(preset);
        } else {
            std::ifstream in(config_path);
            if (!in) throw shotlab::config_error("cannot open config file " + config_path);
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw shotlab::config_error(std::string("config parse error: ") + e.what());
            }
        }

        // Command-line overrides are folded into the document so that the
        // manifest echo reproduces the run. The thread count is an execution
        // detail with no effect on outputs and stays out of the document.
        if (app.count("--seed")) doc["seed"] = seed;
        if (!out_dir.empty()) doc["out"] = out_dir;
        if (app.count("--replicates")) doc["scenario"]["replicates"] = replicates;

        shotlab::ExperimentConfig config = shotlab::parse_config(doc);
        config.preset_name = preset;
        if (app.count("--threads")) {
            if (threads == 0) throw shotlab::config_error("--threads must be >= 1");
            config.threads = threads;
        }
        const shotlab::RunResult result = shotlab::run_experiment(config);
        for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
        std::cout << (result.exit_code == 0 ? "all checks passed" : "some checks FAILED")
                  << "\n";
        return result.exit_code;
    } catch (const shotlab::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const shotlab::degenerate_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const shotlab::numeric_error& e) {
        std::cerr << "numeric error: " << e.what()
                  << " (best estimate " << e.best_estimate << ")\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
