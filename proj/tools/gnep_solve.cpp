// Command-line driver: single runs from flags/config, or a batch directory.

#include "gnep/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Safeguarded augmented Lagrangian solver for generalized Nash games"};

    std::string config_path, batch_dir;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--batch", batch_dir, "run every *.cfg in this directory");

    // Flags map one-to-one onto config keys; flags given on the command line
    // override the config file.
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"problem", "catalog name or problem file"},
        {"x0", "preset label (zero, ones, tens, ...) or comma-separated values"},
        {"mode", "general | variational"},
        {"umax", "multiplier safeguard bound"},
        {"rho0", "initial penalty parameter"},
        {"tau", "penalty progress factor(s), comma-separated per player"},
        {"gamma", "penalty increase factor(s), comma-separated per player"},
        {"eps", "stopping tolerance"},
        {"max-outer", "outer iteration limit"},
        {"report", "write the report table to this file"},
        {"trace", "write a JSONL iteration trace to this file"},
        {"seed", "seed for randomly generated catalog problems"},
    };
    std::vector<std::string> values(keys.size());
    std::vector<CLI::Option*> options;
    for (std::size_t i = 0; i < keys.size(); ++i)
        options.push_back(app.add_option("--" + keys[i].first, values[i], keys[i].second));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gnep::kExitUsage;
    }

    try {
        if (!batch_dir.empty()) {
            std::string summary;
            const int code = gnep::run_batch(batch_dir, &summary);
            std::cout << summary;
            return code;
        }
        gnep::KeyValues entries;
        if (!config_path.empty()) entries = gnep::read_config_file(config_path);
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (options[i]->count() > 0) entries.emplace_back(keys[i].first, values[i]);

        const gnep::RunOutcome outcome = gnep::run(gnep::make_run_config(entries));
        if (!outcome.error.empty()) std::cerr << "error: " << outcome.error << '\n';
        std::cout << outcome.report_text;
        return outcome.exit_code;
    } catch (const gnep::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return gnep::kExitUsage;
    }
}
