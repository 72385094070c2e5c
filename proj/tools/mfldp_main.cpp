#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mfldp/config.hpp"
#include "mfldp/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mfldp: particle SGD, mean-field limits and large-deviation experiments"};
    app.require_subcommand(1);

    const std::vector<std::string> experiments = {"simulate", "meanfield", "lln",       "rate_I",
                                                  "rate_J",   "importance", "decay",    "check"};
    struct Args {
        std::string config_path;
        std::string out_dir;
        int workers = 0;
        bool checked = false;
    };
    std::vector<std::pair<std::string, Args>> subs;
    subs.reserve(experiments.size());
    for (const auto& name : experiments) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        subs.emplace_back(name, Args{});
        Args& args = subs.back().second;
        sub->add_option("--config", args.config_path, "JSON config file")->required();
        sub->add_option("--out", args.out_dir, "output directory override");
        sub->add_option("--workers", args.workers, "worker threads for replica-parallel tasks");
        sub->add_flag("--checked", args.checked, "checked mode: single worker, exact summation");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [name, args] : subs) {
        if (!app.get_subcommand(name)->parsed()) continue;
        try {
            mfldp::RunConfig cfg = mfldp::parse_config_file(args.config_path);
            cfg.experiment = mfldp::experiment_from_name(name);
            if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
            if (args.workers > 0) cfg.workers = args.workers;
            if (args.checked) {
                cfg.checked = true;
                cfg.workers = 1;
            }
            if (cfg.seed_defaulted)
                std::fprintf(stderr, "warning: no seed in config, defaulting to 0\n");
            const mfldp::RunOutcome outcome = mfldp::run(cfg);
            if (outcome.exit_code != 0)
                std::fprintf(stderr, "{\"status\":\"error\",\"reason\":\"%s\"}\n",
                             outcome.status.c_str());
            return outcome.exit_code;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "{\"status\":\"error\",\"reason\":\"%s\"}\n", e.what());
            return 1;
        }
    }
    return 1;
}
