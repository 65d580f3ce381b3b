// plasmon-qi <command> --config <path> [--out <dir>] [--cache <dir>] [--threads k]
//
// exit 0 on success, 1 for bad input (config, validation, cache mismatch), 2 when a
// numerical stage fails.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plasmon_qi/commands.hpp"

int main(int argc, char** argv) {
    using namespace plasmon_qi;

    CLI::App app{"Emitter dynamics and entanglement near a metallic nanowire"};
    app.set_version_flag("--version", std::string(config::kGeneratorVersion));

    std::string command, config_path, out_dir = ".", cache_dir;
    int threads = 0;
    app.add_option("command", command, "spectral-density | bound-states | dynamics | steady-state | entanglement | sweep")
        ->required()
        ->check(CLI::IsMember(commands::command_names()));
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "directory for <command>.csv / <command>.json");
    app.add_option("--cache", cache_dir, "spectral table cache (default: $PLASMON_QI_CACHE)");
    app.add_option("--threads", threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto cfg = config::load_config(config_path);
        const auto record = commands::run_command(command, cfg, {cache_dir, threads});
        for (const auto& path : records::write_record(record, out_dir, cfg.outputs)) std::cout << path << '\n';
        const auto& w = record.metadata.contains("warnings") ? record.metadata["warnings"] : nlohmann::json::array();
        for (const auto& s : w) std::cerr << "warning: " << s.get<std::string>() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "plasmon-qi: " << e.what() << '\n';
        return commands::exit_code_for(e);
    }
}
