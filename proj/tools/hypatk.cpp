// hypatk generate|train|sweep|report --config <path> [--output-dir <path>] [--emit-svg]

#include "hypatk/config.hpp"
#include "hypatk/error.hpp"
#include "hypatk/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic adversarial attack toolkit"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string output_dir;
    bool emit_svg = false;

    using Command = std::function<void(const hypatk::config::RunConfig&, std::ostream&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands = {
        {"generate", {"Sample the train and test splits", hypatk::pipeline::cmd_generate}},
        {"train", {"Train the hyperbolic MLR classifier", hypatk::pipeline::cmd_train}},
        {"sweep", {"Attack the test split over the epsilon grid", hypatk::pipeline::cmd_sweep}},
        {"report", {"Misclassification matrices and decision regions", hypatk::pipeline::cmd_report}},
    };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--output-dir", output_dir, "Overrides output_dir from the configuration");
        sub->add_flag("--emit-svg", emit_svg, "Also write SVG renderings");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(hypatk::Error::Category::Config);
    }

    try {
        hypatk::config::RunConfig cfg = hypatk::config::load_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (emit_svg) cfg.emit_svg = true;
        const std::string name = app.get_subcommands().front()->get_name();
        commands.at(name).second(cfg, std::cout);
        return 0;
    } catch (const hypatk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(hypatk::Error::Category::Data);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(hypatk::Error::Category::Numeric);
    }
}
