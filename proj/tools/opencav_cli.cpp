// opencav: transmission studies for open tight-binding cavities.
//
//   opencav <transmit|spectrum|rigidity|ep-find|delay|crossover> --config run.json [--out file.csv]
//           [--threads N] [--grid-override key=value]...
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "opencav/studies.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw opencav::ValidationError("--config", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission and exceptional points of open tight-binding cavities"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_path;
    unsigned threads = 0;
    std::vector<std::string> overrides;

    for (const char* name : {"transmit", "spectrum", "rigidity", "ep-find", "delay", "crossover"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " study");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "CSV output path (overrides output_path)");
        sub->add_option("--threads", threads, "worker threads (default: available parallelism)");
        sub->add_option("--grid-override", overrides, "dotted key=value applied before validation");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }
    const std::string study_name = app.get_subcommands().front()->get_name();

    try {
        const std::string text = read_file(config_path);
        const auto base = std::filesystem::path(config_path).parent_path().string();
        auto cfg = opencav::parse_config(text, overrides, base);
        cfg.study = *opencav::study_from_name(study_name);
        if (!out_path.empty()) cfg.output_path = out_path;
        if (cfg.output_path.empty()) cfg.output_path = study_name + ".csv";

        opencav::RunOptions opts;
        opts.threads = threads;
        opencav::SweepResult result;
        int status = kOk;
        if (cfg.study == opencav::Study::EpFind) {
            try {
                result = opencav::run_ep_study(cfg, opts, &result);
            } catch (const opencav::NotFound& e) {
                std::cerr << "opencav: " << e.what() << "\n";
                status = kNumerical;
            }
        } else {
            result = opencav::run_study(cfg, opts);
        }
        opencav::export_csv(result, cfg.output_path);
        std::cerr << "opencav: wrote " << result.rows() << " rows to " << cfg.output_path << " in "
                  << result.wall_seconds << " s\n";
        return status;
    } catch (const opencav::ParseError& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kConfig;
    } catch (const opencav::ValidationError& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kConfig;
    } catch (const opencav::InvalidGeometry& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kConfig;
    } catch (const opencav::WriteError& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kIo;
    } catch (const opencav::NumericalError& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "opencav: " << e.what() << "\n";
        return kNumerical;
    }
}
