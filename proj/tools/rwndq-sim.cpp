// Batch front-end: parse a scenario file, run the fluid model or a packet
// simulation (single or A/B against DropTail), write CSV reports and a
// textual summary under the output directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "rwndq/errors.hpp"
#include "rwndq/fluid.hpp"
#include "rwndq/runner.hpp"
#include "rwndq/sim/engine.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> g_written;

void track(const std::vector<fs::path>& paths) {
    g_written.insert(g_written.end(), paths.begin(), paths.end());
}

void remove_partial_outputs() {
    for (const auto& p : g_written) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        throw rwndq::Error("cannot write " + path.string());
    }
    out << text;
    g_written.push_back(path);
}

std::string fluid_summary(const rwndq::FluidConfig& cfg,
                          const std::vector<rwndq::FluidSample>& series) {
    std::ostringstream out;
    out << "samples: " << series.size() << "\n";
    out << "target_bytes: " << cfg.target_bytes() << "\n";
    auto mean = rwndq::mean_queue_series(series);
    if (!mean.empty()) {
        out << "final_mean_queue_bytes: " << mean.back().queue << "\n";
        auto conv = rwndq::convergence_time(mean, cfg.target_bytes(), 0.1);
        if (conv) {
            out << "mean_queue_convergence_time: " << *conv << "\n";
        } else {
            out << "mean_queue_convergence_time: not converged\n";
        }
        out << "final_window_bytes: " << series.back().window << "\n";
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"receive-window fair-share queue management simulator"};

    std::string scenario_path;
    std::string mode_override;
    std::string out_dir = "out";
    int64_t seed_override = -1;
    bool quiet = false;

    app.add_option("--scenario", scenario_path, "scenario file")->required();
    app.add_option("--mode", mode_override, "override run mode (fluid|sim|ab_compare)");
    app.add_option("--seed", seed_override, "override the scenario seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("RWNDQ_SIM_OUT")) {
        out_dir = env;
    }

    try {
        std::ifstream in(scenario_path);
        if (!in) {
            throw rwndq::Error("cannot read scenario file " + scenario_path);
        }
        std::stringstream buf;
        buf << in.rdbuf();
        rwndq::RunSpec spec = rwndq::parse_scenario(buf.str());

        if (!mode_override.empty()) {
            if (mode_override == "fluid") spec.mode = rwndq::RunMode::Fluid;
            else if (mode_override == "sim") spec.mode = rwndq::RunMode::Sim;
            else if (mode_override == "ab_compare") spec.mode = rwndq::RunMode::AbCompare;
            else throw rwndq::ValidationError("mode", "must be fluid, sim or ab_compare");
        }
        if (seed_override >= 0) {
            spec.scenario.seed = static_cast<uint64_t>(seed_override);
        }

        const fs::path out_root(out_dir);
        switch (spec.mode) {
            case rwndq::RunMode::Fluid: {
                auto series = rwndq::run_fluid(spec.fluid);
                fs::create_directories(out_root);
                std::ofstream csv(out_root / "fluid.csv");
                if (!csv) {
                    throw rwndq::Error("cannot write fluid.csv");
                }
                rwndq::write_fluid_csv(csv, series);
                g_written.push_back(out_root / "fluid.csv");
                write_text(out_root / "summary.txt", fluid_summary(spec.fluid, series));
                if (!quiet) {
                    std::cout << "fluid run: " << series.size() << " samples -> "
                              << out_root.string() << "\n";
                }
                break;
            }
            case rwndq::RunMode::Sim: {
                auto report = rwndq::sim::run_scenario(spec.scenario);
                track(rwndq::write_report_files(out_root, report));
                if (!quiet) {
                    std::cout << "sim run: " << report.flows.size() << " flows, "
                              << report.bottleneck_drops << " bottleneck drops -> "
                              << out_root.string() << "\n";
                }
                break;
            }
            case rwndq::RunMode::AbCompare: {
                auto r = rwndq::run_ab(spec.scenario);
                track(rwndq::write_report_files(out_root / "rwndq", r.rwndq));
                track(rwndq::write_report_files(out_root / "droptail", r.droptail));
                std::ostringstream summary;
                rwndq::write_ab_summary(summary, r);
                write_text(out_root / "summary.txt", summary.str());
                if (!quiet) {
                    std::cout << "ab run: drop reduction "
                              << r.summary.drop_reduction_pct << "% -> "
                              << out_root.string() << "\n";
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        remove_partial_outputs();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
