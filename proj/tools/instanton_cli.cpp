#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "instanton/errors.hpp"
#include "instanton/frame_sync.hpp"
#include "instanton/scenario.hpp"

namespace {

constexpr int kExitScenario = 1;
constexpr int kExitIo = 2;

int cmd_run(const std::string& scenario_path, const std::string& arm, const std::optional<std::uint64_t>& seed,
            const std::string& out, const std::string& snapshot) {
    using namespace instanton;
    auto cfg = sim::load_scenario_file(scenario_path);
    if (!arm.empty()) cfg.arms = sim::parse_arm(arm);
    if (seed) cfg.seed = *seed;
    const auto report = sim::run_scenario(cfg, snapshot);
    if (out.empty() || out == "-")
        std::cout << sim::report_csv(report);
    else
        sim::export_report(report, out);
    for (const auto& a : report.arms) {
        std::fprintf(stderr, "%-9s ttff=%s rms_2d=%s lock=%s%s\n", a.arm.c_str(),
                     a.time_to_first_fix_s ? std::to_string(*a.time_to_first_fix_s).c_str() : "none",
                     a.rms_2d_m ? std::to_string(*a.rms_2d_m).c_str() : "none",
                     receiver::to_string(a.frame_lock_source), a.fell_back_to_hotstart ? " (fallback)" : "");
    }
    return 0;
}

int cmd_budget(const std::vector<double>& ppms, const std::vector<double>& margins) {
    std::printf("%10s", "ppm\\ms");
    for (double m : margins) std::printf(" %14g", m);
    std::printf("\n");
    for (double p : ppms) {
        std::printf("%10g", p);
        for (double m : margins) std::printf(" %14.1f", instanton::frame_sync::drift_budget(p, m));
        std::printf("\n");
    }
    return 0;
}

int cmd_snapshot_dump(const std::string& path) {
    std::cout << instanton::frame_sync::describe_snapshot(instanton::frame_sync::read_snapshot_file(path));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Instant-on GPS frame-sync simulator"};
    app.require_subcommand(1);

    std::string scenario, arm, out, snapshot;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "run a scenario and write the CSV report");
    run->add_option("scenario", scenario, "scenario file")->required();
    run->add_option("--arm", arm, "estimator, hotstart or both")->check(CLI::IsMember({"estimator", "hotstart", "both"}));
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out, "CSV output path (stdout if omitted)");
    run->add_option("--snapshot", snapshot, "write the power-off snapshot to this path");

    std::vector<double> ppms{1, 5, 10, 20, 30, 50};
    std::vector<double> margins{5, 10};
    auto* budget = app.add_subcommand("budget", "print the drift budget table in ms");
    budget->add_option("--ppm", ppms, "RTC tolerances in ppm")->delimiter(',');
    budget->add_option("--margin", margins, "bit margins in ms")->delimiter(',');

    std::string dump_path;
    auto* dump = app.add_subcommand("snapshot-dump", "print a persisted snapshot");
    dump->add_option("file", dump_path, "snapshot file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(scenario, arm, seed, out, snapshot);
        if (*budget) return cmd_budget(ppms, margins);
        if (*dump) return cmd_snapshot_dump(dump_path);
    } catch (const instanton::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const instanton::SnapshotFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const instanton::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitScenario;
    }
    return 0;
}
