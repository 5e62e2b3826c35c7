#include <algorithm>
#include <cstdio>
#include <fstream>

#include "instanton/errors.hpp"
#include "instanton/scenario.hpp"

namespace instanton::sim {
namespace {

void appendf(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof buf, fmt, args...);
    out.append(buf, static_cast<std::size_t>(std::max(0, std::min<int>(n, sizeof buf - 1))));
}

}  // namespace

std::string report_csv(const RunReport& report) {
    std::string out = "t_s,arm,fix_valid,err_east_m,err_north_m,err_2d_m\n";
    for (const auto& arm : report.arms) {
        for (const auto& s : arm.series)
            appendf(out, "%.3f,%s,%d,%.4f,%.4f,%.4f\n", s.t_s, arm.arm.c_str(), s.fix_valid ? 1 : 0, s.err_east_m,
                    s.err_north_m, s.err_2d_m);
    }
    appendf(out, "# off_duration_s=%.3f\n", report.off_duration_s);
    appendf(out, "# drift_budget_ms=%.3f\n", report.drift_budget_ms);
    appendf(out, "# power_ratio=%.6g\n", report.power_ratio);
    appendf(out, "# predicted_code_phase_chips=%.4f\n", report.predicted_code_phase_chips);
    for (const auto& arm : report.arms) {
        const char* name = arm.arm.c_str();
        if (arm.time_to_first_fix_s)
            appendf(out, "# %s.time_to_first_fix_s=%.3f\n", name, *arm.time_to_first_fix_s);
        else
            appendf(out, "# %s.time_to_first_fix_s=none\n", name);
        if (arm.rms_2d_m)
            appendf(out, "# %s.rms_2d_m=%.4f\n", name, *arm.rms_2d_m);
        else
            appendf(out, "# %s.rms_2d_m=none\n", name);
        appendf(out, "# %s.frame_lock_source=%s\n", name, receiver::to_string(arm.frame_lock_source));
        appendf(out, "# %s.fell_back_to_hotstart=%d\n", name, arm.fell_back_to_hotstart ? 1 : 0);
        if (arm.preamble_consistent)
            appendf(out, "# %s.preamble_consistent=%d\n", name, *arm.preamble_consistent ? 1 : 0);
    }
    return out;
}

void export_report(const RunReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(path, "cannot open report for writing");
    const std::string csv = report_csv(report);
    f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    f.close();
    if (!f) throw IoError(path, "write failed");
}

}  // namespace instanton::sim
