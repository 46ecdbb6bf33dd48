// spinmon: trajectory simulations of weakly monitored spin-1/2 chains and
// volume-vs-log entanglement scaling analysis.
//
//   spinmon simulate --config run.json [--out DIR] [--resume] [--workers N]
//                    [--max-L N] [--seed S]
//   spinmon analyze  --series series.csv [--out report.json] [--weighted]
//                    [--threshold P]
//   spinmon report   --series a.csv [--series b.csv ...]
//                    --report a.json [--report b.json ...]
//                    [--out DIR] [--svg/--no-svg]
//
// The default output directory is $SPINMON_OUT, falling back to ./runs.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <spinmon/spinmon.hpp>

namespace {

using namespace spinmon;

std::string default_out_dir() {
    if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) return env;
    return "runs";
}

int cmd_simulate(const std::string& config_path, std::string out_dir, bool resume,
                 int workers_override, int max_L_override, long long seed_override) {
    SimConfig sc = load_config_file(config_path);
    if (workers_override > 0) sc.base.workers = workers_override;
    if (max_L_override > 0) sc.base.max_L = max_L_override;
    if (seed_override >= 0) sc.base.master_seed = static_cast<uint64_t>(seed_override);
    if (out_dir.empty()) out_dir = default_out_dir();

    SimOutputs out = run_simulate(sc, out_dir, resume);
    std::cout << "wrote " << out.series_path.string() << " ("
              << out.sweep.series.points.size() << " sizes, " << sc.base.n_traj
              << " trajectories each)\n";
    std::cout << "wrote " << out.manifest_path.string() << "\n";
    for (const auto& e : out.sweep.ensembles) {
        std::cout << "  L=" << e.point.L << "  S_mean=" << format_double(e.point.S_mean)
                  << "  S_stderr=" << format_double(e.point.S_stderr)
                  << (e.stationary ? "" : "  [WARNING: not stationary]");
        if (e.u1_audited)
            std::cout << "  [U(1) audited, max <S_z> drift " << format_double(e.max_sz_drift)
                      << "]";
        std::cout << "\n";
    }
    return 0;
}

int cmd_analyze(const std::string& series_path, std::string report_path, bool weighted,
                double threshold) {
    SeriesFile sf = read_series_csv(series_path);
    FTestReport rep = analyze_series(sf.series, weighted);

    std::cout << "series: " << sf.model << " + " << sf.monitor << ", gamma "
              << format_double(sf.gamma) << ", " << sf.series.points.size() << " sizes, "
              << sf.n_traj << " trajectories\n";
    std::cout << "fit in L   : S = " << format_double(rep.fit_L.slope) << " * L + "
              << format_double(rep.fit_L.intercept)
              << "   (SSE " << format_double(rep.fit_L.sse) << ")\n";
    std::cout << "fit in lnL : S = " << format_double(rep.fit_lnL.slope) << " * lnL + "
              << format_double(rep.fit_lnL.intercept)
              << "   (SSE " << format_double(rep.fit_lnL.sse) << ")\n";
    std::cout << "F = " << (std::isinf(rep.F) ? std::string("+inf") : format_double(rep.F))
              << "  dof = (" << rep.nu1 << ", " << rep.nu2 << ")"
              << (rep.weighted ? "  [weighted]" : "") << "\n";
    std::cout << "P = " << format_double(rep.P) << "\n";
    std::cout << "verdict: " << verdict_string(rep.P, threshold) << " (threshold "
              << format_double(threshold) << ")\n";

    if (report_path.empty()) {
        fs::path p(series_path);
        p.replace_extension(".report.json");
        report_path = p.string();
    }
    auto out = detail::open_for_write(report_path);
    out << report_to_json(rep, sf, threshold).dump(2) << "\n";
    out.flush();
    if (!out) throw std::runtime_error("failed writing report: " + report_path);
    std::cout << "wrote " << report_path << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& series_paths,
               const std::vector<std::string>& report_paths, std::string out_dir,
               bool svg) {
    if (series_paths.size() != report_paths.size())
        throw std::runtime_error("report needs one --report per --series (got " +
                                 std::to_string(series_paths.size()) + " series, " +
                                 std::to_string(report_paths.size()) + " reports)");
    if (series_paths.empty()) {
        std::cerr << "warning: no series/report pairs given; nothing to do\n";
        return 0;
    }
    if (out_dir.empty()) out_dir = default_out_dir();
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < series_paths.size(); ++i) {
        SeriesFile sf = read_series_csv(series_paths[i]);
        FTestReport rep = report_from_json(json::parse(detail::read_text_file(report_paths[i])));
        fs::path stem = fs::path(out_dir) / fs::path(series_paths[i]).stem();
        ReportBundleFiles files = write_report_bundle(sf, rep, stem, svg);
        std::cout << "wrote " << files.linear_dat.string() << "\n";
        std::cout << "wrote " << files.log_dat.string() << "\n";
        for (const auto& p : files.svgs) std::cout << "wrote " << p.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory simulator and entanglement-scaling analyzer for "
                 "weakly monitored spin-1/2 chains"};
    app.require_subcommand(1);

    // simulate
    std::string config_path, sim_out;
    bool resume = false;
    int workers_override = 0, max_L_override = 0;
    long long seed_override = -1;
    auto* sim = app.add_subcommand("simulate", "run a size sweep from a config file");
    sim->add_option("--config", config_path, "JSON config (or manifest) path")
        ->required();
    sim->add_option("--out", sim_out, "output directory (default: $SPINMON_OUT or ./runs)");
    sim->add_flag("--resume", resume, "reuse existing checkpoints instead of restarting");
    sim->add_option("--workers", workers_override, "override worker thread count");
    sim->add_option("--max-L", max_L_override, "override the memory cap on L");
    sim->add_option("--seed", seed_override, "override the master seed");

    // analyze
    std::string series_path, report_out;
    bool weighted = false;
    double threshold = kDefaultVerdictThreshold;
    auto* ana = app.add_subcommand("analyze", "F-test a series CSV for volume-law scaling");
    ana->add_option("--series", series_path, "series CSV path")->required();
    ana->add_option("--out", report_out,
                    "report JSON path (default: <series>.report.json)");
    ana->add_flag("--weighted", weighted, "weight fits by 1/stderr^2");
    ana->add_option("--threshold", threshold,
                    "P threshold for the volume-law verdict (default 0.5)");

    // report
    std::vector<std::string> rep_series, rep_reports;
    std::string rep_out;
    bool svg = true;
    auto* rep = app.add_subcommand("report", "emit figure-ready panel data for series/report pairs");
    rep->add_option("--series", rep_series, "series CSV path (repeatable)");
    rep->add_option("--report", rep_reports, "report JSON path (repeatable, pairs with --series)");
    rep->add_option("--out", rep_out, "output directory (default: $SPINMON_OUT or ./runs)");
    rep->add_flag("--svg,!--no-svg", svg, "also render SVG panels (default on)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, sim_out, resume, workers_override,
                                max_L_override, seed_override);
        if (ana->parsed()) return cmd_analyze(series_path, report_out, weighted, threshold);
        if (rep->parsed()) return cmd_report(rep_series, rep_reports, rep_out, svg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
