#pragma once

// Configuration files, series CSV, run manifests, file-backed checkpoints,
// F-test report JSON, and figure-ready report bundles.
//
// Formats:
//   - config: JSON with explicit keys (model, monitor, gamma, sizes, n_traj,
//     seed required; dt, sample_times, init_mode, workers, scheme, max_L
//     optional). A run manifest doubles as a config: its "config" block is
//     accepted wherever a config is.
//   - series: CSV, header `model,monitor,L,gamma,dt,n_traj,S_mean,S_stderr`,
//     doubles printed with %.17g so rows round-trip bit-exactly.
//   - checkpoints: one JSONL file per ensemble key, one record per finished
//     trajectory, appendable and order-independent.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmon/model.hpp"
#include "spinmon/runner.hpp"
#include "spinmon/stats.hpp"

namespace spinmon {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeriesHeader =
    "model,monitor,L,gamma,dt,n_traj,S_mean,S_stderr";
inline constexpr const char* kOutputDirEnvVar = "SPINMON_OUT";

// ---------------------------------------------------------------------------
// small helpers

namespace detail {

inline uint64_t fnv1a_string(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

inline std::ofstream open_for_write(const fs::path& p, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(p, mode);
    if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
    return out;
}

inline std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// config parsing

struct SimConfig {
    RunConfig base;          // base.model.L is overridden per size
    std::vector<int> sizes;
};

namespace detail {

inline const json& require_key(const json& j, const char* key) {
    if (!j.contains(key))
        throw std::runtime_error(std::string("config error: missing required key \"") +
                                 key + "\"");
    return j.at(key);
}

inline Axis parse_axis(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw std::runtime_error("config error: monitor axis must be \"x\", \"y\" or \"z\"");
}

}  // namespace detail

// Parse a config JSON object (or a manifest: its "config" block is used).
inline SimConfig parse_sim_config(const json& root) {
    const json& j = (root.contains("config") && root.at("config").is_object() &&
                     root.at("config").contains("sizes"))
                        ? root.at("config")
                        : root;
    SimConfig sc;

    const json& jsizes = detail::require_key(j, "sizes");
    if (!jsizes.is_array() || jsizes.empty())
        throw std::runtime_error("config error: \"sizes\" must be a non-empty array");
    for (const auto& v : jsizes) {
        if (!v.is_number_integer())
            throw std::runtime_error("config error: \"sizes\" entries must be integers");
        sc.sizes.push_back(v.get<int>());
    }

    const json& jmodel = detail::require_key(j, "model");
    if (jmodel.is_string()) {
        sc.base.model = preset(jmodel.get<std::string>(), 8);  // L set per size
    } else if (jmodel.is_object()) {
        ModelSpec m;
        m.L = 8;  // placeholder; set per size
        m.Jx = jmodel.value("Jx", 1.0);
        m.Jy = jmodel.value("Jy", 1.0);
        m.Jz = jmodel.value("Jz", 0.0);
        m.hz = jmodel.value("hz", 0.0);
        m.name = jmodel.value("name", std::string("custom"));
        sc.base.model = m;
    } else {
        throw std::runtime_error(
            "config error: \"model\" must be a preset name or a couplings object");
    }

    const json& jmon = detail::require_key(j, "monitor");
    if (!jmon.is_object())
        throw std::runtime_error("config error: \"monitor\" must be an object");
    {
        std::string kind = detail::require_key(jmon, "kind").get<std::string>();
        if (kind == "site")
            sc.base.monitor.kind = MonitorKind::SingleSite;
        else if (kind == "bond")
            sc.base.monitor.kind = MonitorKind::Bond;
        else
            throw std::runtime_error(
                "config error: monitor kind must be \"site\" or \"bond\"");
        sc.base.monitor.axis =
            detail::parse_axis(detail::require_key(jmon, "axis").get<std::string>());
    }

    const json& jgamma = detail::require_key(j, "gamma");
    if (!jgamma.is_number()) throw std::runtime_error("config error: \"gamma\" must be a number");
    sc.base.monitor.gamma = jgamma.get<double>();
    sc.base.monitor.validate();  // "measurement rate must be >= 0"

    const json& jtraj = detail::require_key(j, "n_traj");
    if (!jtraj.is_number_integer() || jtraj.get<long long>() < 1)
        throw std::runtime_error("config error: \"n_traj\" must be a positive integer");
    sc.base.n_traj = jtraj.get<int>();

    const json& jseed = detail::require_key(j, "seed");
    if (!jseed.is_number_integer())
        throw std::runtime_error("config error: \"seed\" must be an integer");
    sc.base.master_seed = jseed.get<uint64_t>();

    sc.base.dt = j.value("dt", 0.05);
    if (!(sc.base.dt > 0.0)) throw std::runtime_error("config error: \"dt\" must be > 0");

    if (j.contains("sample_times")) {
        for (const auto& v : j.at("sample_times")) {
            if (!v.is_number())
                throw std::runtime_error("config error: \"sample_times\" must be numbers");
            sc.base.sample_times.push_back(v.get<double>());
        }
    }
    if (j.contains("init_mode")) {
        std::string m = j.at("init_mode").get<std::string>();
        if (m == "haar-site")
            sc.base.init_mode = InitMode::HaarSite;
        else if (m == "basis")
            sc.base.init_mode = InitMode::Basis;
        else
            throw std::runtime_error(
                "config error: init_mode must be \"haar-site\" or \"basis\"");
    }
    if (j.contains("scheme")) {
        std::string s = j.at("scheme").get<std::string>();
        if (s == "exponentiated")
            sc.base.scheme = Scheme::Exponentiated;
        else if (s == "euler-maruyama")
            sc.base.scheme = Scheme::EulerMaruyama;
        else
            throw std::runtime_error(
                "config error: scheme must be \"exponentiated\" or \"euler-maruyama\"");
    }
    sc.base.workers = j.value("workers", 1);
    if (sc.base.workers < 1)
        throw std::runtime_error("config error: \"workers\" must be >= 1");
    sc.base.max_L = j.value("max_L", kDefaultMaxL);

    return sc;
}

inline SimConfig load_config_file(const fs::path& p) {
    json j;
    try {
        j = json::parse(detail::read_text_file(p));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config error: " + p.string() + " is not valid JSON (" +
                                 e.what() + ")");
    }
    return parse_sim_config(j);
}

inline json sim_config_to_json(const SimConfig& sc) {
    json j;
    j["model"] = {{"name", sc.base.model.name},
                  {"Jx", sc.base.model.Jx},
                  {"Jy", sc.base.model.Jy},
                  {"Jz", sc.base.model.Jz},
                  {"hz", sc.base.model.hz}};
    j["monitor"] = {
        {"kind", sc.base.monitor.kind == MonitorKind::SingleSite ? "site" : "bond"},
        {"axis", std::string(1, axis_char(sc.base.monitor.axis))}};
    j["gamma"] = sc.base.monitor.gamma;
    j["dt"] = sc.base.dt;
    j["sizes"] = sc.sizes;
    j["n_traj"] = sc.base.n_traj;
    j["sample_times"] = sc.base.effective_sample_times();
    j["seed"] = sc.base.master_seed;
    j["init_mode"] = init_mode_name(sc.base.init_mode);
    j["scheme"] = scheme_name(sc.base.scheme);
    j["workers"] = sc.base.workers;
    j["max_L"] = sc.base.max_L;
    return j;
}

// Round-trip check used in tests: a config echoed through JSON parses back to
// the same physical run. (The "model" echo is a couplings object; preset
// names survive via "name".)
inline SimConfig reparse_config(const SimConfig& sc) {
    return parse_sim_config(sim_config_to_json(sc));
}

// ---------------------------------------------------------------------------
// series CSV

struct SeriesFile {
    std::string model;    // model name
    std::string monitor;  // monitor label, e.g. "site-z"
    double gamma = 0.0;
    double dt = 0.0;
    int n_traj = 0;
    ScalingSeries series;
};

inline void write_series_csv(const fs::path& p, const SeriesFile& sf) {
    auto out = detail::open_for_write(p);
    out << kSeriesHeader << "\n";
    for (const auto& pt : sf.series.points) {
        out << sf.model << "," << sf.monitor << "," << pt.L << ","
            << format_double(sf.gamma) << "," << format_double(sf.dt) << ","
            << sf.n_traj << "," << format_double(pt.S_mean) << ","
            << format_double(pt.S_stderr) << "\n";
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing series CSV: " + p.string());
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double_field(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("malformed CSV: bad ") + what + " value \"" +
                                 s + "\"");
    }
}

inline long parse_int_field(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("malformed CSV: bad ") + what + " value \"" +
                                 s + "\"");
    }
}

}  // namespace detail

inline SeriesFile read_series_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open series CSV: " + p.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("malformed CSV: empty file " + p.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSeriesHeader)
        throw std::runtime_error("malformed CSV: unexpected header in " + p.string() +
                                 " (expected \"" + kSeriesHeader + "\")");
    SeriesFile sf;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 8)
            throw std::runtime_error("malformed CSV: expected 8 fields, got " +
                                     std::to_string(f.size()) + " in " + p.string());
        ScalingPoint pt;
        pt.L = static_cast<int>(detail::parse_int_field(f[2], "L"));
        double gamma = detail::parse_double_field(f[3], "gamma");
        double dt = detail::parse_double_field(f[4], "dt");
        int n_traj = static_cast<int>(detail::parse_int_field(f[5], "n_traj"));
        pt.S_mean = detail::parse_double_field(f[6], "S_mean");
        pt.S_stderr = detail::parse_double_field(f[7], "S_stderr");
        pt.n_samples = 0;  // not stored in the CSV schema
        if (first) {
            sf.model = f[0];
            sf.monitor = f[1];
            sf.gamma = gamma;
            sf.dt = dt;
            sf.n_traj = n_traj;
            first = false;
        } else if (f[0] != sf.model || f[1] != sf.monitor || gamma != sf.gamma ||
                   dt != sf.dt || n_traj != sf.n_traj) {
            throw std::runtime_error("malformed CSV: rows mix different runs in " +
                                     p.string());
        }
        sf.series.points.push_back(pt);
    }
    if (sf.series.points.empty())
        throw std::runtime_error("malformed CSV: no data rows in " + p.string());
    return sf;
}

// ---------------------------------------------------------------------------
// file-backed checkpoints (JSONL, one file per ensemble key)

class FileCheckpointStore final : public CheckpointStore {
  public:
    explicit FileCheckpointStore(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    fs::path path_for(const std::string& key) const {
        return dir_ / (detail::hex64(detail::fnv1a_string(key)) + ".jsonl");
    }

    std::vector<TrajectoryRecord> load(const std::string& key) override {
        const fs::path p = path_for(key);
        std::vector<TrajectoryRecord> out;
        std::ifstream in(p);
        if (!in) return out;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error&) {
                throw std::runtime_error("checkpoint corruption: " + p.string() +
                                         " line " + std::to_string(lineno) +
                                         " is not valid JSON");
            }
            try {
                if (j.at("key").get<std::string>() != key)
                    throw std::runtime_error("key mismatch");
                TrajectoryRecord rec;
                rec.traj_index = j.at("traj").get<uint64_t>();
                rec.sz_first = j.at("sz_first").get<double>();
                rec.sz_last = j.at("sz_last").get<double>();
                for (const auto& s : j.at("samples")) {
                    if (!s.is_array() || s.size() != 2) throw std::runtime_error("bad sample");
                    rec.samples.push_back(
                        {s.at(0).get<double>(), s.at(1).get<double>()});
                }
                out.push_back(std::move(rec));
            } catch (const std::exception& e) {
                throw std::runtime_error("checkpoint corruption: " + p.string() +
                                         " line " + std::to_string(lineno) + ": " +
                                         e.what());
            }
        }
        return out;
    }

    void append(const std::string& key, const TrajectoryRecord& rec) override {
        json samples = json::array();
        for (const auto& s : rec.samples) samples.push_back({s.time, s.entropy});
        json j = {{"key", key},
                  {"traj", rec.traj_index},
                  {"sz_first", rec.sz_first},
                  {"sz_last", rec.sz_last},
                  {"samples", samples}};
        auto out = detail::open_for_write(path_for(key), std::ios::app);
        out << j.dump() << "\n";
        out.flush();
        if (!out)
            throw std::runtime_error("failed appending checkpoint: " +
                                     path_for(key).string());
    }

    void clear(const std::string& key) {
        std::error_code ec;
        fs::remove(path_for(key), ec);
    }

  private:
    fs::path dir_;
};

// ---------------------------------------------------------------------------
// manifest

inline json manifest_json(const SimConfig& sc, const SweepResult& sweep,
                          double wall_seconds) {
    json per_size = json::array();
    for (const auto& e : sweep.ensembles) {
        per_size.push_back({{"L", e.point.L},
                            {"S_mean", e.point.S_mean},
                            {"S_stderr", e.point.S_stderr},
                            {"n_samples", e.point.n_samples},
                            {"stationary", e.stationary},
                            {"u1_audited", e.u1_audited},
                            {"max_sz_drift", e.max_sz_drift},
                            {"checkpoint_digest", detail::hex64(e.digest)}});
    }
    return json{{"version", kVersion},
                {"created_unix", static_cast<long long>(
                                     std::chrono::duration_cast<std::chrono::seconds>(
                                         std::chrono::system_clock::now().time_since_epoch())
                                         .count())},
                {"wallclock_seconds", wall_seconds},
                {"master_seed", sc.base.master_seed},
                {"config", sim_config_to_json(sc)},
                {"ensembles", per_size}};
}

// ---------------------------------------------------------------------------
// simulate driver (shared by the CLI and by end-to-end tests)

struct SimOutputs {
    fs::path series_path;
    fs::path manifest_path;
    fs::path checkpoint_dir;
    SweepResult sweep;
};

inline SimOutputs run_simulate(const SimConfig& sc, const fs::path& outdir, bool resume) {
    validate_sizes(sc.sizes, sc.base.max_L);
    fs::create_directories(outdir);
    SimOutputs out;
    out.checkpoint_dir = outdir / "checkpoints";
    FileCheckpointStore store(out.checkpoint_dir);
    if (!resume) {
        for (int L : sc.sizes) {
            RunConfig cfg = sc.base;
            cfg.model.L = L;
            store.clear(cfg.checkpoint_key());
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    out.sweep = sweep_sizes(sc.base, sc.sizes, &store);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    SeriesFile sf;
    sf.model = sc.base.model.name;
    sf.monitor = sc.base.monitor.label();
    sf.gamma = sc.base.monitor.gamma;
    sf.dt = sc.base.dt;
    sf.n_traj = sc.base.n_traj;
    sf.series = out.sweep.series;
    out.series_path = outdir / "series.csv";
    write_series_csv(out.series_path, sf);

    out.manifest_path = outdir / "manifest.json";
    auto mf = detail::open_for_write(out.manifest_path);
    mf << manifest_json(sc, out.sweep, wall).dump(2) << "\n";
    mf.flush();
    if (!mf) throw std::runtime_error("failed writing manifest");
    return out;
}

// ---------------------------------------------------------------------------
// F-test report JSON

inline json fit_to_json(const LinearFit& f) {
    return json{{"slope", f.slope}, {"intercept", f.intercept}, {"sse", f.sse}};
}

inline json report_to_json(const FTestReport& rep, const SeriesFile& src,
                           double threshold) {
    json j;
    j["fit_L"] = fit_to_json(rep.fit_L);
    j["fit_lnL"] = fit_to_json(rep.fit_lnL);
    if (std::isinf(rep.F))
        j["F"] = "+inf";
    else
        j["F"] = rep.F;
    j["dof"] = {rep.nu1, rep.nu2};
    j["P"] = rep.P;
    j["weighted"] = rep.weighted;
    j["threshold"] = threshold;
    j["verdict"] = verdict_string(rep.P, threshold);
    json sizes = json::array();
    for (const auto& pt : src.series.points) sizes.push_back(pt.L);
    j["source"] = {{"model", src.model},   {"monitor", src.monitor},
                   {"gamma", src.gamma},   {"dt", src.dt},
                   {"n_traj", src.n_traj}, {"sizes", sizes}};
    return j;
}

inline FTestReport report_from_json(const json& j) {
    FTestReport rep;
    auto fit_from = [](const json& f) {
        LinearFit out;
        out.slope = f.at("slope").get<double>();
        out.intercept = f.at("intercept").get<double>();
        out.sse = f.at("sse").get<double>();
        return out;
    };
    rep.fit_L = fit_from(j.at("fit_L"));
    rep.fit_lnL = fit_from(j.at("fit_lnL"));
    if (j.at("F").is_string())
        rep.F = std::numeric_limits<double>::infinity();
    else
        rep.F = j.at("F").get<double>();
    rep.nu1 = j.at("dof").at(0).get<int>();
    rep.nu2 = j.at("dof").at(1).get<int>();
    rep.P = j.at("P").get<double>();
    rep.weighted = j.value("weighted", false);
    return rep;
}

// ---------------------------------------------------------------------------
// report bundle: per-series panel data files + optional SVG

namespace detail {

inline std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
}

// Minimal static SVG scatter+fit panel. Convenience output only; nothing
// downstream parses it.
inline void write_panel_svg(const fs::path& p, const std::string& title,
                            const std::string& xlabel, const std::vector<double>& xs,
                            const std::vector<double>& ys, const std::vector<double>& es,
                            const std::vector<double>& fit_a,
                            const std::vector<double>& fit_b) {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = xs.front(), xmax = xs.front(), ymin = ys.front(), ymax = ys.front();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xmin = std::min(xmin, xs[i]);
        xmax = std::max(xmax, xs[i]);
        ymin = std::min({ymin, ys[i] - es[i], fit_a[i], fit_b[i]});
        ymax = std::max({ymax, ys[i] + es[i], fit_a[i], fit_b[i]});
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double xpad = 0.06 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
    xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;
    auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto Y = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    auto out = open_for_write(p);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = xmin + (xmax - xmin) * t / 4.0;
        double fy = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x=\"" << X(fx) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_g(fx) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << Y(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_g(fy) << "</text>\n";
    }
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (mt + H - mb) / 2 << ")\">S(L/2)</text>\n";
    // fit polylines
    auto polyline = [&](const std::vector<double>& fy, const char* color) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            out << X(xs[i]) << "," << Y(fy[i]) << " ";
        out << "\"/>\n";
    };
    polyline(fit_a, "#1f77b4");
    polyline(fit_b, "#d62728");
    // data with error bars
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << "<line x1=\"" << X(xs[i]) << "\" y1=\"" << Y(ys[i] - es[i]) << "\" x2=\""
            << X(xs[i]) << "\" y2=\"" << Y(ys[i] + es[i]) << "\" stroke=\"black\"/>\n";
        out << "<circle cx=\"" << X(xs[i]) << "\" cy=\"" << Y(ys[i])
            << "\" r=\"3.5\" fill=\"black\"/>\n";
    }
    out << "<text x=\"" << W - mr << "\" y=\"" << mt + 4
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#1f77b4\">fit in L</text>\n";
    out << "<text x=\"" << W - mr << "\" y=\"" << mt + 18
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#d62728\">fit in ln L</text>\n";
    out << "</svg>\n";
    out.flush();
    if (!out) throw std::runtime_error("failed writing SVG: " + p.string());
}

}  // namespace detail

struct ReportBundleFiles {
    fs::path linear_dat;
    fs::path log_dat;
    std::vector<fs::path> svgs;
};

// Emit the figure data for one (series, report) pair: a linear-x panel and a
// log-x panel, columns (x, S_mean, S_stderr, fit_L value, fit_lnL value),
// plus optional SVG renderings. The pairing is validated by recomputing the
// F statistic from the series and comparing against the report.
inline ReportBundleFiles write_report_bundle(const SeriesFile& sf, const FTestReport& rep,
                                             const fs::path& out_stem, bool svg) {
    FTestReport check = f_statistic(sf.series, rep.weighted);
    const bool both_inf = std::isinf(check.F) && std::isinf(rep.F);
    const double rel = std::abs(check.F - rep.F) /
                       std::max({std::abs(check.F), std::abs(rep.F), 1e-300});
    if (!both_inf && !(rel < 1e-6))
        throw std::runtime_error("mismatched series/report pairing: report F " +
                                 std::to_string(rep.F) +
                                 " does not match the series (recomputed F " +
                                 std::to_string(check.F) + ")");

    const auto& pts = sf.series.points;
    std::vector<double> Ls(pts.size()), lnLs(pts.size()), ys(pts.size()), es(pts.size()),
        fit_lin(pts.size()), fit_log(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Ls[i] = pts[i].L;
        lnLs[i] = std::log(static_cast<double>(pts[i].L));
        ys[i] = pts[i].S_mean;
        es[i] = pts[i].S_stderr;
        fit_lin[i] = rep.fit_L.at(Ls[i]);
        fit_log[i] = rep.fit_lnL.at(lnLs[i]);
    }

    ReportBundleFiles files;
    auto write_dat = [&](const fs::path& p, const std::vector<double>& x) {
        auto out = detail::open_for_write(p);
        out << "# x S_mean S_stderr fit_L fit_lnL\n";
        for (std::size_t i = 0; i < pts.size(); ++i)
            out << detail::fmt_g(x[i]) << " " << detail::fmt_g(ys[i]) << " "
                << detail::fmt_g(es[i]) << " " << detail::fmt_g(fit_lin[i]) << " "
                << detail::fmt_g(fit_log[i]) << "\n";
        out.flush();
        if (!out) throw std::runtime_error("failed writing panel data: " + p.string());
    };
    files.linear_dat = out_stem;
    files.linear_dat += "_linear.dat";
    files.log_dat = out_stem;
    files.log_dat += "_log.dat";
    write_dat(files.linear_dat, Ls);
    write_dat(files.log_dat, lnLs);

    if (svg) {
        const std::string label = sf.model + " + " + sf.monitor;
        fs::path svg_lin = out_stem;
        svg_lin += "_linear.svg";
        fs::path svg_log = out_stem;
        svg_log += "_log.svg";
        detail::write_panel_svg(svg_lin, label, "L", Ls, ys, es, fit_lin, fit_log);
        detail::write_panel_svg(svg_log, label, "ln L", lnLs, ys, es, fit_lin, fit_log);
        files.svgs = {svg_lin, svg_log};
    }
    return files;
}

}  // namespace spinmon
