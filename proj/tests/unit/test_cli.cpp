#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include <spinmon/io.hpp>

using namespace spinmon;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("spinmon_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct CmdResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp_or_empty(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Run the CLI with `args` from inside `workdir`, optionally with an
// environment prefix like "SPINMON_OUT=x".
CmdResult run_cli(const std::string& args, const fs::path& workdir,
                  const std::string& env_prefix = "") {
    static std::atomic<int> n{0};
    const int id = n.fetch_add(1);
    const fs::path so = workdir / ("cli_stdout_" + std::to_string(id) + ".txt");
    const fs::path se = workdir / ("cli_stderr_" + std::to_string(id) + ".txt");
    std::string cmd = "cd '" + workdir.string() + "' && " + env_prefix +
                      (env_prefix.empty() ? "" : " ") + "'" + SPINMON_CLI_PATH + "' " +
                      args + " >'" + so.string() + "' 2>'" + se.string() + "'";
    const int rc = std::system(cmd.c_str());
    CmdResult res;
    res.status = (rc == -1 || !WIFEXITED(rc)) ? -1 : WEXITSTATUS(rc);
    res.out = slurp_or_empty(so);
    res.err = slurp_or_empty(se);
    return res;
}

json base_config() {
    return json{{"model", "XX"},
                {"monitor", {{"kind", "site"}, {"axis", "z"}}},
                {"gamma", 0.1},
                {"sizes", {8, 10}},
                {"n_traj", 4},
                {"seed", 7}};
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p);
    out << j.dump(2) << "\n";
}

// S = L/4 at these sizes: every fit quantity is exactly representable, the
// linear residual is exactly zero, and P is exactly 1.
SeriesFile volume_series() {
    SeriesFile sf;
    sf.model = "synthetic-volume";
    sf.monitor = "site-z";
    sf.gamma = 0.1;
    sf.dt = 0.05;
    sf.n_traj = 100;
    for (int L : {8, 12, 16, 24})
        sf.series.points.push_back(ScalingPoint{L, L / 4.0, 0.01, 100});
    return sf;
}

SeriesFile log_series() {
    SeriesFile sf;
    sf.model = "synthetic-log";
    sf.monitor = "site-z";
    sf.gamma = 0.1;
    sf.dt = 0.05;
    sf.n_traj = 100;
    for (int L : {8, 12, 16, 24, 32})
        sf.series.points.push_back(
            ScalingPoint{L, 0.8 * std::log(static_cast<double>(L)) + 0.1, 0.01, 100});
    return sf;
}

}  // namespace

TEST_CASE("cli simulate") {
    TempDir tmp;
    write_json(tmp.path / "run.json", base_config());

    SECTION("happy path writes a two-row series and reruns byte-identically") {
        CmdResult r1 = run_cli("simulate --config run.json --out out1", tmp.path);
        INFO(r1.err);
        REQUIRE(r1.status == 0);
        SeriesFile sf = read_series_csv(tmp.path / "out1" / "series.csv");
        REQUIRE(sf.series.points.size() == 2);
        CHECK(sf.series.points[0].L == 8);
        CHECK(sf.series.points[1].L == 10);
        CHECK(sf.model == "XX");

        CmdResult r2 = run_cli("simulate --config run.json --out out2", tmp.path);
        REQUIRE(r2.status == 0);
        CHECK(slurp_or_empty(tmp.path / "out2" / "series.csv") ==
              slurp_or_empty(tmp.path / "out1" / "series.csv"));

        SECTION("a different worker count still reproduces the same bytes") {
            CmdResult r3 =
                run_cli("simulate --config run.json --out out3 --workers 2", tmp.path);
            REQUIRE(r3.status == 0);
            CHECK(slurp_or_empty(tmp.path / "out3" / "series.csv") ==
                  slurp_or_empty(tmp.path / "out1" / "series.csv"));
        }
        SECTION("a seed override changes the data") {
            CmdResult r4 =
                run_cli("simulate --config run.json --out out4 --seed 8", tmp.path);
            REQUIRE(r4.status == 0);
            CHECK(slurp_or_empty(tmp.path / "out4" / "series.csv") !=
                  slurp_or_empty(tmp.path / "out1" / "series.csv"));
        }
    }
    SECTION("missing sizes key names the key and fails") {
        json j = base_config();
        j.erase("sizes");
        write_json(tmp.path / "bad.json", j);
        CmdResult r = run_cli("simulate --config bad.json --out out", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("missing required key \"sizes\"") != std::string::npos);
    }
    SECTION("negative gamma is rejected with the rate message") {
        json j = base_config();
        j["gamma"] = -1.0;
        write_json(tmp.path / "bad.json", j);
        CmdResult r = run_cli("simulate --config bad.json --out out", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("measurement rate must be >= 0") != std::string::npos);
    }
    SECTION("memory cap violations fail loudly") {
        json j = base_config();
        j["sizes"] = {8, 30};
        j["sample_times"] = {0.5};
        write_json(tmp.path / "big.json", j);
        CmdResult r = run_cli("simulate --config big.json --out out", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("memory cap") != std::string::npos);
        CHECK(run_cli("simulate --config big.json --out out --max-L 8", tmp.path).status !=
              0);
    }
    SECTION("the output directory defaults to SPINMON_OUT") {
        json j = base_config();
        j["sizes"] = {4, 6};
        j["n_traj"] = 2;
        j["sample_times"] = {0.5, 1.0};
        write_json(tmp.path / "tiny.json", j);
        CmdResult r = run_cli("simulate --config tiny.json", tmp.path,
                              "SPINMON_OUT=envout");
        INFO(r.err);
        REQUIRE(r.status == 0);
        CHECK(fs::exists(tmp.path / "envout" / "series.csv"));
    }
}

TEST_CASE("cli analyze") {
    TempDir tmp;
    SECTION("volume-law series") {
        write_series_csv(tmp.path / "vol.csv", volume_series());
        CmdResult r = run_cli("analyze --series vol.csv --out vol_report.json", tmp.path);
        INFO(r.err);
        REQUIRE(r.status == 0);
        CHECK(r.out.find("verdict: volume-law favored") != std::string::npos);
        CHECK(r.out.find("P = 1\n") != std::string::npos);
        CHECK(r.out.find("fit in L") != std::string::npos);
        CHECK(r.out.find("fit in lnL") != std::string::npos);
        CHECK(r.out.find("dof = (2, 2)") != std::string::npos);
        json rep = json::parse(slurp_or_empty(tmp.path / "vol_report.json"));
        CHECK(rep.at("P").get<double>() == 1.0);
        CHECK(rep.at("verdict").get<std::string>() == "volume-law favored");
    }
    SECTION("log-law series") {
        write_series_csv(tmp.path / "log.csv", log_series());
        CmdResult r = run_cli("analyze --series log.csv", tmp.path);
        REQUIRE(r.status == 0);
        CHECK(r.out.find("verdict: non-volume-law") != std::string::npos);
        // default report path sits next to the CSV
        json rep = json::parse(slurp_or_empty(tmp.path / "log.report.json"));
        CHECK(rep.at("P").get<double>() < 1e-12);
    }
    SECTION("fewer than four sizes is an error") {
        SeriesFile sf = volume_series();
        sf.series.points.resize(2);
        write_series_csv(tmp.path / "short.csv", sf);
        CmdResult r = run_cli("analyze --series short.csv", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("at least 4") != std::string::npos);
    }
    SECTION("malformed CSV is an error") {
        std::ofstream(tmp.path / "junk.csv") << "hello\n";
        CmdResult r = run_cli("analyze --series junk.csv", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("malformed CSV") != std::string::npos);
    }
}

TEST_CASE("cli report") {
    TempDir tmp;
    write_series_csv(tmp.path / "vol.csv", volume_series());
    REQUIRE(run_cli("analyze --series vol.csv --out vol_report.json", tmp.path).status == 0);

    SECTION("panel data files with and without SVG") {
        CmdResult r = run_cli(
            "report --series vol.csv --report vol_report.json --out fig --no-svg",
            tmp.path);
        INFO(r.err);
        REQUIRE(r.status == 0);
        CHECK(fs::exists(tmp.path / "fig" / "vol_linear.dat"));
        CHECK(fs::exists(tmp.path / "fig" / "vol_log.dat"));
        CHECK(!fs::exists(tmp.path / "fig" / "vol_linear.svg"));

        CmdResult r2 = run_cli(
            "report --series vol.csv --report vol_report.json --out figsvg --svg",
            tmp.path);
        REQUIRE(r2.status == 0);
        CHECK(fs::exists(tmp.path / "figsvg" / "vol_linear.svg"));
        CHECK(fs::exists(tmp.path / "figsvg" / "vol_log.svg"));
    }
    SECTION("an empty pair list warns and exits cleanly") {
        CmdResult r = run_cli("report --out fig", tmp.path);
        CHECK(r.status == 0);
        CHECK(r.err.find("nothing to do") != std::string::npos);
    }
    SECTION("a mismatched pairing is an error") {
        write_series_csv(tmp.path / "log.csv", log_series());
        CmdResult r = run_cli(
            "report --series log.csv --report vol_report.json --out fig", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("mismatched series/report") != std::string::npos);
    }
    SECTION("unbalanced pair lists are an error") {
        CmdResult r = run_cli("report --series vol.csv --out fig", tmp.path);
        CHECK(r.status != 0);
        CHECK(r.err.find("one --report per --series") != std::string::npos);
    }
}
