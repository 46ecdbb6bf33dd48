#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <spinmon/runner.hpp>

using namespace spinmon;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.model = preset("XXZ", 6);
    cfg.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 0.2};
    cfg.dt = 0.05;
    cfg.n_traj = 6;
    cfg.sample_times = {1.0, 1.5};
    cfg.master_seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("sample step selection") {
    CHECK(sample_step_for(0.0, 0.05) == 0);
    CHECK(sample_step_for(-2.0, 0.05) == 0);
    CHECK(sample_step_for(1.0, 0.05) == 20);   // exact multiple must not round up
    CHECK(sample_step_for(26.0, 0.05) == 520);
    CHECK(sample_step_for(1.001, 0.05) == 21);
    CHECK(sample_step_for(0.024, 0.05) == 1);
}

TEST_CASE("run configuration") {
    SECTION("default sample grid is (25+k)/Jx") {
        RunConfig cfg = small_config();
        cfg.sample_times.clear();
        auto ts = cfg.effective_sample_times();
        REQUIRE(ts.size() == 5);
        CHECK(ts.front() == Catch::Approx(26.0));
        CHECK(ts.back() == Catch::Approx(30.0));
        cfg.model.Jx = 2.0;
        CHECK(cfg.effective_sample_times().front() == Catch::Approx(13.0));
    }
    SECTION("checkpoint key ignores n_traj but tracks physics") {
        RunConfig a = small_config();
        RunConfig b = a;
        b.n_traj = 999;
        CHECK(a.checkpoint_key() == b.checkpoint_key());
        b = a;
        b.master_seed = 12;
        CHECK(a.checkpoint_key() != b.checkpoint_key());
        b = a;
        b.monitor.gamma = 0.3;
        CHECK(a.checkpoint_key() != b.checkpoint_key());
        b = a;
        b.model.L = 8;
        CHECK(a.checkpoint_key() != b.checkpoint_key());
        b = a;
        b.scheme = Scheme::EulerMaruyama;
        CHECK(a.checkpoint_key() != b.checkpoint_key());
    }
    SECTION("validation") {
        RunConfig cfg = small_config();
        cfg.dt = 0.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = small_config();
        cfg.n_traj = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = small_config();
        cfg.workers = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = small_config();
        cfg.sample_times = {1.0, 1.0};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = small_config();
        cfg.sample_times = {-0.5, 1.0};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("single trajectory") {
    SECTION("gamma = 0 reduces to plain Trotter evolution, bitwise") {
        RunConfig cfg;
        cfg.model = preset("XX", 6);
        cfg.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 0.0};
        cfg.dt = 0.05;
        cfg.sample_times = {0.25, 0.5};
        cfg.master_seed = 5;
        TrajectoryRecord rec = run_trajectory(cfg, 3);

        CounterRng init_rng(cfg.master_seed, 3);
        StateVector psi = random_product_state(6, init_rng, InitMode::HaarSite);
        TrotterPlan plan = build_plan(cfg.model, cfg.dt);
        std::vector<double> want;
        for (int s = 1; s <= 10; ++s) {
            step(psi, plan);
            if (s == 5 || s == 10) want.push_back(psi.half_chain_entropy());
        }
        REQUIRE(rec.samples.size() == 2);
        CHECK(rec.samples[0].entropy == want[0]);
        CHECK(rec.samples[1].entropy == want[1]);
        CHECK(rec.samples[0].time == 0.25);
    }
    SECTION("sampling at t = 0 sees the unentangled initial state") {
        RunConfig cfg = small_config();
        cfg.sample_times = {0.0};
        TrajectoryRecord rec = run_trajectory(cfg, 0);
        REQUIRE(rec.samples.size() == 1);
        CHECK(std::abs(rec.samples[0].entropy) < 1e-10);
        CHECK(rec.sz_first == rec.sz_last);
    }
    SECTION("repeated calls are bitwise identical") {
        RunConfig cfg = small_config();
        TrajectoryRecord a = run_trajectory(cfg, 1);
        TrajectoryRecord b = run_trajectory(cfg, 1);
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            CHECK(a.samples[i].entropy == b.samples[i].entropy);
        TrajectoryRecord c = run_trajectory(cfg, 2);
        CHECK(a.samples[0].entropy != c.samples[0].entropy);
    }
}

TEST_CASE("ensembles") {
    SECTION("n_traj = 1 statistics") {
        RunConfig cfg = small_config();
        cfg.n_traj = 1;
        EnsembleResult res = run_ensemble(cfg);
        REQUIRE(res.records.size() == 1);
        CHECK(res.point.S_mean == res.records[0].time_mean_entropy());
        CHECK(res.point.S_stderr == 0.0);
        CHECK(res.point.n_samples == 2);
        CHECK(res.point.L == 6);
    }
    SECTION("results are independent of worker count") {
        RunConfig cfg = small_config();
        cfg.workers = 1;
        EnsembleResult a = run_ensemble(cfg);
        cfg.workers = 3;
        EnsembleResult b = run_ensemble(cfg);
        CHECK(a.digest == b.digest);
        CHECK(a.point.S_mean == b.point.S_mean);
        CHECK(a.point.S_stderr == b.point.S_stderr);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].traj_index == b.records[i].traj_index);
            for (std::size_t k = 0; k < a.records[i].samples.size(); ++k)
                CHECK(a.records[i].samples[k].entropy == b.records[i].samples[k].entropy);
        }
    }
    SECTION("resume reuses stored trajectories and extends the ensemble") {
        MemoryCheckpointStore store;
        RunConfig cfg = small_config();
        cfg.n_traj = 4;
        EnsembleResult first = run_ensemble(cfg, &store);

        cfg.n_traj = 8;
        EnsembleResult extended = run_ensemble(cfg, &store);
        EnsembleResult fresh = run_ensemble(cfg);
        CHECK(extended.digest == fresh.digest);
        CHECK(extended.point.S_mean == fresh.point.S_mean);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(extended.records[i].samples[0].entropy ==
                  first.records[i].samples[0].entropy);
    }
    SECTION("a checkpoint with the wrong sample grid is rejected") {
        MemoryCheckpointStore store;
        RunConfig cfg = small_config();
        TrajectoryRecord bogus;
        bogus.traj_index = 0;
        bogus.samples = {{1.0, 0.5}};  // one sample, config expects two
        store.append(cfg.checkpoint_key(), bogus);
        CHECK_THROWS_WITH(run_ensemble(cfg, &store),
                          Catch::Matchers::ContainsSubstring("sample grid"));
    }
    SECTION("stationarity flag is false for a transient window") {
        RunConfig cfg;
        cfg.model = preset("XXZ", 6);
        cfg.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 0.0};
        cfg.sample_times = {0.25, 5.0};  // entropy still growing in between
        cfg.n_traj = 1;
        cfg.master_seed = 3;
        EnsembleResult res = run_ensemble(cfg);
        CHECK_FALSE(res.stationary);
    }
    SECTION("U(1) audit fields") {
        RunConfig cfg;
        cfg.model = preset("XXZ", 6);
        cfg.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 0.3};
        cfg.init_mode = InitMode::Basis;
        cfg.sample_times = {0.5, 1.0};
        cfg.n_traj = 4;
        cfg.master_seed = 17;
        EnsembleResult res = run_ensemble(cfg);
        CHECK(res.u1_audited);
        CHECK(res.max_sz_drift <= 1e-6);

        cfg.init_mode = InitMode::HaarSite;
        CHECK_FALSE(run_ensemble(cfg).u1_audited);
        cfg.init_mode = InitMode::Basis;
        cfg.model = preset("XYZ", 6);
        CHECK_FALSE(run_ensemble(cfg).u1_audited);
    }
}

TEST_CASE("size sweeps") {
    SECTION("size list validation") {
        CHECK_THROWS_AS(validate_sizes({}, 24), std::invalid_argument);
        CHECK_THROWS_AS(validate_sizes({4, 7}, 24), std::invalid_argument);
        CHECK_THROWS_AS(validate_sizes({4, 4}, 24), std::invalid_argument);
        CHECK_THROWS_AS(validate_sizes({6, 4}, 24), std::invalid_argument);
        CHECK_THROWS_WITH(validate_sizes({8, 26}, 24),
                          Catch::Matchers::ContainsSubstring("memory cap"));
        CHECK_NOTHROW(validate_sizes({8, 26}, 26));
        CHECK_NOTHROW(validate_sizes({2, 4, 6}, 24));
    }
    SECTION("entropy grows with system size under weak monitoring") {
        RunConfig base;
        base.model = preset("XXZ", 4);
        base.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 0.1};
        base.n_traj = 20;
        base.master_seed = 29;
        MemoryCheckpointStore store;
        SweepResult sweep = sweep_sizes(base, {4, 6, 8}, &store);
        REQUIRE(sweep.series.points.size() == 3);
        CHECK(sweep.series.points[0].L == 4);
        CHECK(sweep.series.points[2].L == 8);
        CHECK(sweep.series.points[0].S_mean < sweep.series.points[1].S_mean);
        CHECK(sweep.series.points[1].S_mean < sweep.series.points[2].S_mean);
        for (const auto& e : sweep.ensembles) {
            CHECK(e.stationary);
            CHECK(e.point.S_stderr > 0.0);
        }

        // a second sweep against the same store reloads every trajectory
        SweepResult again = sweep_sizes(base, {4, 6, 8}, &store);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(again.ensembles[i].digest == sweep.ensembles[i].digest);
    }
    SECTION("strong monitoring pins the chain near a product state") {
        RunConfig cfg;
        cfg.model = preset("XX", 8);
        cfg.monitor = MonitorSpec{MonitorKind::SingleSite, Axis::Z, 10.0};
        cfg.dt = 0.02;
        cfg.n_traj = 16;
        cfg.master_seed = 41;
        EnsembleResult res = run_ensemble(cfg);
        CHECK(res.point.S_mean < 0.1);
    }
}
