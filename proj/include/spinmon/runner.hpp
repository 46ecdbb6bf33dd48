#pragma once

// Trajectory and ensemble orchestration. Each trajectory evolves a fresh
// seeded random product state through interleaved layers
//     [ second-order Trotter step ; homodyne measurement layer ]
// and records the half-chain entropy on a late-time sample grid. Ensembles
// average the samples over trajectories and sample times; sweeps repeat that
// over a list of system sizes.
//
// Determinism contract: every trajectory is a pure function of
// (master_seed, traj_index), and aggregation always runs in trajectory-index
// order, so results are independent of worker count and scheduling.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spinmon/model.hpp"
#include "spinmon/monitoring.hpp"
#include "spinmon/philox.hpp"
#include "spinmon/state.hpp"
#include "spinmon/stats.hpp"
#include "spinmon/trotter.hpp"

namespace spinmon {

inline constexpr int kDefaultMaxL = 24;

// Format a double so it round-trips exactly (used in keys and CSV).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline const char* init_mode_name(InitMode m) {
    return m == InitMode::HaarSite ? "haar-site" : "basis";
}

struct RunConfig {
    ModelSpec model;
    MonitorSpec monitor;
    double dt = 0.05;
    int n_traj = 100;
    std::vector<double> sample_times;  // empty -> default grid (25+k)/J_x, k=1..5
    uint64_t master_seed = 0;
    InitMode init_mode = InitMode::HaarSite;
    Scheme scheme = Scheme::Exponentiated;
    int workers = 1;
    int max_L = kDefaultMaxL;  // memory guard for sweeps

    // Default late-time grid T_k = (25+k)/J_x, k = 1..5.
    std::vector<double> effective_sample_times() const {
        if (!sample_times.empty()) return sample_times;
        std::vector<double> ts;
        for (int k = 1; k <= 5; ++k) ts.push_back((25.0 + k) / model.Jx);
        return ts;
    }

    void validate() const {
        model.validate();
        monitor.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
        if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
        if (workers < 1) throw std::invalid_argument("workers must be >= 1");
        if (sample_times.empty() && !(model.Jx > 0.0))
            throw std::invalid_argument("default sample times need J_x > 0");
        const auto ts = effective_sample_times();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] < 0.0) throw std::invalid_argument("sample times must be >= 0");
            if (i > 0 && !(ts[i] > ts[i - 1]))
                throw std::invalid_argument("sample times must be strictly increasing");
        }
    }

    // Identifies an ensemble for checkpointing. n_traj is deliberately
    // excluded: records are per-trajectory, so a resumed run with a larger
    // ensemble reuses what exists.
    std::string checkpoint_key() const {
        std::string k;
        k += "model=" + model.name;
        k += ";J=" + format_double(model.Jx) + "," + format_double(model.Jy) + "," +
             format_double(model.Jz) + ";hz=" + format_double(model.hz);
        k += ";monitor=" + monitor.label();
        k += ";L=" + std::to_string(model.L);
        k += ";gamma=" + format_double(monitor.gamma);
        k += ";dt=" + format_double(dt);
        k += ";seed=" + std::to_string(master_seed);
        k += ";scheme=" + std::string(scheme_name(scheme));
        k += ";init=" + std::string(init_mode_name(init_mode));
        std::string ts = ";times=";
        for (double t : effective_sample_times()) ts += format_double(t) + ",";
        return k + ts;
    }
};

struct EntropySample {
    double time = 0.0;
    double entropy = 0.0;
};

struct TrajectoryRecord {
    uint64_t traj_index = 0;
    std::vector<EntropySample> samples;  // one per sample time, in time order
    double sz_first = 0.0;               // <S_z> of the initial state
    double sz_last = 0.0;                // <S_z> after the final step

    double sz_drift() const { return std::abs(sz_last - sz_first); }
    double time_mean_entropy() const {
        double m = 0.0;
        for (const auto& s : samples) m += s.entropy;
        return samples.empty() ? 0.0 : m / static_cast<double>(samples.size());
    }
};

// ---------------------------------------------------------------------------
// checkpointing

// One record per completed trajectory, appendable as trajectories finish.
// Implementations must tolerate records arriving in any order.
class CheckpointStore {
  public:
    virtual ~CheckpointStore() = default;
    virtual std::vector<TrajectoryRecord> load(const std::string& key) = 0;
    virtual void append(const std::string& key, const TrajectoryRecord& rec) = 0;
};

class MemoryCheckpointStore final : public CheckpointStore {
  public:
    std::vector<TrajectoryRecord> load(const std::string& key) override {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = records_.find(key);
        return it == records_.end() ? std::vector<TrajectoryRecord>{} : it->second;
    }
    void append(const std::string& key, const TrajectoryRecord& rec) override {
        std::lock_guard<std::mutex> lock(mu_);
        records_[key].push_back(rec);
    }

  private:
    std::mutex mu_;
    std::map<std::string, std::vector<TrajectoryRecord>> records_;
};

// ---------------------------------------------------------------------------
// single trajectory

// First step boundary at or after t (with a tolerance so that exact
// multiples of dt do not round up).
inline uint32_t sample_step_for(double t, double dt) {
    if (t <= 0.0) return 0;
    double raw = t / dt;
    auto step = static_cast<uint32_t>(std::ceil(raw - 1e-9));
    return step;
}

inline TrajectoryRecord run_trajectory(const RunConfig& config, const TrotterPlan& plan,
                                       const std::vector<PauliOp>& ops,
                                       uint64_t traj_index) {
    const double gamma = config.monitor.gamma;
    const double dt = config.dt;
    const auto times = config.effective_sample_times();
    std::vector<uint32_t> steps(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) steps[k] = sample_step_for(times[k], dt);

    CounterRng init_rng(config.master_seed, traj_index);
    StateVector psi = random_product_state(config.model.L, init_rng, config.init_mode);
    NoiseStream noise(config.master_seed, traj_index, gamma, dt);
    MonitorWorkspace ws;

    TrajectoryRecord rec;
    rec.traj_index = traj_index;
    rec.sz_first = psi.total_sz();

    std::size_t k = 0;
    while (k < steps.size() && steps[k] == 0) {
        rec.samples.push_back({times[k], psi.half_chain_entropy()});
        ++k;
    }
    const uint32_t n_steps = steps.empty() ? 0 : steps.back();
    const bool monitored = (gamma > 0.0) && !ops.empty();
    for (uint32_t s = 1; s <= n_steps; ++s) {
        step(psi, plan);
        if (monitored) {
            if (config.scheme == Scheme::Exponentiated)
                homodyne_layer(psi, ops, noise, s, gamma, dt);
            else
                euler_maruyama_layer(psi, ops, noise, s, gamma, dt, ws);
        }
        while (k < steps.size() && steps[k] == s) {
            rec.samples.push_back({times[k], psi.half_chain_entropy()});
            ++k;
        }
    }
    rec.sz_last = psi.total_sz();
    return rec;
}

// Convenience overload building its own plan and operator set.
inline TrajectoryRecord run_trajectory(const RunConfig& config, uint64_t traj_index) {
    config.validate();
    TrotterPlan plan = build_plan(config.model, config.dt);
    auto ops = monitored_operators(config.model, config.monitor);
    return run_trajectory(config, plan, ops, traj_index);
}

// ---------------------------------------------------------------------------
// ensembles

struct EnsembleResult {
    ScalingPoint point;
    bool stationary = true;      // first vs last sample time within 3 sigma
    bool u1_audited = false;     // audit applies (U(1) setup + basis init)
    double max_sz_drift = 0.0;   // max per-trajectory |<S_z>| drift
    uint64_t digest = 0;         // FNV-1a over the index-ordered records
    std::vector<TrajectoryRecord> records;  // index order
};

namespace detail {

inline void fnv1a_mix(uint64_t& h, uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (v >> (8 * byte)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

inline uint64_t records_digest(const std::vector<TrajectoryRecord>& records) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& r : records) {
        fnv1a_mix(h, r.traj_index);
        for (const auto& s : r.samples) {
            fnv1a_mix(h, std::bit_cast<uint64_t>(s.time));
            fnv1a_mix(h, std::bit_cast<uint64_t>(s.entropy));
        }
    }
    return h;
}

}  // namespace detail

// Run (or resume) all trajectories of one configuration and aggregate.
// S_mean is the flat average over all n_traj x N_T samples; the standard
// error is computed across per-trajectory time-averaged means, since samples
// within a trajectory are temporally correlated.
inline EnsembleResult run_ensemble(const RunConfig& config,
                                   CheckpointStore* store = nullptr) {
    config.validate();
    const auto times = config.effective_sample_times();
    const std::string key = config.checkpoint_key();
    const auto n = static_cast<std::size_t>(config.n_traj);

    std::vector<std::optional<TrajectoryRecord>> slots(n);
    if (store) {
        for (auto& rec : store->load(key)) {
            if (rec.samples.size() != times.size())
                throw std::runtime_error(
                    "checkpoint record does not match the configured sample grid");
            if (rec.traj_index < n) slots[rec.traj_index] = std::move(rec);
        }
    }

    const TrotterPlan plan = build_plan(config.model, config.dt);
    const auto ops = monitored_operators(config.model, config.monitor);

    std::atomic<std::size_t> next{0};
    std::mutex store_mu;
    std::exception_ptr first_error = nullptr;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            if (slots[i].has_value()) continue;
            try {
                TrajectoryRecord rec = run_trajectory(config, plan, ops, i);
                if (store) {
                    std::lock_guard<std::mutex> lock(store_mu);
                    store->append(key, rec);
                }
                slots[i] = std::move(rec);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int n_workers = std::min<int>(config.workers, static_cast<int>(n));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EnsembleResult res;
    res.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!slots[i].has_value())
            throw std::runtime_error("ensemble finished with missing trajectories");
        res.records.push_back(std::move(*slots[i]));
    }

    // flat mean (= mean of per-trajectory means, all trajectories share N_T)
    const std::size_t n_times = times.size();
    std::vector<double> traj_means(n);
    for (std::size_t i = 0; i < n; ++i) traj_means[i] = res.records[i].time_mean_entropy();
    double mean = 0.0;
    for (double m : traj_means) mean += m;
    mean /= static_cast<double>(n);

    double stderr_val = 0.0;
    if (n > 1) {
        double ss = 0.0;
        for (double m : traj_means) ss += (m - mean) * (m - mean);
        stderr_val = std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
    }

    res.point.L = config.model.L;
    res.point.S_mean = mean;
    res.point.S_stderr = stderr_val;
    res.point.n_samples = static_cast<int>(n * n_times);

    const double s_max = 0.5 * config.model.L * std::log(2.0) + 1e-9;
    if (mean < -1e-12 || mean > s_max)
        throw std::logic_error("ensemble mean entropy outside [0, (L/2) ln 2]");

    // stationarity gate: first vs last sample time within 3 combined sigma
    if (n_times >= 2 && n >= 1) {
        double m_first = 0.0, m_last = 0.0;
        for (const auto& r : res.records) {
            m_first += r.samples.front().entropy;
            m_last += r.samples.back().entropy;
        }
        m_first /= static_cast<double>(n);
        m_last /= static_cast<double>(n);
        double v_first = 0.0, v_last = 0.0;
        if (n > 1) {
            for (const auto& r : res.records) {
                v_first += (r.samples.front().entropy - m_first) *
                           (r.samples.front().entropy - m_first);
                v_last += (r.samples.back().entropy - m_last) *
                          (r.samples.back().entropy - m_last);
            }
            v_first /= static_cast<double>(n - 1);
            v_last /= static_cast<double>(n - 1);
        }
        const double se2 = v_first / static_cast<double>(n) + v_last / static_cast<double>(n);
        res.stationary = std::abs(m_last - m_first) <= 3.0 * std::sqrt(se2);
    }

    res.u1_audited = classify(config.model, config.monitor).u1_symmetric &&
                     config.init_mode == InitMode::Basis;
    for (const auto& r : res.records) res.max_sz_drift = std::max(res.max_sz_drift, r.sz_drift());
    res.digest = detail::records_digest(res.records);
    return res;
}

// ---------------------------------------------------------------------------
// size sweeps

struct SweepResult {
    ScalingSeries series;
    std::vector<EnsembleResult> ensembles;  // one per size, same order
};

inline void validate_sizes(const std::vector<int>& sizes, int max_L) {
    if (sizes.empty()) throw std::invalid_argument("sizes must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 2 || sizes[i] % 2 != 0)
            throw std::invalid_argument("sizes must be even and >= 2");
        if (sizes[i] > max_L)
            throw std::invalid_argument("refusing L=" + std::to_string(sizes[i]) +
                                        ": exceeds the memory cap max_L=" +
                                        std::to_string(max_L) +
                                        " (raise max_L to override)");
        if (i > 0 && !(sizes[i] > sizes[i - 1]))
            throw std::invalid_argument("sizes must be strictly increasing");
    }
}

// One ensemble per size. Completed trajectories persist through `store`, so
// an interrupted sweep resumes where it stopped. Note an F-test downstream
// needs at least 4 sizes; shorter sweeps are allowed here and rejected at
// analysis time.
inline SweepResult sweep_sizes(const RunConfig& base, const std::vector<int>& sizes,
                               CheckpointStore* store = nullptr) {
    validate_sizes(sizes, base.max_L);
    SweepResult out;
    for (int L : sizes) {
        RunConfig cfg = base;
        cfg.model.L = L;
        EnsembleResult r = run_ensemble(cfg, store);
        out.series.points.push_back(r.point);
        out.ensembles.push_back(std::move(r));
    }
    return out;
}

}  // namespace spinmon
