#include "eecmdp/tables.hpp"

#include "eecmdp/errors.hpp"
#include "eecmdp/rng.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace eecmdp {

namespace {

constexpr char kMagic[8] = {'E', 'E', 'C', 'M', 'D', 'P', '0', '1'};

struct CacheHeader {
    char magic[8];
    std::uint64_t scenario_hash;
    std::int64_t num_states;
    std::int64_t num_actions;
    std::int32_t num_uts;
    std::int32_t mode;
    std::int32_t mc_samples;
    std::int32_t reserved;
};
static_assert(sizeof(CacheHeader) == 48);

// Static chunking over the state range; each worker owns a disjoint
// slab, and every Monte-Carlo cell reseeds from (seed, state, action),
// so the worker count cannot change any value.
void parallel_states(std::int64_t num_states, int threads,
                     const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads == 1 || num_states < 2) {
        body(0, num_states);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::int64_t chunk = (num_states + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::int64_t lo = t * chunk;
        std::int64_t hi = std::min(num_states, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

RewardTables build_reward_tables(const RewardModel& m, RewardMode mode, int mc_samples,
                                 int threads) {
    const Scenario& s = *m.scenario;
    std::int64_t S = m.fsmc->codec.total_states;
    std::int64_t A = m.actions.total_actions;
    int U = s.num_uts_total();

    double bytes = 8.0 * static_cast<double>(S) * static_cast<double>(A) * (1.0 + U);
    double budget = s.memory_budget_mb * 1024.0 * 1024.0;
    if (bytes > budget) {
        std::ostringstream os;
        os << "reward tables need " << static_cast<std::uint64_t>(bytes) << " bytes (" << S
           << " states x " << A << " actions x " << 1 + U
           << " tables) but memory_budget_mb allows " << static_cast<std::uint64_t>(budget);
        throw ConfigError(os.str());
    }

    RewardTables t;
    t.num_states = S;
    t.num_actions = A;
    t.num_uts = U;
    t.mode = mode;
    t.mc_samples = mode == RewardMode::monte_carlo ? mc_samples : 0;
    t.reward.resize(S, A);
    t.cost.assign(U, Eigen::MatrixXd(S, A));

    parallel_states(S, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t state = lo; state < hi; ++state) {
            for (std::int64_t action = 0; action < A; ++action) {
                RewardSample cell;
                if (mode == RewardMode::representative) {
                    cell = representative_reward(m, state, action);
                } else {
                    auto rng = make_rng(s.seed, stream::table_cell,
                                        static_cast<std::uint64_t>(state),
                                        static_cast<std::uint64_t>(action));
                    cell = monte_carlo_reward(m, state, action, mc_samples, rng);
                }
                t.reward(state, action) = cell.reward;
                for (int u = 0; u < U; ++u) t.cost[u](state, action) = cell.cost(u);
            }
        }
    });
    return t;
}

void save_tables(const RewardTables& t, const std::string& path, std::uint64_t scenario_hash) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write table cache '" + path + "'");
    CacheHeader h{};
    std::memcpy(h.magic, kMagic, sizeof(kMagic));
    h.scenario_hash = scenario_hash;
    h.num_states = t.num_states;
    h.num_actions = t.num_actions;
    h.num_uts = t.num_uts;
    h.mode = t.mode == RewardMode::representative ? 0 : 1;
    h.mc_samples = t.mc_samples;
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    auto write_matrix = [&](const Eigen::MatrixXd& mat) {
        for (std::int64_t r = 0; r < mat.rows(); ++r)
            for (std::int64_t c = 0; c < mat.cols(); ++c) {
                double v = mat(r, c);
                out.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
    };
    write_matrix(t.reward);
    for (const auto& cm : t.cost) write_matrix(cm);
    if (!out) throw ConfigError("short write to table cache '" + path + "'");
}

std::optional<RewardTables> try_load_tables(const std::string& path,
                                            std::uint64_t scenario_hash, RewardMode mode,
                                            int mc_samples) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    CacheHeader h{};
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!in || std::memcmp(h.magic, kMagic, sizeof(kMagic)) != 0) return std::nullopt;
    int want_mode = mode == RewardMode::representative ? 0 : 1;
    int want_samples = mode == RewardMode::monte_carlo ? mc_samples : 0;
    if (h.scenario_hash != scenario_hash || h.mode != want_mode ||
        h.mc_samples != want_samples || h.num_states < 1 || h.num_actions < 1 ||
        h.num_uts < 1)
        return std::nullopt;

    RewardTables t;
    t.num_states = h.num_states;
    t.num_actions = h.num_actions;
    t.num_uts = h.num_uts;
    t.mode = mode;
    t.mc_samples = h.mc_samples;
    t.reward.resize(h.num_states, h.num_actions);
    t.cost.assign(h.num_uts, Eigen::MatrixXd(h.num_states, h.num_actions));
    auto read_matrix = [&](Eigen::MatrixXd& mat) {
        for (std::int64_t r = 0; r < mat.rows(); ++r)
            for (std::int64_t c = 0; c < mat.cols(); ++c) {
                double v;
                in.read(reinterpret_cast<char*>(&v), sizeof(v));
                mat(r, c) = v;
            }
    };
    read_matrix(t.reward);
    for (auto& cm : t.cost) read_matrix(cm);
    if (!in) return std::nullopt; // truncated cache: rebuild
    return t;
}

} // namespace eecmdp
