#include "eecmdp/phy.hpp"

#include "eecmdp/errors.hpp"
#include "eecmdp/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace eecmdp {

namespace {

// Consecutive rejection failures tolerated before declaring the
// conditional sampler starved (acceptance below 1e-4).
constexpr int kMaxRejectionAttempts = 10000;

Eigen::VectorXcd draw_vector(std::mt19937_64& rng, double beta, int antennas) {
    Eigen::VectorXcd v(antennas);
    double scale = std::sqrt(beta / 2.0);
    for (int m = 0; m < antennas; ++m) {
        double re = normal_draw(rng);
        double im = normal_draw(rng);
        v(m) = std::complex<double>(scale * re, scale * im);
    }
    return v;
}

bool in_bin(const LinkQuantizer& q, int bin, double value) {
    return value >= q.thresholds[bin] && value < q.thresholds[bin + 1];
}

[[noreturn]] void sampler_starved(int l, int i, int kappa) {
    std::ostringstream os;
    os << "conditional channel sampler starved for BS " << l << ", cell " << i << ", UT "
       << kappa << ": acceptance below 1e-4 after " << kMaxRejectionAttempts
       << " attempts; use fewer (larger) bins or fewer antennas";
    throw NumericalError(os.str());
}

} // namespace

PowerGrid make_power_grid(double min_power_w, double max_power_w, int num_levels,
                          GridSpacing spacing) {
    if (num_levels < 1) throw ConfigError("power grid needs at least one level");
    if (!(min_power_w > 0.0)) throw ConfigError("power grid minimum must be positive");
    if (num_levels == 1 && min_power_w != max_power_w)
        throw ConfigError("a single-level power grid needs min == max");
    if (num_levels > 1 && !(max_power_w > min_power_w))
        throw ConfigError("power grid maximum must exceed the minimum");
    PowerGrid g;
    g.min_power = min_power_w;
    g.max_power = max_power_w;
    g.spacing = spacing;
    g.levels.resize(num_levels);
    for (int i = 0; i < num_levels; ++i) {
        double t = num_levels == 1 ? 0.0 : static_cast<double>(i) / (num_levels - 1);
        g.levels[i] = spacing == GridSpacing::logarithmic
                          ? min_power_w * std::pow(max_power_w / min_power_w, t)
                          : min_power_w + t * (max_power_w - min_power_w);
    }
    g.levels.front() = min_power_w;
    g.levels.back() = max_power_w;
    return g;
}

ActionCodec::ActionCodec(int uts, int levels) {
    if (uts < 1 || levels < 1) throw ConfigError("action codec needs uts, levels >= 1");
    num_uts = uts;
    num_levels = levels;
    total_actions = 1;
    for (int i = 0; i < uts; ++i) {
        if (total_actions > std::numeric_limits<std::int64_t>::max() / (4 * levels))
            throw ConfigError("composite action space overflows a 64-bit index");
        total_actions *= levels;
    }
}

std::int64_t ActionCodec::encode(const std::vector<int>& level_indices) const {
    if (static_cast<int>(level_indices.size()) != num_uts)
        throw std::domain_error("level tuple length does not match UT count");
    std::int64_t a = 0;
    for (int i = num_uts - 1; i >= 0; --i) {
        if (level_indices[i] < 0 || level_indices[i] >= num_levels)
            throw std::domain_error("power level index out of range");
        a = a * num_levels + level_indices[i];
    }
    return a;
}

void ActionCodec::decode(std::int64_t action, std::vector<int>& level_indices) const {
    if (action < 0 || action >= total_actions)
        throw std::domain_error("composite action index out of range");
    level_indices.resize(num_uts);
    for (int i = 0; i < num_uts; ++i) {
        level_indices[i] = static_cast<int>(action % num_levels);
        action /= num_levels;
    }
}

std::vector<int> ActionCodec::decode(std::int64_t action) const {
    std::vector<int> idx;
    decode(action, idx);
    return idx;
}

void action_powers(const ActionCodec& codec, const PowerGrid& grid, std::int64_t action,
                   Eigen::VectorXd& powers) {
    std::vector<int> idx = codec.decode(action);
    powers.resize(codec.num_uts);
    for (int u = 0; u < codec.num_uts; ++u) powers(u) = grid.levels[idx[u]];
}

ChannelRealization sample_channel(const Scenario& s, const NetworkGeometry& geo,
                                  std::mt19937_64& rng) {
    ChannelRealization r;
    r.num_cells = s.num_cells;
    r.uts_per_cell = s.uts_per_cell;
    r.num_antennas = s.num_antennas;
    r.noise_variance = s.noise_variance_w();
    int L = s.num_cells, K = s.uts_per_cell, M = s.num_antennas;
    r.channels.resize(static_cast<size_t>(L) * L);
    for (int l = 0; l < L; ++l) {
        for (int i = 0; i < L; ++i) {
            Eigen::MatrixXcd G(M, K);
            for (int kappa = 0; kappa < K; ++kappa)
                G.col(kappa) = draw_vector(rng, geo.gain(l, i, kappa).beta, M);
            r.channels[static_cast<size_t>(l) * L + i] = std::move(G);
        }
    }
    return r;
}

Eigen::MatrixXcd zf_receiver(const Eigen::MatrixXcd& own_cell_channel) {
    const Eigen::MatrixXcd& G = own_cell_channel;
    if (G.rows() < G.cols())
        throw NumericalError("zero-forcing needs at least as many antennas as UTs");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > smax * 1e-12) || !std::isfinite(smax)) {
        std::ostringstream os;
        os << "own-cell channel is rank deficient: condition number "
           << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
        throw NumericalError(os.str());
    }
    Eigen::MatrixXcd gram = G.adjoint() * G;
    // A^H = (G^H G)^(-1) G^H
    Eigen::MatrixXcd aH = gram.llt().solve(G.adjoint());
    return aH.adjoint();
}

Eigen::VectorXd sinr(const Eigen::MatrixXcd& receiver, const ChannelRealization& real,
                     int cell, const Eigen::VectorXd& powers) {
    int L = real.num_cells, K = real.uts_per_cell;
    if (cell < 0 || cell >= L) throw std::domain_error("cell index out of range");
    if (powers.size() != static_cast<Eigen::Index>(L) * K)
        throw std::domain_error("power vector length does not match UT count");
    Eigen::VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXcd a = receiver.col(k);
        double desired = 0.0;
        double total = 0.0;
        for (int i = 0; i < L; ++i) {
            const Eigen::MatrixXcd& G = real.channel(cell, i);
            for (int kappa = 0; kappa < K; ++kappa) {
                double gain = std::norm(a.dot(G.col(kappa)));
                double term = powers(static_cast<Eigen::Index>(i) * K + kappa) * gain;
                total += term;
                if (i == cell && kappa == k) desired = term;
            }
        }
        double noise = real.noise_variance * a.squaredNorm();
        out(k) = desired / (total - desired + noise);
    }
    return out;
}

double ee_reward(const Eigen::VectorXd& gammas, const Eigen::VectorXd& powers,
                 double circuit_power_w) {
    if (gammas.size() != powers.size())
        throw std::domain_error("SINR and power vectors must have equal length");
    double r = 0.0;
    for (Eigen::Index u = 0; u < gammas.size(); ++u) {
        double total_power = powers(u) + circuit_power_w;
        if (!(total_power > 0.0))
            throw std::domain_error("per-UT transmit plus circuit power must be positive");
        r += instantaneous_rate(gammas(u)) / total_power;
    }
    return r;
}

PowerGrid scenario_power_grid(const Scenario& s) {
    PowerGrid g = make_power_grid(s.power_min_w(), s.power_max_w(), s.power_levels,
                                  s.power_spacing);
    if (s.has_power_cap()) {
        double cap_w = s.power_cap_mw * 1e-3 * (1.0 + 1e-12);
        while (g.levels.size() > 1 && g.levels.back() > cap_w) g.levels.pop_back();
        if (g.levels.front() > cap_w)
            throw ConfigError("power_cap lies below power_min; no transmit level is usable");
        g.max_power = g.levels.back();
    }
    return g;
}

RewardModel make_reward_model(const Scenario& s, const NetworkGeometry& geo,
                              const FsmcModel& fsmc) {
    RewardModel m;
    m.scenario = &s;
    m.geo = &geo;
    m.fsmc = &fsmc;
    m.grid = scenario_power_grid(s);
    m.actions = ActionCodec(s.num_uts_total(), static_cast<int>(m.grid.levels.size()));
    return m;
}

RewardSample representative_reward(const RewardModel& m, std::int64_t state,
                                   std::int64_t action) {
    const Scenario& s = *m.scenario;
    const FsmcModel& f = *m.fsmc;
    int L = s.num_cells, K = s.uts_per_cell;
    std::vector<int> bins = f.codec.decode(state);
    Eigen::VectorXd powers;
    action_powers(m.actions, m.grid, action, powers);

    double noise = s.noise_variance_w() / (s.num_antennas - s.uts_per_cell);
    RewardSample out;
    out.cost.resize(static_cast<Eigen::Index>(L) * K);
    Eigen::VectorXd gammas(static_cast<Eigen::Index>(L) * K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            int own = f.codec.link_index(l, l, k, k);
            double desired = powers(static_cast<Eigen::Index>(l) * K + k) *
                             f.quantizers[own].representative[bins[own]];
            double interference = 0.0;
            for (int i = 0; i < L; ++i) {
                if (i == l) continue; // ZF nulls the own-cell UTs
                for (int kappa = 0; kappa < K; ++kappa) {
                    int link = f.codec.link_index(l, i, k, kappa);
                    interference += powers(static_cast<Eigen::Index>(i) * K + kappa) *
                                    f.quantizers[link].representative[bins[link]];
                }
            }
            double gamma = desired / (interference + noise);
            gammas(static_cast<Eigen::Index>(l) * K + k) = gamma;
            out.cost(static_cast<Eigen::Index>(l) * K + k) = instantaneous_rate(gamma);
        }
    }
    out.reward = ee_reward(gammas, powers, s.circuit_power_w());
    return out;
}

RewardSample monte_carlo_reward(const RewardModel& m, std::int64_t state, std::int64_t action,
                                int samples, std::mt19937_64& rng) {
    if (samples < 1) throw ConfigError("Monte-Carlo sampling needs at least one sample");
    const Scenario& s = *m.scenario;
    const FsmcModel& f = *m.fsmc;
    const NetworkGeometry& geo = *m.geo;
    int L = s.num_cells, K = s.uts_per_cell, M = s.num_antennas;
    std::vector<int> bins = f.codec.decode(state);
    Eigen::VectorXd powers;
    action_powers(m.actions, m.grid, action, powers);

    double sum_reward = 0.0, sum_reward_sq = 0.0;
    Eigen::VectorXd sum_cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L) * K);
    std::int64_t accepted_blocks = 0, attempted_blocks = 0;

    ChannelRealization real;
    real.num_cells = L;
    real.uts_per_cell = K;
    real.num_antennas = M;
    real.noise_variance = s.noise_variance_w();
    real.channels.assign(static_cast<size_t>(L) * L, Eigen::MatrixXcd());

    for (int n = 0; n < samples; ++n) {
        // Own-cell blocks first: the accepted directions g_llk also
        // define the conditioning scalars of every cross link.
        std::vector<Eigen::MatrixXcd> directions(L); // normalized own columns, M x K
        for (int l = 0; l < L; ++l) {
            Eigen::MatrixXcd G(M, K);
            int attempts = 0;
            for (;;) {
                ++attempted_blocks;
                if (++attempts > kMaxRejectionAttempts) sampler_starved(l, l, 0);
                for (int k = 0; k < K; ++k)
                    G.col(k) = draw_vector(rng, geo.gain(l, l, k).beta, M);
                bool ok = true;
                for (int k = 0; k < K && ok; ++k) {
                    double norm_sq = G.col(k).squaredNorm() / M;
                    int own = f.codec.link_index(l, l, k, k);
                    if (!in_bin(f.quantizers[own], bins[own], norm_sq)) ok = false;
                    for (int kappa = 0; kappa < K && ok; ++kappa) {
                        if (kappa == k) continue;
                        double cross = std::norm(G.col(k).normalized().dot(G.col(kappa)));
                        int link = f.codec.link_index(l, l, k, kappa);
                        if (!in_bin(f.quantizers[link], bins[link], cross)) ok = false;
                    }
                }
                if (ok) break;
            }
            ++accepted_blocks;
            real.channels[static_cast<size_t>(l) * L + l] = G;
            directions[l].resize(M, K);
            for (int k = 0; k < K; ++k) directions[l].col(k) = G.col(k).normalized();
        }
        // Cross blocks: each interfering vector is conditioned on its
        // projections onto the K own-cell directions of the receiver.
        for (int l = 0; l < L; ++l) {
            for (int i = 0; i < L; ++i) {
                if (i == l) continue;
                Eigen::MatrixXcd G(M, K);
                for (int kappa = 0; kappa < K; ++kappa) {
                    int attempts = 0;
                    for (;;) {
                        ++attempted_blocks;
                        if (++attempts > kMaxRejectionAttempts) sampler_starved(l, i, kappa);
                        Eigen::VectorXcd g = draw_vector(rng, geo.gain(l, i, kappa).beta, M);
                        bool ok = true;
                        for (int k = 0; k < K && ok; ++k) {
                            double cross = std::norm(directions[l].col(k).dot(g));
                            int link = f.codec.link_index(l, i, k, kappa);
                            if (!in_bin(f.quantizers[link], bins[link], cross)) ok = false;
                        }
                        if (ok) {
                            G.col(kappa) = g;
                            break;
                        }
                    }
                    ++accepted_blocks;
                }
                real.channels[static_cast<size_t>(l) * L + i] = std::move(G);
            }
        }

        Eigen::VectorXd gammas(static_cast<Eigen::Index>(L) * K);
        for (int l = 0; l < L; ++l) {
            Eigen::MatrixXcd A = zf_receiver(real.channel(l, l));
            Eigen::VectorXd g = sinr(A, real, l, powers);
            for (int k = 0; k < K; ++k) {
                gammas(static_cast<Eigen::Index>(l) * K + k) = g(k);
                sum_cost(static_cast<Eigen::Index>(l) * K + k) += instantaneous_rate(g(k));
            }
        }
        double r = ee_reward(gammas, powers, s.circuit_power_w());
        sum_reward += r;
        sum_reward_sq += r * r;
    }

    RewardSample out;
    out.reward = sum_reward / samples;
    out.cost = sum_cost / samples;
    out.acceptance =
        static_cast<double>(accepted_blocks) / static_cast<double>(attempted_blocks);
    if (samples > 1) {
        double var = (sum_reward_sq - sum_reward * sum_reward / samples) / (samples - 1);
        out.reward_se = std::sqrt(std::max(0.0, var) / samples);
    }
    return out;
}

} // namespace eecmdp
