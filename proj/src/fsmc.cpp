#include "eecmdp/fsmc.hpp"

#include "eecmdp/errors.hpp"
#include "eecmdp/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace eecmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(2 pi psi/psi0) e^(-psi/psi0): the crossing rate per unit f_c.
double crossing_shape(double gain, double mean_gain) {
    if (gain <= 0.0) return 0.0;
    if (std::isinf(gain)) return 0.0;
    double r = gain / mean_gain;
    return std::sqrt(2.0 * M_PI * r) * std::exp(-r);
}

void check_thresholds(const std::vector<double>& t) {
    if (t.size() < 2) throw ConfigError("quantizer needs at least 2 thresholds");
    if (t.front() != 0.0) throw ConfigError("first threshold must be 0");
    if (!std::isinf(t.back())) throw ConfigError("last threshold must be +infinity");
    for (size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw ConfigError("thresholds must be strictly increasing");
}

} // namespace

LargeScaleGain compute_large_scale_gain(double distance_m, double shadow_linear,
                                        double constant, double exponent) {
    if (!(distance_m > 0.0))
        throw std::domain_error("large-scale gain needs a positive distance");
    if (!(shadow_linear > 0.0) || !(constant > 0.0))
        throw std::domain_error("shadow draw and path-loss constant must be positive");
    LargeScaleGain g;
    g.distance_m = distance_m;
    g.shadow_linear = shadow_linear;
    g.pathloss_exponent = exponent;
    g.pathloss_constant = constant;
    g.beta = constant * shadow_linear / std::pow(distance_m, exponent);
    return g;
}

LinkQuantizer quantizer_from_thresholds(double mean_gain, std::vector<double> thresholds) {
    if (!(mean_gain > 0.0)) throw ConfigError("quantizer mean gain must be positive");
    check_thresholds(thresholds);
    LinkQuantizer q;
    q.mean_gain = mean_gain;
    q.thresholds = std::move(thresholds);
    int n = static_cast<int>(q.thresholds.size()) - 1;
    q.steady.resize(n);
    q.representative.resize(n);
    for (int b = 0; b < n; ++b) {
        double lo = q.thresholds[b], hi = q.thresholds[b + 1];
        double elo = std::exp(-lo / mean_gain);
        double ehi = std::isinf(hi) ? 0.0 : std::exp(-hi / mean_gain);
        q.steady[b] = elo - ehi;
        // truncated-exponential conditional mean over (lo, hi)
        double num = (lo + mean_gain) * elo - (std::isinf(hi) ? 0.0 : (hi + mean_gain) * ehi);
        q.representative[b] = num / q.steady[b];
    }
    return q;
}

LinkQuantizer equiprobable_thresholds(double mean_gain, int num_bins) {
    if (num_bins < 2)
        throw ConfigError("equiprobable quantizer needs at least 2 bins");
    if (!(mean_gain > 0.0)) throw ConfigError("quantizer mean gain must be positive");
    std::vector<double> t(num_bins + 1);
    for (int b = 0; b < num_bins; ++b)
        t[b] = -mean_gain * std::log1p(-static_cast<double>(b) / num_bins);
    t[num_bins] = kInf;
    return quantizer_from_thresholds(mean_gain, std::move(t));
}

std::vector<double> steady_probabilities(const LinkQuantizer& q) {
    std::vector<double> p(q.bins());
    for (int b = 0; b < q.bins(); ++b) {
        double hi = q.thresholds[b + 1];
        p[b] = std::exp(-q.thresholds[b] / q.mean_gain) -
               (std::isinf(hi) ? 0.0 : std::exp(-hi / q.mean_gain));
    }
    return p;
}

double level_crossing_rate(double gain, double mean_gain, double normalized_doppler) {
    return normalized_doppler * crossing_shape(gain, mean_gain);
}

double bin_representative_gain(const LinkQuantizer& q, int bin) {
    if (bin < 0 || bin >= q.bins()) throw std::domain_error("bin index out of range");
    return q.representative[bin];
}

double max_admissible_doppler(const LinkQuantizer& q) {
    int n = q.bins();
    double best = kInf;
    for (int b = 0; b < n; ++b) {
        double shape = 0.0;
        if (b + 1 <= n - 1) shape += crossing_shape(q.thresholds[b + 1], q.mean_gain);
        if (b >= 1) shape += crossing_shape(q.thresholds[b], q.mean_gain);
        if (shape > 0.0) best = std::min(best, q.steady[b] / shape);
    }
    return best;
}

LinkTransitionMatrix link_transition_matrix(const LinkQuantizer& q, double normalized_doppler) {
    if (!(normalized_doppler > 0.0))
        throw ConfigError("normalized_doppler must be positive");
    int n = q.bins();
    LinkTransitionMatrix m;
    m.normalized_doppler = normalized_doppler;
    m.probs = Eigen::MatrixXd::Zero(n, n);
    for (int b = 0; b < n; ++b) {
        double up = 0.0, down = 0.0;
        if (b + 1 <= n - 1)
            up = level_crossing_rate(q.thresholds[b + 1], q.mean_gain, normalized_doppler) /
                 q.steady[b];
        if (b >= 1)
            down = level_crossing_rate(q.thresholds[b], q.mean_gain, normalized_doppler) /
                   q.steady[b];
        double self = 1.0 - up - down;
        if (up > 1.0 || down > 1.0 || self < 0.0) {
            std::ostringstream os;
            os << "normalized_doppler " << normalized_doppler
               << " too fast for the quantization: bin " << b
               << " leaves probability " << up + down
               << "; maximum admissible normalized_doppler is " << max_admissible_doppler(q);
            throw ConfigError(os.str());
        }
        if (b + 1 <= n - 1) m.probs(b, b + 1) = up;
        if (b >= 1) m.probs(b, b - 1) = down;
        m.probs(b, b) = self;
    }
    return m;
}

StateCodec::StateCodec(int L, int K, int Q_S) {
    if (L < 1 || K < 1 || Q_S < 1)
        throw ConfigError("state codec needs L, K, Q_S >= 1");
    num_cells = L;
    num_uts = K;
    bins_per_link = Q_S;
    link_count = L * L * K * K;
    total_states = 1;
    for (int i = 0; i < link_count; ++i) {
        if (total_states > std::numeric_limits<std::int64_t>::max() / (4 * Q_S))
            throw ConfigError("composite state space overflows a 64-bit index");
        total_states *= Q_S;
    }
}

std::int64_t StateCodec::encode(const std::vector<int>& bins) const {
    if (static_cast<int>(bins.size()) != link_count)
        throw std::domain_error("bin tuple length does not match link count");
    std::int64_t s = 0;
    for (int i = link_count - 1; i >= 0; --i) {
        if (bins[i] < 0 || bins[i] >= bins_per_link)
            throw std::domain_error("bin index out of range");
        s = s * bins_per_link + bins[i];
    }
    return s;
}

void StateCodec::decode(std::int64_t state, std::vector<int>& bins) const {
    if (state < 0 || state >= total_states)
        throw std::domain_error("composite state index out of range");
    bins.resize(link_count);
    for (int i = 0; i < link_count; ++i) {
        bins[i] = static_cast<int>(state % bins_per_link);
        state /= bins_per_link;
    }
}

std::vector<int> StateCodec::decode(std::int64_t state) const {
    std::vector<int> bins;
    decode(state, bins);
    return bins;
}

double composite_transition_probability(const StateCodec& codec,
                                        const std::vector<LinkTransitionMatrix>& links,
                                        std::int64_t from_state, std::int64_t to_state) {
    if (static_cast<int>(links.size()) != codec.link_count)
        throw std::domain_error("link matrix count does not match codec");
    if (from_state < 0 || from_state >= codec.total_states || to_state < 0 ||
        to_state >= codec.total_states)
        throw std::domain_error("composite state index out of range");
    double p = 1.0;
    std::int64_t f = from_state, t = to_state;
    for (int i = 0; i < codec.link_count; ++i) {
        int fb = static_cast<int>(f % codec.bins_per_link);
        int tb = static_cast<int>(t % codec.bins_per_link);
        f /= codec.bins_per_link;
        t /= codec.bins_per_link;
        p *= links[i].probs(fb, tb);
        if (p == 0.0) return 0.0;
    }
    return p;
}

Eigen::MatrixXd composite_transition_matrix(const StateCodec& codec,
                                            const std::vector<LinkTransitionMatrix>& links) {
    std::int64_t n = codec.total_states;
    Eigen::MatrixXd P(n, n);
    for (std::int64_t s = 0; s < n; ++s)
        for (std::int64_t t = 0; t < n; ++t)
            P(s, t) = composite_transition_probability(codec, links, s, t);
    return P;
}

Eigen::VectorXd composite_stationary(const StateCodec& codec,
                                     const std::vector<LinkQuantizer>& quantizers) {
    if (static_cast<int>(quantizers.size()) != codec.link_count)
        throw std::domain_error("quantizer count does not match codec");
    std::int64_t n = codec.total_states;
    Eigen::VectorXd pi(n);
    for (std::int64_t s = 0; s < n; ++s) {
        double p = 1.0;
        std::int64_t rest = s;
        for (int i = 0; i < codec.link_count; ++i) {
            p *= quantizers[i].steady[static_cast<int>(rest % codec.bins_per_link)];
            rest /= codec.bins_per_link;
        }
        pi(s) = p;
    }
    return pi;
}

NetworkGeometry build_geometry(const Scenario& s) {
    NetworkGeometry geo;
    geo.num_cells = s.num_cells;
    geo.uts_per_cell = s.uts_per_cell;
    int L = s.num_cells, K = s.uts_per_cell;

    geo.bs_positions.resize(L);
    for (int l = 0; l < L; ++l)
        geo.bs_positions[l] = UtPosition{l * s.geometry.bs_spacing_m, 0.0};

    geo.ut_positions.resize(static_cast<size_t>(L) * K);
    for (int i = 0; i < L; ++i) {
        for (int k = 0; k < K; ++k) {
            auto rng = make_rng(s.seed, stream::geometry, 1,
                                static_cast<std::uint64_t>(i) * K + k);
            double r = 0.0;
            do {
                r = s.geometry.cell_radius_m * std::sqrt(unit_uniform(rng));
            } while (r < s.geometry.min_ut_distance_m);
            double theta = 2.0 * M_PI * unit_uniform(rng);
            geo.ut_positions[static_cast<size_t>(i) * K + k] =
                UtPosition{geo.bs_positions[i].x + r * std::cos(theta),
                           geo.bs_positions[i].y + r * std::sin(theta)};
        }
    }

    double shadow_std_db = std::sqrt(s.shadow_variance_db);
    geo.gains.resize(static_cast<size_t>(L) * L * K);
    for (int l = 0; l < L; ++l) {
        for (int i = 0; i < L; ++i) {
            for (int k = 0; k < K; ++k) {
                auto rng = make_rng(s.seed, stream::geometry, 2,
                                    (static_cast<std::uint64_t>(l) * L + i) * K + k);
                double shadow_db = shadow_std_db * normal_draw(rng);
                double shadow = std::pow(10.0, shadow_db / 10.0);
                const UtPosition& b = geo.bs_positions[l];
                const UtPosition& u = geo.ut_positions[static_cast<size_t>(i) * K + k];
                double d = std::hypot(b.x - u.x, b.y - u.y);
                LargeScaleGain g =
                    compute_large_scale_gain(d, shadow, s.pathloss_constant,
                                             s.pathloss_exponent);
                g.shadow_db_variance = s.shadow_variance_db;
                geo.gains[(static_cast<size_t>(l) * L + i) * K + k] = g;
            }
        }
    }
    return geo;
}

FsmcModel build_fsmc(const Scenario& s, const NetworkGeometry& geo) {
    int L = s.num_cells, K = s.uts_per_cell;
    FsmcModel m{StateCodec(L, K, s.bins), {}, {}, {}};
    m.quantizers.resize(m.codec.link_count);
    m.links.resize(m.codec.link_count);
    for (int l = 0; l < L; ++l) {
        for (int i = 0; i < L; ++i) {
            for (int k = 0; k < K; ++k) {
                for (int kappa = 0; kappa < K; ++kappa) {
                    double psi0 = geo.gain(l, i, kappa).beta;
                    LinkQuantizer q;
                    if (!s.threshold_grid.empty()) {
                        std::vector<double> t;
                        t.reserve(s.threshold_grid.size() + 2);
                        t.push_back(0.0);
                        for (double v : s.threshold_grid) t.push_back(v * psi0);
                        t.push_back(std::numeric_limits<double>::infinity());
                        q = quantizer_from_thresholds(psi0, std::move(t));
                    } else if (s.bins == 1) {
                        q = quantizer_from_thresholds(
                            psi0, {0.0, std::numeric_limits<double>::infinity()});
                    } else {
                        q = equiprobable_thresholds(psi0, s.bins);
                    }
                    int idx = m.codec.link_index(l, i, k, kappa);
                    m.links[idx] = link_transition_matrix(q, s.normalized_doppler);
                    m.quantizers[idx] = std::move(q);
                }
            }
        }
    }
    m.stationary = composite_stationary(m.codec, m.quantizers);
    return m;
}

} // namespace eecmdp
