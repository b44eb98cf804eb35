#pragma once

#include "eecmdp/scenario.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace eecmdp {

// Large-scale gain of one BS-UT link: path loss with exponent alpha
// and constant phi, times a log-normal shadow draw.
struct LargeScaleGain {
    double beta = 0.0;        // linear power gain
    double distance_m = 0.0;
    double shadow_linear = 1.0;
    double shadow_db_variance = 0.0;
    double pathloss_exponent = 0.0;
    double pathloss_constant = 0.0;
};

// beta = constant * shadow_linear / distance^exponent.
LargeScaleGain compute_large_scale_gain(double distance_m, double shadow_linear,
                                        double constant, double exponent);

// Per-link quantizer of the scalar effective gain, assumed exponential
// with mean `mean_gain`. thresholds has Q_S+1 entries, 0 first and
// +infinity last; steady[b] is the stationary probability of bin b and
// representative[b] its conditional mean gain.
struct LinkQuantizer {
    std::vector<double> thresholds;
    double mean_gain = 1.0;
    std::vector<double> steady;
    std::vector<double> representative;

    int bins() const { return static_cast<int>(steady.size()); }
};

// Thresholds solving 1 - e^(-G/psi0) = b/Q_S, so every bin is hit with
// probability exactly 1/Q_S.
LinkQuantizer equiprobable_thresholds(double mean_gain, int num_bins);

// Explicit thresholds (must start at 0, end at +infinity, strictly
// increase); accepts a single bin {0, inf}.
LinkQuantizer quantizer_from_thresholds(double mean_gain, std::vector<double> thresholds);

// Stationary bin probabilities e^(-G_b/psi0) - e^(-G_{b+1}/psi0).
std::vector<double> steady_probabilities(const LinkQuantizer& q);

// h(psi) = sqrt(2 pi psi / psi0) * f_c * e^(-psi/psi0).
double level_crossing_rate(double gain, double mean_gain, double normalized_doppler);

// Mean of the exponential distribution conditioned on bin b.
double bin_representative_gain(const LinkQuantizer& q, int bin);

// Row-stochastic tridiagonal per-link transition matrix.
struct LinkTransitionMatrix {
    Eigen::MatrixXd probs; // Q_S x Q_S
    double normalized_doppler = 0.0;

    int bins() const { return static_cast<int>(probs.rows()); }
};

// Up-moves h(G_{b+1})/p_b, down-moves h(G_b)/p_b, diagonal the
// complement, boundary rows folding the missing neighbor into the
// diagonal. Throws ConfigError naming the first offending bin and the
// largest admissible normalized Doppler when f_c is too fast for the
// quantization.
LinkTransitionMatrix link_transition_matrix(const LinkQuantizer& q, double normalized_doppler);

// Largest f_c keeping every transition probability in [0, 1] for this
// quantizer; +infinity for a single-bin quantizer.
double max_admissible_doppler(const LinkQuantizer& q);

// Mixed-radix index over per-link bin tuples. Links are ordered by
// (l, i, k, kappa) row-major via link_index; link 0 is the least
// significant digit of the composite index.
struct StateCodec {
    int num_cells = 1;     // L
    int num_uts = 1;       // K per cell
    int bins_per_link = 1; // Q_S
    int link_count = 1;    // L*L*K*K
    std::int64_t total_states = 1;

    StateCodec() = default;
    StateCodec(int L, int K, int Q_S);

    int link_index(int l, int i, int k, int kappa) const {
        return ((l * num_cells + i) * num_uts + k) * num_uts + kappa;
    }
    std::int64_t encode(const std::vector<int>& bins) const;
    void decode(std::int64_t state, std::vector<int>& bins) const;
    std::vector<int> decode(std::int64_t state) const;
};

// Product over all links of the per-link transition entries; the
// composite chain is action-independent.
double composite_transition_probability(const StateCodec& codec,
                                        const std::vector<LinkTransitionMatrix>& links,
                                        std::int64_t from_state, std::int64_t to_state);

// Dense |S| x |S| composite matrix (rows sum to 1).
Eigen::MatrixXd composite_transition_matrix(const StateCodec& codec,
                                            const std::vector<LinkTransitionMatrix>& links);

// Stationary distribution of the composite chain: product of per-link
// steady probabilities (each link matrix is reversible w.r.t. its
// steady vector).
Eigen::VectorXd composite_stationary(const StateCodec& codec,
                                     const std::vector<LinkQuantizer>& quantizers);

struct UtPosition {
    double x = 0.0;
    double y = 0.0;
};

// BS positions on a line, UTs dropped uniformly in each cell disc
// outside the minimum distance, and one shadow draw per (BS, UT) pair;
// all draws come from streams derived from the scenario seed, so the
// drop is frozen per scenario.
struct NetworkGeometry {
    int num_cells = 0;
    int uts_per_cell = 0;
    std::vector<UtPosition> bs_positions;  // L
    std::vector<UtPosition> ut_positions;  // (i, kappa) at i*K + kappa
    std::vector<LargeScaleGain> gains;     // (l, i, kappa) at (l*L + i)*K + kappa

    const LargeScaleGain& gain(int l, int i, int kappa) const {
        return gains[(l * num_cells + i) * uts_per_cell + kappa];
    }
};

NetworkGeometry build_geometry(const Scenario& s);

// The full finite-state channel: one quantizer and transition matrix
// per ordered link (l, i, k, kappa), the composite codec and the
// composite stationary vector. The quantizer mean for link
// (l, i, k, kappa) is the large-scale gain between BS l and UT kappa
// of cell i, the scale of the quantized effective gain.
struct FsmcModel {
    StateCodec codec;
    std::vector<LinkQuantizer> quantizers;
    std::vector<LinkTransitionMatrix> links;
    Eigen::VectorXd stationary;

    const LinkQuantizer& quantizer(int l, int i, int k, int kappa) const {
        return quantizers[codec.link_index(l, i, k, kappa)];
    }
};

FsmcModel build_fsmc(const Scenario& s, const NetworkGeometry& geo);

} // namespace eecmdp
