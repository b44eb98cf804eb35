#include "eecmdp/errors.hpp"
#include "eecmdp/fsmc.hpp"
#include "eecmdp/mdp.hpp"
#include "eecmdp/rng.hpp"
#include "eecmdp/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace eecmdp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("equiprobable thresholds match the closed form") {
    LinkQuantizer q = equiprobable_thresholds(1.0, 4);
    REQUIRE(q.thresholds.size() == 5);
    CHECK(q.thresholds[0] == 0.0);
    CHECK(q.thresholds[1] == doctest::Approx(0.2876820724517809).epsilon(1e-15));
    CHECK(q.thresholds[2] == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(q.thresholds[3] == doctest::Approx(1.3862943611198906).epsilon(1e-15));
    CHECK(q.thresholds[4] == kInf);
    for (double p : q.steady) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));

    LinkQuantizer q2 = equiprobable_thresholds(2.0, 2);
    CHECK(q2.thresholds[1] == doctest::Approx(1.3862943611198906).epsilon(1e-15));
}

TEST_CASE("thresholds scale linearly with the mean gain") {
    LinkQuantizer a = equiprobable_thresholds(1.0, 6);
    LinkQuantizer b = equiprobable_thresholds(3.5, 6);
    for (int i = 1; i < 6; ++i)
        CHECK(b.thresholds[i] == doctest::Approx(3.5 * a.thresholds[i]).epsilon(1e-14));
}

TEST_CASE("quantizer construction rejects bad inputs") {
    CHECK_THROWS_AS(equiprobable_thresholds(1.0, 1), ConfigError);
    CHECK_THROWS_AS(equiprobable_thresholds(1.0, 0), ConfigError);
    CHECK_THROWS_AS(equiprobable_thresholds(-1.0, 4), ConfigError);
    CHECK_THROWS_AS(quantizer_from_thresholds(1.0, {0.5, 1.0, kInf}), ConfigError);
    CHECK_THROWS_AS(quantizer_from_thresholds(1.0, {0.0, 1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(quantizer_from_thresholds(1.0, {0.0, 2.0, 1.0, kInf}), ConfigError);
    LinkQuantizer single = quantizer_from_thresholds(2.0, {0.0, kInf});
    CHECK(single.bins() == 1);
    CHECK(single.steady[0] == doctest::Approx(1.0));
    CHECK(single.representative[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("bin representatives are the truncated-exponential means") {
    LinkQuantizer q = equiprobable_thresholds(1.0, 4);
    CHECK(q.representative[0] == doctest::Approx(0.13695378264465763).epsilon(1e-14));
    CHECK(q.representative[1] == doctest::Approx(0.4767518562354516).epsilon(1e-14));
    CHECK(q.representative[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.representative[3] == doctest::Approx(2.386294361119891).epsilon(1e-14));

    // Representatives increase with the bin and reassemble the mean.
    double total = 0.0;
    for (int b = 0; b < 4; ++b) {
        if (b) CHECK(q.representative[b] > q.representative[b - 1]);
        CHECK(q.representative[b] > q.thresholds[b]);
        total += q.representative[b] * q.steady[b];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the level-crossing rate matches the closed form") {
    CHECK(level_crossing_rate(1.0, 1.0, 0.05) ==
          doctest::Approx(0.04610685044478945).epsilon(1e-14));
    CHECK(level_crossing_rate(0.0, 1.0, 0.05) == 0.0);
    // Scale invariance in psi/psi0.
    CHECK(level_crossing_rate(3.0, 3.0, 0.05) ==
          doctest::Approx(level_crossing_rate(1.0, 1.0, 0.05)).epsilon(1e-14));
}

TEST_CASE("the link transition matrix reproduces the frozen oracle") {
    LinkQuantizer q = equiprobable_thresholds(1.0, 4);
    LinkTransitionMatrix m = link_transition_matrix(q, 0.05);
    REQUIRE(m.bins() == 4);

    const double up0 = 0.20166827921683686;
    const double up1 = 0.20869049285023036;
    const double up2 = 0.1475664626635606;
    CHECK(m.probs(0, 1) == doctest::Approx(up0).epsilon(1e-14));
    CHECK(m.probs(1, 2) == doctest::Approx(up1).epsilon(1e-14));
    CHECK(m.probs(2, 3) == doctest::Approx(up2).epsilon(1e-14));
    // Equiprobable bins make the chain symmetric.
    CHECK(m.probs(1, 0) == doctest::Approx(up0).epsilon(1e-14));
    CHECK(m.probs(2, 1) == doctest::Approx(up1).epsilon(1e-14));
    CHECK(m.probs(3, 2) == doctest::Approx(up2).epsilon(1e-14));
    CHECK(m.probs(0, 0) == doctest::Approx(1.0 - up0).epsilon(1e-14));
    CHECK(m.probs(3, 3) == doctest::Approx(1.0 - up2).epsilon(1e-14));
    CHECK(m.probs(0, 2) == 0.0);
    CHECK(m.probs(0, 3) == 0.0);
    CHECK(m.probs(3, 0) == 0.0);

    for (int b = 0; b < 4; ++b) {
        CHECK(m.probs.row(b).sum() == doctest::Approx(1.0).epsilon(1e-15));
        for (int c = 0; c < 4; ++c) {
            CHECK(m.probs(b, c) >= 0.0);
            CHECK(m.probs(b, c) <= 1.0);
        }
    }
}

TEST_CASE("per-link chains satisfy detailed balance and fix the steady vector") {
    for (int qs : {2, 3, 4, 6}) {
        LinkQuantizer q = equiprobable_thresholds(0.7, qs);
        double fc = 0.9 * max_admissible_doppler(q);
        LinkTransitionMatrix m = link_transition_matrix(q, fc);
        for (int b = 0; b + 1 < qs; ++b)
            CHECK(q.steady[b] * m.probs(b, b + 1) ==
                  doctest::Approx(q.steady[b + 1] * m.probs(b + 1, b)).epsilon(1e-13));
        Eigen::VectorXd pi = stationary_distribution(m.probs);
        for (int b = 0; b < qs; ++b)
            CHECK(pi(b) == doctest::Approx(q.steady[b]).epsilon(1e-10));
    }
}

TEST_CASE("too-fast fading is rejected with the offending bin and the admissible rate") {
    LinkQuantizer q = equiprobable_thresholds(1.0, 4);
    double fmax = max_admissible_doppler(q);
    CHECK(fmax == doctest::Approx(0.12184459893019715).epsilon(1e-13));
    CHECK_NOTHROW(link_transition_matrix(q, fmax * 0.999));
    CHECK_THROWS_WITH_AS(link_transition_matrix(q, fmax * 1.01), doctest::Contains("bin"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(link_transition_matrix(q, fmax * 1.01),
                         doctest::Contains("normalized_doppler"), ConfigError);

    LinkQuantizer single = quantizer_from_thresholds(1.0, {0.0, kInf});
    CHECK(max_admissible_doppler(single) == kInf);
}

TEST_CASE("a million-step walk occupies every bin at its steady share") {
    LinkQuantizer q = equiprobable_thresholds(1.0, 4);
    LinkTransitionMatrix m = link_transition_matrix(q, 0.05);
    std::mt19937_64 rng = make_rng(2024, stream::rollout, 77);

    const int steps = 1000000;
    const int batches = 20;
    const int per_batch = steps / batches;
    int state = 0;
    Eigen::MatrixXd occupancy = Eigen::MatrixXd::Zero(batches, 4);
    for (int batch = 0; batch < batches; ++batch) {
        for (int t = 0; t < per_batch; ++t) {
            occupancy(batch, state) += 1.0;
            double u = unit_uniform(rng);
            double acc = 0.0;
            for (int c = 0; c < 4; ++c) {
                acc += m.probs(state, c);
                if (u < acc || c == 3) {
                    state = c;
                    break;
                }
            }
        }
    }
    occupancy /= per_batch;
    for (int b = 0; b < 4; ++b) {
        double mean = occupancy.col(b).mean();
        double var = (occupancy.col(b).array() - mean).square().sum() / (batches - 1);
        double se = std::sqrt(var / batches);
        INFO("bin ", b, " occupancy ", mean, " se ", se);
        CHECK(std::abs(mean - q.steady[b]) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("the state codec round-trips and orders links little-endian") {
    StateCodec codec(2, 1, 3);
    CHECK(codec.link_count == 4);
    CHECK(codec.total_states == 81);
    for (std::int64_t s = 0; s < codec.total_states; ++s) {
        std::vector<int> bins = codec.decode(s);
        CHECK(codec.encode(bins) == s);
    }
    // Link 0 is the least significant digit.
    CHECK(codec.encode({1, 0, 0, 0}) == 1);
    CHECK(codec.encode({0, 1, 0, 0}) == 3);
    CHECK(codec.encode({0, 0, 0, 1}) == 27);
    CHECK(codec.link_index(1, 1, 0, 0) == 3);
}

TEST_CASE("the composite chain is the product of its links") {
    StateCodec codec(2, 1, 2); // 16 states over 4 links
    LinkQuantizer q = equiprobable_thresholds(1.0, 2);
    LinkTransitionMatrix one = link_transition_matrix(q, 0.05);
    std::vector<LinkTransitionMatrix> links(4, one);

    Eigen::MatrixXd P = composite_transition_matrix(codec, links);
    REQUIRE(P.rows() == 16);
    for (int s = 0; s < 16; ++s) CHECK(P.row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));

    // One entry recomputed by hand from the per-link factors.
    std::vector<int> from = {0, 1, 0, 1}, to = {1, 1, 0, 0};
    double expected = one.probs(0, 1) * one.probs(1, 1) * one.probs(0, 0) * one.probs(1, 0);
    CHECK(P(codec.encode(from), codec.encode(to)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(composite_transition_probability(codec, links, codec.encode(from),
                                           codec.encode(to)) ==
          doctest::Approx(expected).epsilon(1e-14));

    std::vector<LinkQuantizer> quantizers(4, q);
    Eigen::VectorXd pi = composite_stationary(codec, quantizers);
    CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::VectorXd direct = stationary_distribution(P);
    for (int s = 0; s < 16; ++s) CHECK(pi(s) == doctest::Approx(direct(s)).epsilon(1e-8));
}

TEST_CASE("geometry is frozen by the seed and respects the layout bounds") {
    Scenario s;
    s.num_antennas = 16;
    s.bins = 2;
    s.power_levels = 4;
    s.seed = 11;
    NetworkGeometry a = build_geometry(s);
    NetworkGeometry b = build_geometry(s);
    REQUIRE(a.gains.size() == 4);
    for (size_t i = 0; i < a.gains.size(); ++i)
        CHECK(a.gains[i].beta == b.gains[i].beta); // bitwise reproducible

    Scenario other = s;
    other.seed = 12;
    NetworkGeometry c = build_geometry(other);
    CHECK(a.gains[0].beta != c.gains[0].beta);

    for (int i = 0; i < s.num_cells; ++i) {
        double dx = a.ut_positions[i].x - a.bs_positions[i].x;
        double dy = a.ut_positions[i].y - a.bs_positions[i].y;
        double d = std::sqrt(dx * dx + dy * dy);
        CHECK(d >= s.geometry.min_ut_distance_m);
        CHECK(d <= s.geometry.cell_radius_m);
    }

    // beta recomposes from the stored factors.
    for (const LargeScaleGain& g : a.gains)
        CHECK(g.beta == doctest::Approx(g.pathloss_constant * g.shadow_linear /
                                        std::pow(g.distance_m, g.pathloss_exponent))
                            .epsilon(1e-14));
}

TEST_CASE("the channel model keys every quantizer to its link gain") {
    Scenario s;
    s.num_antennas = 16;
    s.bins = 3;
    s.power_levels = 4;
    NetworkGeometry geo = build_geometry(s);
    FsmcModel f = build_fsmc(s, geo);
    REQUIRE(f.quantizers.size() == 4);
    REQUIRE(f.links.size() == 4);
    CHECK(f.codec.total_states == 81);
    CHECK(f.stationary.size() == 81);
    CHECK(f.stationary.sum() == doctest::Approx(1.0).epsilon(1e-12));

    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i)
            CHECK(f.quantizer(l, i, 0, 0).mean_gain == geo.gain(l, i, 0).beta);

    // Equiprobable construction: every link shares one transition matrix.
    for (size_t j = 1; j < f.links.size(); ++j)
        CHECK((f.links[j].probs - f.links[0].probs).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("explicit thresholds are interpreted in units of the link mean") {
    Scenario s;
    s.num_antennas = 16;
    s.bins = 3;
    s.threshold_grid = {0.5, 1.5};
    s.power_levels = 4;
    NetworkGeometry geo = build_geometry(s);
    FsmcModel f = build_fsmc(s, geo);
    for (int l = 0; l < 2; ++l) {
        double psi0 = geo.gain(l, l, 0).beta;
        const LinkQuantizer& q = f.quantizer(l, l, 0, 0);
        CHECK(q.thresholds[1] == doctest::Approx(0.5 * psi0).epsilon(1e-14));
        CHECK(q.thresholds[2] == doctest::Approx(1.5 * psi0).epsilon(1e-14));
    }
}
