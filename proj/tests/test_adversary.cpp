#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "weakrand/adversary.hpp"

using namespace weakrand;
using testgen::Rng;

namespace {

const ErasureAlphabet kBinary("01");

ExtractorSpec fixture_extractor() {
    // f(0)=0, f(1)=1, f(erasure)=0
    return ExtractorSpec(1, kBinary, {"0", "1"}, {{"0", "0"}, {"1", "1"}, {"_", "0"}});
}

ExtractorSpec constant_extractor(const std::string& value) {
    return ExtractorSpec(1, kBinary, {"0", "1"}, {{"0", value}, {"1", value}, {"_", value}});
}

/// Brute-force oracle: the joint law of the intermediate source computed by
/// direct per-sequence products, then tilted by the displayed scaling. Kept
/// independent of intermediate_source / tilt_sources / enumerate_joint.
struct TiltOracle {
    std::map<std::string, Rational> pivot, up, down;
    Rational ratio_alpha;
    bool swapped;
};

TiltOracle oracle_tilt(const ChannelFamily<Rational>& family, const ExtractorSpec& f, const Rational& delta) {
    TiltOracle oracle;
    const std::string full = family.alphabet().full();
    const int n = family.steps();
    for (const auto& seq : all_sequences(full, n)) {
        Rational p(1);
        for (int i = 0; i < n; ++i) {
            const char x = seq[static_cast<std::size_t>(i)];
            const auto& q = family.conditional(i + 1, seq.substr(0, static_cast<std::size_t>(i)));
            p *= x == '_' ? delta / 2 : (Rational(1) - delta / 2) * q.prob(std::string(1, x));
        }
        oracle.pivot[seq] = p;
    }
    Rational p_first(0);
    for (const auto& [seq, p] : oracle.pivot)
        if (f.value(seq) == f.outputs()[0]) p_first += p;
    oracle.swapped = p_first > Rational(1, 2);
    const std::string role0 = f.outputs()[oracle.swapped ? 1 : 0];
    const Rational pr0 = oracle.swapped ? Rational(1) - p_first : p_first;
    oracle.ratio_alpha = pr0 == 0 ? Rational(0) : pr0 / (Rational(1) - pr0);
    const Rational tau = delta / 4;
    for (const auto& [seq, p] : oracle.pivot) {
        const bool r0 = f.value(seq) == role0;
        oracle.up[seq] = p * (r0 ? Rational(1) + tau : Rational(1) - oracle.ratio_alpha * tau);
        oracle.down[seq] = p * (r0 ? Rational(1) - tau : Rational(1) + oracle.ratio_alpha * tau);
    }
    return oracle;
}

}  // namespace

TEST_CASE("intermediate source") {
    SECTION("delta=0 reproduces the channels with zero erasure mass") {
        const auto family = ChannelFamily<Rational>::uniform(2, kBinary);
        const auto source = intermediate_source(family, Rational(0));
        for (int i = 1; i <= 2; ++i)
            for (const auto& h : all_sequences(kBinary.full(), i - 1)) {
                CHECK(source.conditional(i, h).prob("0") == Rational(1, 2));
                CHECK(source.conditional(i, h).prob("_") == Rational(0));
            }
    }

    SECTION("uniform channels at delta=1/5 give (0.45, 0.45, 0.1) everywhere") {
        const auto family = ChannelFamily<Rational>::uniform(2, kBinary);
        const auto source = intermediate_source(family, Rational(1, 5));
        for (int i = 1; i <= 2; ++i)
            for (const auto& h : all_sequences(kBinary.full(), i - 1)) {
                CHECK(source.conditional(i, h).prob("0") == Rational(9, 20));
                CHECK(source.conditional(i, h).prob("1") == Rational(9, 20));
                CHECK(source.conditional(i, h).prob("_") == Rational(1, 10));
            }
        CHECK(is_delta_source(source, family, Rational(1, 5)));
    }
}

TEST_CASE("tilting the n=1 fixture") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const auto f = fixture_extractor();
    const Rational delta(1, 5);

    const auto oracle = oracle_tilt(family, f, delta);
    REQUIRE(oracle.swapped);
    REQUIRE(oracle.ratio_alpha == Rational(9, 11));
    REQUIRE(oracle.up.at("0") == Rational(1899, 4400));
    REQUIRE(oracle.up.at("1") == Rational(2079, 4400));
    REQUIRE(oracle.up.at("_") == Rational(211, 2200));
    REQUIRE(oracle.down.at("0") == Rational(2061, 4400));
    REQUIRE(oracle.down.at("1") == Rational(1881, 4400));
    REQUIRE(oracle.down.at("_") == Rational(229, 2200));

    const auto result = tilt_sources(f, family, delta);
    CHECK(result.tilt.tau == Rational(1, 20));
    CHECK(result.tilt.ratio_alpha == oracle.ratio_alpha);
    CHECK(result.tilt.swapped == oracle.swapped);

    const auto v_joint = enumerate_joint(result.tilt_up);
    const auto w_joint = enumerate_joint(result.tilt_down);
    for (const auto& [seq, p] : oracle.up) CHECK(v_joint.prob(seq) == p);
    for (const auto& [seq, p] : oracle.down) CHECK(w_joint.prob(seq) == p);

    CHECK(is_delta_source(result.tilt_up, family, delta));
    CHECK(is_delta_source(result.tilt_down, family, delta));
}

TEST_CASE("tilting degenerate cases") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);

    SECTION("constant extractor collapses both tilts onto the pivot") {
        const auto result = tilt_sources(constant_extractor("0"), family, Rational(1, 5));
        CHECK(result.tilt.ratio_alpha == Rational(0));
        const auto pivot = intermediate_source(family, Rational(1, 5));
        const auto pivot_joint = enumerate_joint(pivot);
        const auto up_joint = enumerate_joint(result.tilt_up);
        const auto down_joint = enumerate_joint(result.tilt_down);
        for (std::size_t i = 0; i < pivot_joint.size(); ++i) {
            CHECK(up_joint.prob_at(i) == pivot_joint.prob_at(i));
            CHECK(down_joint.prob_at(i) == pivot_joint.prob_at(i));
        }
    }

    SECTION("delta=0 is rejected") {
        CHECK_THROWS_WITH(tilt_sources(fixture_extractor(), family, Rational(0)), "tilt undefined at delta=0");
    }

    SECTION("an exact tie keeps the labels unswapped") {
        // channel (5/9, 4/9) at delta=1/5 puts pivot mass (1 - 1/10) * 5/9 = 1/2
        // on the f=0 preimage {0}, an exact tie
        const auto tied = ChannelFamily<Rational>::memoryless(
            1, kBinary, Distribution<Rational>({"0", "1"}, {Rational(5, 9), Rational(4, 9)}));
        const ExtractorSpec f(1, kBinary, {"0", "1"}, {{"0", "0"}, {"1", "1"}, {"_", "1"}});
        const auto result = tilt_sources(f, tied, Rational(1, 5));
        CHECK(result.tilt.ratio_alpha == Rational(1));
        CHECK_FALSE(result.tilt.swapped);
    }
}

TEST_CASE("tilted joints always renormalize to exactly 1 and stay members") {
    Rng rng(2024);
    const Rational delta(1, 5);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 2);
        const auto family = testgen::random_channel_family(rng, n, kBinary);
        const auto f = testgen::random_binary_extractor(rng, n, kBinary);
        const auto result = tilt_sources(f, family, delta);
        for (const auto* source : {&result.tilt_up, &result.tilt_down}) {
            const auto joint = enumerate_joint(*source);
            Rational total(0);
            for (std::size_t i = 0; i < joint.size(); ++i) total += joint.prob_at(i);
            CHECK(total == Rational(1));
            CHECK(is_delta_source(*source, family, delta));
        }
    }
}

TEST_CASE("attack on the n=1 fixture") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const auto report = attack_extractor(fixture_extractor(), family, Rational(1, 5));
    CHECK(report.winner == "tilt-down");
    CHECK(report.bias == Rational(29, 200));
    CHECK(report.bias >= Rational(1, 50));
    CHECK(report.tilt.ratio_alpha == Rational(9, 11));
    CHECK(report.tilt.tau == Rational(1, 20));
    CHECK(report.tilt.swapped);

    SECTION("reported bias is self-consistent with the winning source") {
        const auto joint = enumerate_joint(report.winning_source);
        const auto out = extractor_output_distribution(fixture_extractor(), joint);
        CHECK(l1_distance(out, Distribution<Rational>::uniform({"0", "1"})) == report.bias);
    }

    SECTION("uniform-guess bookkeeping") {
        for (const auto& [seq, q] : report.agreement_weights) CHECK(q == Rational(1, 2));
        // p_{z,w} = P_f(z)/2 on the intermediate source, P_f = (11/20, 9/20)
        CHECK(report.joint_outcome_matrix[0][0] == Rational(11, 40));
        CHECK(report.joint_outcome_matrix[0][1] == Rational(11, 40));
        CHECK(report.joint_outcome_matrix[1][0] == Rational(9, 40));
        CHECK(report.joint_outcome_matrix[1][1] == Rational(9, 40));
    }
}

TEST_CASE("attack on a constant extractor certifies maximal bias") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const auto report = attack_extractor(constant_extractor("0"), family, Rational(1, 5));
    CHECK(report.winner == "intermediate");
    CHECK(report.bias == Rational(1));
}

TEST_CASE("exhaustive attack sweep at n=1") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const Rational delta(1, 5);
    const auto sequences = all_sequences(kBinary.full(), 1);
    for (unsigned mask = 0; mask < 8; ++mask) {
        std::unordered_map<std::string, std::string> table;
        for (std::size_t i = 0; i < sequences.size(); ++i)
            table.emplace(sequences[i], (mask >> i) & 1 ? "1" : "0");
        const ExtractorSpec f(1, kBinary, {"0", "1"}, std::move(table));
        const auto report = attack_extractor(f, family, delta);
        CHECK(report.bias >= delta / 10);
    }
}

TEST_CASE("disagreement probability") {
    const auto f = fixture_extractor();
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const auto pivot = intermediate_source(family, Rational(1, 5));

    SECTION("g identical to f never disagrees") {
        const auto g = RandomizedSpec<Rational>::from_deterministic(f);
        CHECK(disagreement_probability(f, g, pivot) == Rational(0));
    }

    SECTION("complementing g always disagrees") {
        const auto complement = RandomizedSpec<Rational>::from_deterministic(
            ExtractorSpec(1, kBinary, {"0", "1"}, {{"0", "1"}, {"1", "0"}, {"_", "1"}}));
        CHECK(disagreement_probability(f, complement, pivot) == Rational(1));
    }

    SECTION("uniform independent guess disagrees half the time") {
        std::map<std::pair<std::string, std::string>, std::string> table;
        std::map<std::string, Distribution<Rational>> channel;
        for (const auto& seq : all_sequences(kBinary.full(), 1)) {
            table.emplace(std::make_pair(seq, "0"), "0");
            table.emplace(std::make_pair(seq, "1"), "1");
            channel.emplace(seq, Distribution<Rational>::uniform({"0", "1"}));
        }
        const RandomizedSpec<Rational> g(1, kBinary, {"0", "1"}, {"0", "1"}, std::move(table),
                                         std::move(channel));
        CHECK(disagreement_probability(f, g, pivot) == Rational(1, 2));
    }
}

TEST_CASE("tilt identities behind the lemma") {
    Rng rng(31337);
    const Rational delta(1, 5);
    const Rational tau = delta / 4;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 2);
        const auto family = testgen::random_channel_family(rng, n, kBinary);
        const auto f = testgen::random_binary_extractor(rng, n, kBinary);
        const auto g = testgen::random_randomized(rng, n, kBinary, {"0", "1"});
        const auto tilted = tilt_sources(f, family, delta);
        const auto pivot = intermediate_source(family, delta);
        const auto pivot_joint = enumerate_joint(pivot);

        const std::string role0 = f.outputs()[tilted.tilt.swapped ? 1 : 0];
        const auto q = guess_weights(g, role0);

        auto f_role0_mass = [&](const AdaptiveSource<Rational>& s) {
            const auto joint = enumerate_joint(s);
            Rational mass(0);
            for (std::size_t i = 0; i < joint.size(); ++i)
                if (f.value(joint.outcomes()[i]) == role0) mass += joint.prob_at(i);
            return mass;
        };
        auto g_role0_mass = [&](const AdaptiveSource<Rational>& s) {
            const auto joint = enumerate_joint(s);
            Rational mass(0);
            for (std::size_t i = 0; i < joint.size(); ++i)
                mass += joint.prob_at(i) * q.at(joint.outcomes()[i]);
            return mass;
        };

        // sum-bound identity: the V/W gap difference equals the weighted
        // 2*tau sums over both preimages, exactly
        Rational lhs(0);
        for (std::size_t i = 0; i < pivot_joint.size(); ++i) {
            const std::string& seq = pivot_joint.outcomes()[i];
            const Rational& p = pivot_joint.prob_at(i);
            if (f.value(seq) == role0)
                lhs += p * 2 * tau * (Rational(1) - q.at(seq));
            else
                lhs += p * 2 * tilted.tilt.ratio_alpha * tau * q.at(seq);
        }
        const Rational rhs = (f_role0_mass(tilted.tilt_up) - g_role0_mass(tilted.tilt_up)) -
                             (f_role0_mass(tilted.tilt_down) - g_role0_mass(tilted.tilt_down));
        CHECK(lhs == rhs);

        // exchanging V and W flips the sign of the f-bias relative to the pivot
        const Rational pivot_mass = f_role0_mass(pivot);
        CHECK(f_role0_mass(tilted.tilt_up) - pivot_mass == -(f_role0_mass(tilted.tilt_down) - pivot_mass));

        // disagreement is bounded by 2 p01 + |p10 - p01|, exactly
        const auto matrix = joint_outcome_matrix(f, g, pivot);
        const std::size_t r0 = f.output_index(role0);
        const std::size_t r1 = 1 - r0;
        const Rational p01 = matrix[r0][r1], p10 = matrix[r1][r0];
        const Rational mismatch = disagreement_probability(f, g, pivot);
        const Rational skew = p10 > p01 ? p10 - p01 : p01 - p10;
        CHECK(mismatch <= 2 * p01 + skew);
    }
}

TEST_CASE("binary encodings") {
    SECTION("two outputs encode as the identity bit") {
        const auto codes = binary_encoding(2);
        REQUIRE(codes.size() == 2);
        CHECK(codes[0] == std::vector<int>{0});
        CHECK(codes[1] == std::vector<int>{1});
    }
    SECTION("three outputs need two bits: 00, 01, 10") {
        const auto codes = binary_encoding(3);
        REQUIRE(codes.size() == 3);
        CHECK(codes[0] == std::vector<int>{0, 0});
        CHECK(codes[1] == std::vector<int>{0, 1});
        CHECK(codes[2] == std::vector<int>{1, 0});
    }
    SECTION("eight outputs need three bits") {
        const auto codes = binary_encoding(8);
        CHECK(codes.front().size() == 3);
        CHECK(codes[5] == std::vector<int>{1, 0, 1});
    }
    SECTION("a single output still gets one bit") {
        CHECK(binary_encoding(1).front().size() == 1);
    }
}

TEST_CASE("main lemma verification") {
    const auto family = ChannelFamily<Rational>::uniform(1, kBinary);
    const auto f = fixture_extractor();
    const Rational delta(1, 5);

    SECTION("g identical to f satisfies hypothesis and conclusion") {
        const auto g = RandomizedSpec<Rational>::from_deterministic(f);
        const auto report = verify_main_lemma(f, g, family, delta, Rational(1, 100));
        CHECK(report.hypothesis_holds);
        CHECK(report.max_gap == Rational(0));
        CHECK(report.disagreement == Rational(0));
        CHECK(report.conclusion_holds);
    }

    SECTION("the uniform guess against the fixture fails the hypothesis at the down-tilt") {
        std::map<std::pair<std::string, std::string>, std::string> table;
        std::map<std::string, Distribution<Rational>> channel;
        for (const auto& seq : all_sequences(kBinary.full(), 1)) {
            table.emplace(std::make_pair(seq, "0"), "0");
            table.emplace(std::make_pair(seq, "1"), "1");
            channel.emplace(seq, Distribution<Rational>::uniform({"0", "1"}));
        }
        const RandomizedSpec<Rational> g(1, kBinary, {"0", "1"}, {"0", "1"}, std::move(table),
                                         std::move(channel));
        const auto report = verify_main_lemma(f, g, family, delta, Rational(1, 100));
        CHECK_FALSE(report.hypothesis_holds);
        CHECK(report.max_gap == Rational(29, 200));
        CHECK(report.witness == "tilt-down");
        CHECK(report.witness_coordinate == 1);
    }

    SECTION("the implication holds across random pairs, including sharp form") {
        Rng rng(60606);
        const std::vector<Rational> grid{Rational(1, 100), Rational(1, 50), Rational(1, 20),
                                         Rational(1, 10), Rational(1, 4), Rational(1, 2), Rational(1)};
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 2);
            const auto fam = testgen::random_channel_family(rng, n, kBinary);
            const bool multi = rng() % 2 == 0;
            const std::vector<std::string> outputs =
                multi ? std::vector<std::string>{"a", "b", "c"} : std::vector<std::string>{"0", "1"};
            const auto fr = testgen::random_extractor(rng, n, kBinary, outputs);
            const auto gr = testgen::random_randomized(rng, n, kBinary, outputs);
            for (const auto& eps : grid) {
                const auto report = verify_main_lemma(fr, gr, fam, delta, eps);
                if (report.hypothesis_holds) CHECK(report.conclusion_holds);
                // sharp version: disagreement <= 5 m max_gap / delta always
                CHECK(report.disagreement <= Rational(5) * report.max_gap * report.bit_width / delta);
            }
        }
    }
}
