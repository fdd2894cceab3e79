#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "weakrand/extractor.hpp"
#include "weakrand/source.hpp"

namespace weakrand {

/// Parameters of the tilting construction. `tau` is always delta/4.
/// `ratio_alpha` is the ratio of the less likely to the more likely
/// f-output under the intermediate source; `swapped` records whether the
/// output labels had to exchange roles to make label-for-role-0 the less
/// likely one. This alpha is internal to the construction and unrelated to
/// the SV parameter.
template <class T>
struct TiltParameters {
    T tau{0};
    T ratio_alpha{0};
    bool swapped = false;
};

template <class T>
struct TiltResult {
    AdaptiveSource<T> tilt_up;    // V: role-0 preimage raised
    AdaptiveSource<T> tilt_down;  // W: role-0 preimage lowered
    TiltParameters<T> tilt;
};

/// The pivot source: every conditional keeps the channel distribution scaled
/// by (1 - delta/2) and assigns exactly delta/2 to the erasure symbol.
template <class T>
AdaptiveSource<T> intermediate_source(const ChannelFamily<T>& family, const T& delta) {
    if (delta < T(0) || delta > T(1)) throw std::invalid_argument("delta must lie in [0,1]");
    const auto full = family.alphabet().full_outcomes();
    const T keep = T(1) - delta / T(2);
    std::vector<std::map<std::string, Distribution<T>>> steps;
    for (int i = 1; i <= family.steps(); ++i) {
        std::map<std::string, Distribution<T>> table;
        for (const auto& [history, q] : family.step_table(i)) {
            std::vector<T> probs;
            probs.reserve(full.size());
            for (std::size_t k = 0; k < q.size(); ++k) probs.push_back(keep * q.prob_at(k));
            probs.push_back(delta / T(2));
            table.emplace(history, Distribution<T>(full, std::move(probs)));
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<T>(family.alphabet(), std::move(steps));
}

/// Output distribution of `f` under the joint distribution of a source.
template <class T>
Distribution<T> extractor_output_distribution(const ExtractorSpec& f, const Distribution<T>& joint) {
    return pushforward(joint, f.outputs(), [&](const std::string& seq) { return f.value(seq); });
}

/// Rebuilds per-history conditionals from a joint distribution by the chain
/// rule. Histories with zero marginal probability take their conditional
/// from `fallback` so the result stays total over all histories.
template <class T>
AdaptiveSource<T> source_from_joint(const Distribution<T>& joint, const AdaptiveSource<T>& fallback) {
    const int n = fallback.steps();
    const ErasureAlphabet& alphabet = fallback.alphabet();
    const std::string& full = alphabet.full();
    const auto full_outcomes = alphabet.full_outcomes();

    // marginals of every prefix, level by level
    std::vector<std::map<std::string, T>> marginals(static_cast<std::size_t>(n) + 1);
    for (std::size_t idx = 0; idx < joint.size(); ++idx) {
        const std::string& seq = joint.outcomes()[idx];
        const T& p = joint.prob_at(idx);
        for (int len = 0; len <= n; ++len) {
            auto [it, inserted] = marginals[static_cast<std::size_t>(len)].emplace(seq.substr(0, static_cast<std::size_t>(len)), p);
            if (!inserted) it->second += p;
        }
    }

    std::vector<std::map<std::string, Distribution<T>>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, Distribution<T>> table;
        for (const auto& [history, mass] : marginals[static_cast<std::size_t>(i - 1)]) {
            if (mass == T(0)) {
                if (fallback.has_conditional(i, history)) table.emplace(history, fallback.conditional(i, history));
                continue;
            }
            std::vector<T> probs;
            probs.reserve(full.size());
            for (char c : full) probs.push_back(marginals[static_cast<std::size_t>(i)].at(history + c) / mass);
            table.emplace(history, Distribution<T>(full_outcomes, std::move(probs)));
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<T>(alphabet, std::move(steps));
}

/// The tilted pair (V, W) for a binary extractor: scale the intermediate
/// source's mass on the two f-preimages by (1 + tau) / (1 - alpha tau) and
/// (1 - tau) / (1 + alpha tau) respectively, with tau = delta/4 and alpha
/// chosen so both joints renormalize to exactly 1.
template <class T>
TiltResult<T> tilt_sources(const ExtractorSpec& f, const ChannelFamily<T>& family, const T& delta) {
    if (f.output_count() != 2) throw std::invalid_argument("tilting requires a binary extractor");
    if (f.n() != family.steps() || !(f.alphabet() == family.alphabet()))
        throw std::invalid_argument("extractor/channel structure mismatch");
    if (delta == T(0)) throw std::invalid_argument("tilt undefined at delta=0");
    if (delta < T(0) || delta > T(1)) throw std::invalid_argument("delta must lie in [0,1]");

    const AdaptiveSource<T> pivot = intermediate_source(family, delta);
    const Distribution<T> joint = enumerate_joint(pivot);
    const Distribution<T> f_out = extractor_output_distribution(f, joint);

    const T half = T(1) / T(2);
    const T p_first = f_out.prob_at(0);
    const bool swapped = p_first > half;
    const std::string& role0 = f.outputs()[swapped ? 1 : 0];
    const T p_role0 = swapped ? T(T(1) - p_first) : p_first;
    const T p_role1 = T(1) - p_role0;
    const T alpha = p_role0 == T(0) ? T(0) : T(p_role0 / p_role1);
    const T tau = delta / T(4);

    const T up_role0 = T(1) + tau, up_role1 = T(1) - alpha * tau;
    const T down_role0 = T(1) - tau, down_role1 = T(1) + alpha * tau;

    auto scale = [&](const T& factor_role0, const T& factor_role1) {
        std::vector<T> probs;
        probs.reserve(joint.size());
        for (std::size_t i = 0; i < joint.size(); ++i) {
            const bool in_role0 = f.value(joint.outcomes()[i]) == role0;
            probs.push_back(joint.prob_at(i) * (in_role0 ? factor_role0 : factor_role1));
        }
        return Distribution<T>(joint.outcomes(), std::move(probs));
    };

    TiltResult<T> result{source_from_joint(scale(up_role0, up_role1), pivot),
                         source_from_joint(scale(down_role0, down_role1), pivot),
                         TiltParameters<T>{tau, alpha, swapped}};
    return result;
}

/// Attack outcome: the strongest of the three constructed witnesses.
template <class T>
struct AttackReport {
    AdaptiveSource<T> winning_source;
    std::string winner;  // "intermediate", "tilt-up" or "tilt-down"
    T bias{0};           // L1 distance of P_{f(source)} to uniform
    TiltParameters<T> tilt;
    bool bound_vacuous = false;  // set when delta = 0 and no tilt exists
    /// Per-sequence probability that the corollary's uniform guess outputs
    /// the role-0 label (identically 1/2), kept for report completeness.
    std::map<std::string, T> agreement_weights;
    /// p[z][w] = P(f = z-th output, uniform guess = w-th output) under the
    /// intermediate source.
    std::array<std::array<T, 2>, 2> joint_outcome_matrix{};
};

/// Mounts the corollary's attack: evaluates the intermediate source and both
/// tilted sources against `f` and returns the one with the largest output
/// bias. For delta > 0 the winner is guaranteed to reach bias >= delta/10.
template <class T>
AttackReport<T> attack_extractor(const ExtractorSpec& f, const ChannelFamily<T>& family, const T& delta) {
    if (f.output_count() != 2) throw std::invalid_argument("attack requires a binary extractor");
    if (delta < T(0) || delta > T(1)) throw std::invalid_argument("delta must lie in [0,1]");

    const Distribution<T> uniform_out = Distribution<T>::uniform(f.outputs());
    auto bias_of = [&](const AdaptiveSource<T>& s) {
        return l1_distance(extractor_output_distribution(f, enumerate_joint(s)), uniform_out);
    };

    AdaptiveSource<T> pivot = intermediate_source(family, delta);
    const Distribution<T> pivot_joint = enumerate_joint(pivot);
    const T pivot_bias = bias_of(pivot);

    AttackReport<T> report{std::move(pivot), "intermediate", pivot_bias, {}, delta == T(0), {}, {}};

    if (delta > T(0)) {
        TiltResult<T> tilted = tilt_sources(f, family, delta);
        report.tilt = tilted.tilt;
        const T up_bias = bias_of(tilted.tilt_up);
        const T down_bias = bias_of(tilted.tilt_down);
        if (up_bias > report.bias) {
            report.winning_source = tilted.tilt_up;
            report.winner = "tilt-up";
            report.bias = up_bias;
        }
        if (down_bias > report.bias) {
            report.winning_source = tilted.tilt_down;
            report.winner = "tilt-down";
            report.bias = down_bias;
        }
    }

    // Instantiate the lemma's bookkeeping for g(x, u) = u with uniform u.
    const T half = T(1) / T(2);
    for (std::size_t i = 0; i < pivot_joint.size(); ++i)
        report.agreement_weights.emplace(pivot_joint.outcomes()[i], half);
    const Distribution<T> f_out = extractor_output_distribution(f, pivot_joint);
    for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t w = 0; w < 2; ++w) report.joint_outcome_matrix[z][w] = f_out.prob_at(z) * half;
    return report;
}

/// Probability that f and g disagree, Pr[f(x^n) != g(x^n, y)], under the
/// given source with y drawn from g's auxiliary channel.
template <class T>
T disagreement_probability(const ExtractorSpec& f, const RandomizedSpec<T>& g, const AdaptiveSource<T>& source) {
    if (f.n() != g.n() || !(f.alphabet() == g.alphabet()) || f.outputs() != g.outputs())
        throw std::invalid_argument("extractor/randomized structure mismatch");
    if (f.n() != source.steps() || !(f.alphabet() == source.alphabet()))
        throw std::invalid_argument("extractor/source structure mismatch");
    const Distribution<T> joint = enumerate_joint(source);
    T total(0);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        const std::string& seq = joint.outcomes()[i];
        if (joint.prob_at(i) == T(0)) continue;
        const std::string& fz = f.value(seq);
        const Distribution<T>& aux = g.aux_distribution(seq);
        T mismatch(0);
        for (std::size_t y = 0; y < aux.size(); ++y)
            if (g.value(seq, aux.outcomes()[y]) != fz) mismatch += aux.prob_at(y);
        total += joint.prob_at(i) * mismatch;
    }
    return total;
}

/// Probability, per sequence, that g outputs `label`.
template <class T>
std::map<std::string, T> guess_weights(const RandomizedSpec<T>& g, const std::string& label) {
    std::map<std::string, T> q;
    for (const auto& seq : all_sequences(g.alphabet().full(), g.n())) {
        const Distribution<T>& aux = g.aux_distribution(seq);
        T w(0);
        for (std::size_t y = 0; y < aux.size(); ++y)
            if (g.value(seq, aux.outcomes()[y]) == label) w += aux.prob_at(y);
        q.emplace(seq, std::move(w));
    }
    return q;
}

/// Joint law of (f output, g output) under `source`, indexed by declared
/// output positions.
template <class T>
std::vector<std::vector<T>> joint_outcome_matrix(const ExtractorSpec& f, const RandomizedSpec<T>& g,
                                                 const AdaptiveSource<T>& source) {
    const std::size_t k = f.output_count();
    std::vector<std::vector<T>> p(k, std::vector<T>(k, T(0)));
    const Distribution<T> joint = enumerate_joint(source);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        const std::string& seq = joint.outcomes()[i];
        if (joint.prob_at(i) == T(0)) continue;
        const std::size_t z = f.output_index(f.value(seq));
        const Distribution<T>& aux = g.aux_distribution(seq);
        for (std::size_t y = 0; y < aux.size(); ++y)
            p[z][f.output_index(g.value(seq, aux.outcomes()[y]))] += joint.prob_at(i) * aux.prob_at(y);
    }
    return p;
}

/// Result of checking the main lemma's implication on the constructed
/// witnesses.
template <class T>
struct LemmaReport {
    bool hypothesis_holds = false;  // all per-coordinate gaps below epsilon
    T max_gap{0};                   // largest L1 gap seen across coordinates and witnesses
    std::string witness;            // witness distribution when the hypothesis fails
    int witness_coordinate = 0;     // 1-based coordinate of that witness
    T disagreement{0};              // Pr[f != g] under the intermediate source
    T bound{0};                     // 5 epsilon m / delta
    bool conclusion_holds = false;  // disagreement < bound
    int bit_width = 1;
};

/// Checks the quantitative implication of the main lemma for a pair (f, g):
/// if the L1 gap between the output laws of f and g stays below epsilon on
/// the intermediate and both tilted sources (per binary coordinate of a
/// fixed output encoding), then f and g agree except with probability below
/// 5 epsilon m / delta on the intermediate source.
template <class T>
LemmaReport<T> verify_main_lemma(const ExtractorSpec& f, const RandomizedSpec<T>& g,
                                 const ChannelFamily<T>& family, const T& delta, const T& epsilon) {
    if (delta == T(0)) throw std::invalid_argument("lemma verification undefined at delta=0");
    if (f.n() != g.n() || !(f.alphabet() == g.alphabet()) || f.outputs() != g.outputs())
        throw std::invalid_argument("extractor/randomized structure mismatch");

    const auto codes = binary_encoding(f.output_count());
    const int m = static_cast<int>(codes.front().size());
    const auto sequences = all_sequences(f.alphabet().full(), f.n());

    LemmaReport<T> report;
    report.bit_width = m;

    const AdaptiveSource<T> pivot = intermediate_source(family, delta);

    for (int k = 1; k <= m; ++k) {
        // binary coordinate of f and g through the encoding
        auto bit_of = [&](const std::string& label) {
            return std::string(1, static_cast<char>('0' + codes[f.output_index(label)][static_cast<std::size_t>(k - 1)]));
        };
        std::unordered_map<std::string, std::string> fk_table;
        for (const auto& seq : sequences) fk_table.emplace(seq, bit_of(f.value(seq)));
        const ExtractorSpec fk(f.n(), f.alphabet(), {"0", "1"}, std::move(fk_table));

        const TiltResult<T> tilted = tilt_sources(fk, family, delta);

        struct Witness {
            const char* name;
            const AdaptiveSource<T>* source;
        };
        const Witness witnesses[] = {{"intermediate", &pivot},
                                     {"tilt-up", &tilted.tilt_up},
                                     {"tilt-down", &tilted.tilt_down}};
        for (const auto& witness : witnesses) {
            const Distribution<T> joint = enumerate_joint(*witness.source);
            const Distribution<T> f_law = pushforward(joint, {"0", "1"}, [&](const std::string& seq) {
                return fk.value(seq);
            });
            // law of the k-th output bit of g under (source, aux channel)
            T g0(0);
            for (std::size_t i = 0; i < joint.size(); ++i) {
                const std::string& seq = joint.outcomes()[i];
                if (joint.prob_at(i) == T(0)) continue;
                const Distribution<T>& aux = g.aux_distribution(seq);
                T w(0);
                for (std::size_t y = 0; y < aux.size(); ++y)
                    if (bit_of(g.value(seq, aux.outcomes()[y])) == "0") w += aux.prob_at(y);
                g0 += joint.prob_at(i) * w;
            }
            const Distribution<T> g_law({"0", "1"}, {g0, T(T(1) - g0)});
            const T gap = l1_distance(f_law, g_law);
            if (gap > report.max_gap) {
                report.max_gap = gap;
                report.witness = witness.name;
                report.witness_coordinate = k;
            }
        }
    }

    report.hypothesis_holds = report.max_gap < epsilon;
    if (report.hypothesis_holds) {
        report.witness.clear();
        report.witness_coordinate = 0;
    }

    report.disagreement = disagreement_probability(f, g, pivot);
    report.bound = T(5) * epsilon * T(m) / delta;
    report.conclusion_holds = report.disagreement < report.bound;
    return report;
}

}  // namespace weakrand
