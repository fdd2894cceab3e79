#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "weakrand/adversary.hpp"
#include "weakrand/source.hpp"

namespace weakrand {

/// The deterministic post-processing map: identity on bits, erasures become 1.
inline char gamma_map(char x) {
    if (x == '0' || x == '1') return x;
    if (x == ErasureAlphabet::kErased) return '1';
    throw std::invalid_argument(std::string("gamma is undefined on '") + x + "'");
}

/// Channels that are P_delta at every step and history, where
/// P_delta(0) = (1 + delta)/2.
template <class T>
ChannelFamily<T> sv_channel_family(int n, const T& delta) {
    if (delta < T(0) || delta > T(1)) throw std::invalid_argument("delta must lie in [0,1]");
    const ErasureAlphabet alphabet("01");
    const T p0 = (T(1) + delta) / T(2);
    const Distribution<T> p_delta({"0", "1"}, {p0, T(T(1) - p0)});
    return ChannelFamily<T>::memoryless(n, alphabet, p_delta);
}

/// Pushes a (delta, P_delta)-source forward through gamma, re-deriving
/// binary conditionals from the image joint distribution. The result is an
/// alpha-SV source for alpha = (1 - delta)/2; unreachable binary histories
/// get the unbiased conditional.
template <class T>
AdaptiveSource<T> simulate_sv(const AdaptiveSource<T>& source, const T& delta) {
    const ChannelFamily<T> family = sv_channel_family<T>(source.steps(), delta);
    if (!(source.alphabet() == family.alphabet()))
        throw std::invalid_argument("SV simulation requires the binary base alphabet 01");
    const DeltaViolation violation = find_delta_violation(source, family, delta);
    if (violation.found)
        throw std::invalid_argument("input is not a valid source for these channels: history '" +
                                    violation.history + "', symbol '" + violation.symbol + "' at step " +
                                    std::to_string(violation.step));

    const int n = source.steps();
    const Distribution<T> joint = enumerate_joint(source);

    // image marginals over binary prefixes
    std::vector<std::map<std::string, T>> marginals(static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        std::string image;
        image.reserve(joint.outcomes()[i].size());
        for (char c : joint.outcomes()[i]) image.push_back(gamma_map(c));
        for (int len = 0; len <= n; ++len) {
            auto [it, inserted] =
                marginals[static_cast<std::size_t>(len)].emplace(image.substr(0, static_cast<std::size_t>(len)), joint.prob_at(i));
            if (!inserted) it->second += joint.prob_at(i);
        }
    }

    const ErasureAlphabet binary("01");
    const auto full = binary.full_outcomes();
    const T half = T(1) / T(2);
    std::vector<std::map<std::string, Distribution<T>>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, Distribution<T>> table;
        for (const auto& history : all_sequences(binary.base(), i - 1)) {
            auto it = marginals[static_cast<std::size_t>(i - 1)].find(history);
            if (it == marginals[static_cast<std::size_t>(i - 1)].end() || it->second == T(0)) {
                table.emplace(history, Distribution<T>(full, {half, half, T(0)}));
                continue;
            }
            const T& mass = it->second;
            auto child = [&](char c) {
                auto jt = marginals[static_cast<std::size_t>(i)].find(history + c);
                return jt == marginals[static_cast<std::size_t>(i)].end() ? T(0) : jt->second;
            };
            table.emplace(history, Distribution<T>(full, {T(child('0') / mass), T(child('1') / mass), T(0)}));
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<T>(binary, std::move(steps));
}

/// Certificate data the CLI reports alongside a simulation.
template <class T>
struct SvCertificate {
    T delta{0};
    T alpha{0};  // (1 - delta)/2
    AdaptiveSource<T> simulated;
    T min_p0{0};  // extremes of P(0 | history) across all binary histories
    T max_p0{0};
};

template <class T>
SvCertificate<T> sv_certificate(const AdaptiveSource<T>& source, const T& delta) {
    AdaptiveSource<T> simulated = simulate_sv(source, delta);
    T lo(1), hi(0);
    for (int i = 1; i <= simulated.steps(); ++i) {
        for (const auto& [history, dist] : simulated.step_table(i)) {
            const T& p0 = dist.prob("0");
            if (p0 < lo) lo = p0;
            if (p0 > hi) hi = p0;
        }
    }
    return SvCertificate<T>{delta, (T(1) - delta) / T(2), std::move(simulated), std::move(lo), std::move(hi)};
}

/// Verifies the entropy inequality: for delta <= 1/|base alphabet|, every
/// conditional of a valid source has Shannon entropy and min-entropy at
/// least those of the corresponding channel entry (1e-9 float tolerance).
template <class T>
bool check_entropy_inequality(const AdaptiveSource<T>& source, const ChannelFamily<T>& family, const T& delta) {
    const T bound = T(1) / T(static_cast<unsigned>(family.alphabet().base_size()));
    if (delta > bound) throw std::invalid_argument("hypothesis violated: delta exceeds 1/|alphabet|");
    if (source.steps() != family.steps() || !(source.alphabet() == family.alphabet()))
        throw std::invalid_argument("source/channel structure mismatch");
    constexpr double tol = 1e-9;
    for (int i = 1; i <= source.steps(); ++i) {
        for (const auto& h : all_sequences(source.alphabet().full(), i - 1)) {
            if (!source.has_conditional(i, h)) continue;
            const auto& cond = source.conditional(i, h);
            const auto& q = family.conditional(i, h);
            if (shannon_entropy(cond) < shannon_entropy(q) - tol) return false;
            if (min_entropy(cond) < min_entropy(q) - tol) return false;
        }
    }
    return true;
}

}  // namespace weakrand
