#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "weakrand/alphabet.hpp"
#include "weakrand/distribution.hpp"

namespace weakrand {

namespace detail {

/// Shared storage for per-history conditional tables: one map per step,
/// keyed by the observed history string.
template <class T>
class ConditionalTable {
  public:
    ConditionalTable(ErasureAlphabet alphabet, std::vector<std::map<std::string, Distribution<T>>> steps)
        : alphabet_(std::move(alphabet)), steps_(std::move(steps)) {
        if (steps_.empty()) throw std::invalid_argument("need at least one step");
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            for (const auto& [history, dist] : steps_[i]) {
                if (history.size() != i)
                    throw std::invalid_argument("history '" + history + "' has wrong length for step " +
                                                std::to_string(i + 1));
                for (char c : history)
                    if (!alphabet_.in_full(c))
                        throw std::invalid_argument("history '" + history + "' uses symbols outside the alphabet");
                (void)dist;
            }
        }
    }

    int steps() const { return static_cast<int>(steps_.size()); }
    const ErasureAlphabet& alphabet() const { return alphabet_; }

    /// Conditional for 1-based step `step` given `history`.
    const Distribution<T>& conditional(int step, const std::string& history) const {
        const auto& table = step_table(step);
        auto it = table.find(history);
        if (it == table.end())
            throw std::out_of_range("no conditional for history '" + history + "' at step " +
                                    std::to_string(step));
        return it->second;
    }

    bool has_conditional(int step, const std::string& history) const {
        return step_table(step).count(history) != 0;
    }

    const std::map<std::string, Distribution<T>>& step_table(int step) const {
        if (step < 1 || step > steps()) throw std::out_of_range("step out of range");
        return steps_[static_cast<std::size_t>(step - 1)];
    }

  protected:
    ErasureAlphabet alphabet_;
    std::vector<std::map<std::string, Distribution<T>>> steps_;
};

}  // namespace detail

/// The ideal channels Q_{X_i|X^{i-1}}: for every step i, a distribution over
/// the base alphabet for every history over the full (erasure-augmented)
/// alphabet. Channel outputs never include the erasure symbol.
template <class T>
class ChannelFamily : public detail::ConditionalTable<T> {
  public:
    ChannelFamily(ErasureAlphabet alphabet, std::vector<std::map<std::string, Distribution<T>>> steps)
        : detail::ConditionalTable<T>(std::move(alphabet), std::move(steps)) {
        const auto base = this->alphabet_.base_outcomes();
        for (int i = 1; i <= this->steps(); ++i) {
            const auto histories = all_sequences(this->alphabet_.full(), i - 1);
            if (this->steps_[static_cast<std::size_t>(i - 1)].size() != histories.size())
                throw std::invalid_argument("channel table at step " + std::to_string(i) +
                                            " is not total over all histories");
            for (const auto& h : histories) {
                if (!this->has_conditional(i, h))
                    throw std::invalid_argument("channel missing history '" + h + "' at step " +
                                                std::to_string(i));
                if (this->conditional(i, h).outcomes() != base)
                    throw std::invalid_argument("channel entries must be distributions over the base alphabet");
            }
        }
    }

    /// Family with the same entry at every step and history.
    static ChannelFamily memoryless(int n, const ErasureAlphabet& alphabet, const Distribution<T>& entry) {
        std::vector<std::map<std::string, Distribution<T>>> steps;
        for (int i = 1; i <= n; ++i) {
            std::map<std::string, Distribution<T>> table;
            for (const auto& h : all_sequences(alphabet.full(), i - 1)) table.emplace(h, entry);
            steps.push_back(std::move(table));
        }
        return ChannelFamily(alphabet, std::move(steps));
    }

    static ChannelFamily uniform(int n, const ErasureAlphabet& alphabet) {
        return memoryless(n, alphabet, Distribution<T>::uniform(alphabet.base_outcomes()));
    }
};

/// An adaptive source: per-history conditional distributions over the full
/// alphabet (erasure included), defining a joint distribution on sequences.
/// Conditionals must exist for every history reachable with positive
/// probability; histories of probability zero may be omitted.
template <class T>
class AdaptiveSource : public detail::ConditionalTable<T> {
  public:
    AdaptiveSource(ErasureAlphabet alphabet, std::vector<std::map<std::string, Distribution<T>>> steps)
        : detail::ConditionalTable<T>(std::move(alphabet), std::move(steps)) {
        const auto full = this->alphabet_.full_outcomes();
        for (int i = 1; i <= this->steps(); ++i)
            for (const auto& [h, dist] : this->step_table(i))
                if (dist.outcomes() != full)
                    throw std::invalid_argument("source conditionals must be distributions over the full alphabet");
    }
};

/// Membership in the perturbation set: (1-delta) p(x) <= pbar(x) <= p(x) for
/// every base symbol x. `pbar` lives on the full alphabet, `p` on the base.
/// Exact on the rational backend, 1e-9 slack per bound on floats.
template <class T>
bool in_perturbation_set(const Distribution<T>& pbar, const Distribution<T>& p, const T& delta) {
    if (delta < T(0) || delta > T(1)) throw std::invalid_argument("delta must lie in [0,1]");
    if (pbar.size() != p.size() + 1) throw std::invalid_argument("incompatible distributions");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (pbar.outcomes()[i] != p.outcomes()[i]) throw std::invalid_argument("incompatible distributions");
    const T tol = NumericTraits<T>::tolerance();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const T& upper = p.prob_at(i);
        const T lower = (T(1) - delta) * upper;
        const T& value = pbar.prob_at(i);
        if (value < lower - tol || value > upper + tol) return false;
    }
    return true;
}

/// Whether `source` is a (delta, {Q})-source for the given channel family:
/// every conditional, at every history over the full alphabet, lies in the
/// perturbation set of the corresponding channel entry.
template <class T>
bool is_delta_source(const AdaptiveSource<T>& source, const ChannelFamily<T>& family, const T& delta) {
    if (source.steps() != family.steps() || !(source.alphabet() == family.alphabet()))
        throw std::invalid_argument("source/channel structure mismatch");
    for (int i = 1; i <= source.steps(); ++i) {
        for (const auto& h : all_sequences(source.alphabet().full(), i - 1)) {
            if (!source.has_conditional(i, h))
                throw std::invalid_argument("source missing conditional for history '" + h + "' at step " +
                                            std::to_string(i));
            if (!in_perturbation_set(source.conditional(i, h), family.conditional(i, h), delta)) return false;
        }
    }
    return true;
}

/// Locates the first (step, history, symbol) violating the perturbation
/// bounds, for error reporting.
struct DeltaViolation {
    bool found = false;
    int step = 0;
    std::string history;
    std::string symbol;
};

template <class T>
DeltaViolation find_delta_violation(const AdaptiveSource<T>& source, const ChannelFamily<T>& family,
                                    const T& delta) {
    const T tol = NumericTraits<T>::tolerance();
    for (int i = 1; i <= source.steps(); ++i) {
        for (const auto& h : all_sequences(source.alphabet().full(), i - 1)) {
            if (!source.has_conditional(i, h)) return {true, i, h, "<missing>"};
            const auto& pbar = source.conditional(i, h);
            const auto& q = family.conditional(i, h);
            for (std::size_t k = 0; k < q.size(); ++k) {
                const T& upper = q.prob_at(k);
                const T lower = (T(1) - delta) * upper;
                const T& value = pbar.prob_at(k);
                if (value < lower - tol || value > upper + tol) return {true, i, h, q.outcomes()[k]};
            }
        }
    }
    return {};
}

/// Santha-Vazirani membership: binary base alphabet, zero erasure mass, and
/// every conditional probability of '0' within [alpha, 1-alpha]. Histories
/// range over binary strings.
template <class T>
bool is_sv_source(const AdaptiveSource<T>& source, const T& alpha) {
    if (source.alphabet().base() != "01")
        throw std::invalid_argument("SV membership requires the binary base alphabet 01");
    const T tol = NumericTraits<T>::tolerance();
    for (int i = 1; i <= source.steps(); ++i) {
        for (const auto& h : all_sequences(source.alphabet().base(), i - 1)) {
            if (!source.has_conditional(i, h)) continue;  // unreachable history
            const auto& dist = source.conditional(i, h);
            if (dist.prob("_") > tol) throw std::invalid_argument("SV membership requires zero erasure mass");
            const T& p0 = dist.prob("0");
            if (p0 < alpha - tol || p0 > T(1) - alpha + tol) return false;
        }
    }
    return true;
}

/// Exact joint distribution over full-alphabet sequences, via the chain rule.
/// Zero-probability prefixes contribute zero to their whole subtree and need
/// no conditionals. Errors out if the outcome count exceeds `max_outcomes`.
template <class T>
Distribution<T> enumerate_joint(const AdaptiveSource<T>& source, std::size_t max_outcomes = 1000000) {
    const int n = source.steps();
    const std::string& full = source.alphabet().full();
    const std::size_t count = sequence_count(full.size(), n);
    if (count > max_outcomes)
        throw std::invalid_argument("enumeration requires " + std::to_string(count) +
                                    " outcomes, above the cap of " + std::to_string(max_outcomes));
    std::vector<std::string> outcomes;
    outcomes.reserve(count);
    std::vector<T> probs;
    probs.reserve(count);
    std::string prefix;
    auto walk = [&](auto&& self, int depth, const T& acc) -> void {
        if (depth == n) {
            outcomes.push_back(prefix);
            probs.push_back(acc);
            return;
        }
        if (acc == T(0)) {
            // whole subtree is null, no conditional required
            for (const auto& tail : all_sequences(full, n - depth)) {
                outcomes.push_back(prefix + tail);
                probs.push_back(T(0));
            }
            return;
        }
        const auto& cond = source.conditional(depth + 1, prefix);
        for (char c : full) {
            prefix.push_back(c);
            self(self, depth + 1, T(acc * cond.prob(std::string(1, c))));
            prefix.pop_back();
        }
    };
    walk(walk, 0, T(1));
    return Distribution<T>(std::move(outcomes), std::move(probs));
}

/// Draws one sequence from the source. Deterministic for a fixed seed; the
/// seed is scrambled through splitmix64 first so that sequential seeds give
/// statistically independent draws.
template <class T>
std::string sample(const AdaptiveSource<T>& source, std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    std::mt19937_64 rng(z);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string out;
    for (int i = 1; i <= source.steps(); ++i) {
        const auto& cond = source.conditional(i, out);
        const double u = unit(rng);
        double cum = 0.0;
        char chosen = source.alphabet().full().back();
        for (std::size_t k = 0; k < cond.size(); ++k) {
            cum += NumericTraits<T>::to_double(cond.prob_at(k));
            if (u < cum) {
                chosen = cond.outcomes()[k][0];
                break;
            }
        }
        out.push_back(chosen);
    }
    return out;
}

}  // namespace weakrand
