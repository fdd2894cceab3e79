#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "weakrand/numeric.hpp"

namespace weakrand {

/// Probability distribution over a finite, ordered outcome alphabet.
///
/// Outcomes are strings: single symbols for per-step conditionals, whole
/// output sequences for joint distributions, arbitrary labels for extractor
/// outputs. The declared order is significant; enumeration and serialization
/// follow it.
///
/// On the exact backend the probabilities must sum to exactly 1; on the float
/// backend the sum may deviate by at most 1e-9 and values in [-1e-9, 0) are
/// clamped to zero.
template <class T>
class Distribution {
  public:
    Distribution(std::vector<std::string> outcomes, std::vector<T> probs)
        : outcomes_(std::move(outcomes)), probs_(std::move(probs)) {
        if (outcomes_.empty()) throw std::invalid_argument("distribution needs at least one outcome");
        if (outcomes_.size() != probs_.size())
            throw std::invalid_argument("outcome/probability count mismatch");
        T sum(0);
        for (auto& p : probs_) {
            if (p < T(0)) {
                if constexpr (NumericTraits<T>::is_exact) {
                    throw std::invalid_argument("negative probability");
                } else {
                    if (p < -NumericTraits<T>::tolerance()) throw std::invalid_argument("negative probability");
                    p = T(0);
                }
            }
            sum += p;
        }
        if constexpr (NumericTraits<T>::is_exact) {
            if (sum != T(1)) throw std::invalid_argument("probabilities do not sum to 1");
        } else {
            if (std::abs(NumericTraits<T>::to_double(sum) - 1.0) > NumericTraits<T>::tolerance())
                throw std::invalid_argument("probabilities do not sum to 1");
        }
        for (std::size_t i = 0; i < outcomes_.size(); ++i) {
            if (!index_.emplace(outcomes_[i], i).second)
                throw std::invalid_argument("duplicate outcome '" + outcomes_[i] + "'");
        }
    }

    static Distribution uniform(std::vector<std::string> outcomes) {
        const std::size_t k = outcomes.size();
        if (k == 0) throw std::invalid_argument("uniform over empty alphabet");
        std::vector<T> probs;
        probs.reserve(k);
        if constexpr (NumericTraits<T>::is_exact) {
            for (std::size_t i = 0; i < k; ++i) probs.push_back(T(1) / T(static_cast<unsigned>(k)));
        } else {
            for (std::size_t i = 0; i < k; ++i) probs.push_back(1.0 / static_cast<double>(k));
        }
        return Distribution(std::move(outcomes), std::move(probs));
    }

    static Distribution point_mass(std::vector<std::string> outcomes, const std::string& which) {
        std::vector<T> probs(outcomes.size(), T(0));
        auto it = std::find(outcomes.begin(), outcomes.end(), which);
        if (it == outcomes.end()) throw std::invalid_argument("point mass outcome not in alphabet");
        probs[static_cast<std::size_t>(it - outcomes.begin())] = T(1);
        return Distribution(std::move(outcomes), std::move(probs));
    }

    const std::vector<std::string>& outcomes() const { return outcomes_; }
    std::size_t size() const { return outcomes_.size(); }

    const T& prob_at(std::size_t i) const { return probs_.at(i); }

    const T& prob(const std::string& outcome) const {
        auto it = index_.find(outcome);
        if (it == index_.end()) throw std::out_of_range("outcome '" + outcome + "' not in alphabet");
        return probs_[it->second];
    }

    bool has_outcome(const std::string& outcome) const { return index_.count(outcome) != 0; }

    bool same_alphabet(const Distribution& other) const { return outcomes_ == other.outcomes_; }

    friend bool operator==(const Distribution& a, const Distribution& b) {
        return a.outcomes_ == b.outcomes_ && a.probs_ == b.probs_;
    }

  private:
    std::vector<std::string> outcomes_;
    std::vector<T> probs_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// L1 distance sum_x |p(x) - q(x)|. Symmetric, in [0, 2]. This is the bias
/// measure used throughout; exact on the rational backend.
template <class T>
T l1_distance(const Distribution<T>& p, const Distribution<T>& q) {
    if (!p.same_alphabet(q)) throw std::invalid_argument("incompatible distributions");
    T acc(0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        T diff = p.prob_at(i) - q.prob_at(i);
        acc += diff < T(0) ? T(-diff) : diff;
    }
    return acc;
}

/// Shannon entropy -sum p log2 p with 0 log 0 = 0. Always a double: entropy
/// values are irrational even for rational inputs.
template <class T>
double shannon_entropy(const Distribution<T>& p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = NumericTraits<T>::to_double(p.prob_at(i));
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

/// Min-entropy -log2 max_x p(x), as a double.
template <class T>
double min_entropy(const Distribution<T>& p) {
    double mx = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        mx = std::max(mx, NumericTraits<T>::to_double(p.prob_at(i)));
    return -std::log2(mx);
}

/// Image distribution under a deterministic map of outcomes. `image_outcomes`
/// fixes the declared order of the result; `map` must send every outcome of
/// `p` into that set.
template <class T, class Fn>
Distribution<T> pushforward(const Distribution<T>& p, std::vector<std::string> image_outcomes, Fn&& map) {
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < image_outcomes.size(); ++i) where.emplace(image_outcomes[i], i);
    std::vector<T> probs(image_outcomes.size(), T(0));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::string target = map(p.outcomes()[i]);
        auto it = where.find(target);
        if (it == where.end())
            throw std::invalid_argument("pushforward image '" + target + "' not in declared outcome set");
        probs[it->second] += p.prob_at(i);
    }
    return Distribution<T>(std::move(image_outcomes), std::move(probs));
}

}  // namespace weakrand
