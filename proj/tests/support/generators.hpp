#pragma once

// Test-only helpers: deterministic random generation of distributions,
// channel families, valid sources, extractor tables, randomized strategies
// and small quantum strategies. Everything is seeded explicitly so failures
// reproduce.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "weakrand/weakrand.hpp"

namespace testgen {

using weakrand::AdaptiveSource;
using weakrand::AdaptiveStrategy;
using weakrand::ChannelFamily;
using weakrand::Distribution;
using weakrand::ErasureAlphabet;
using weakrand::ErasureSchedule;
using weakrand::ExtractorSpec;
using weakrand::KrausFamily;
using weakrand::Matrix;
using weakrand::RandomizedSpec;
using weakrand::Rational;
using weakrand::Vector;

using Rng = std::mt19937_64;

/// Uniformly random k/max_den with k in [0, max_den].
inline Rational random_unit_rational(Rng& rng, int max_den = 16) {
    std::uniform_int_distribution<int> pick(0, max_den);
    return Rational(pick(rng), max_den);
}

/// Random exact distribution over the given outcomes: integer weights
/// normalized by their sum, so probabilities sum to exactly 1.
inline Distribution<Rational> random_distribution(Rng& rng, std::vector<std::string> outcomes,
                                                  int max_weight = 12) {
    std::uniform_int_distribution<int> pick(0, max_weight);
    std::vector<int> weights(outcomes.size());
    int total = 0;
    while (total == 0) {
        total = 0;
        for (auto& w : weights) {
            w = pick(rng);
            total += w;
        }
    }
    std::vector<Rational> probs;
    probs.reserve(weights.size());
    for (int w : weights) probs.emplace_back(w, total);
    return Distribution<Rational>(std::move(outcomes), std::move(probs));
}

inline ChannelFamily<Rational> random_channel_family(Rng& rng, int n, const ErasureAlphabet& alphabet) {
    std::vector<std::map<std::string, Distribution<Rational>>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, Distribution<Rational>> table;
        for (const auto& h : weakrand::all_sequences(alphabet.full(), i - 1))
            table.emplace(h, random_distribution(rng, alphabet.base_outcomes()));
        steps.push_back(std::move(table));
    }
    return ChannelFamily<Rational>(alphabet, std::move(steps));
}

/// Random member of the perturbation set of `row`: every base symbol keeps a
/// random fraction in [1 - delta, 1] of its ideal mass, the rest is erased.
inline Distribution<Rational> random_perturbed_row(Rng& rng, const Distribution<Rational>& row,
                                                   const Rational& delta,
                                                   const std::vector<std::string>& full_outcomes) {
    std::vector<Rational> probs;
    probs.reserve(full_outcomes.size());
    Rational kept(0);
    for (std::size_t k = 0; k < row.size(); ++k) {
        const Rational thin = Rational(1) - delta * random_unit_rational(rng);
        Rational p = thin * row.prob_at(k);
        kept += p;
        probs.push_back(std::move(p));
    }
    probs.push_back(Rational(1) - kept);
    return Distribution<Rational>(full_outcomes, std::move(probs));
}

/// Random valid (delta, {Q})-source for the family: every conditional lies in the
/// perturbation set of the corresponding channel entry by construction.
inline AdaptiveSource<Rational> random_delta_source(Rng& rng, const ChannelFamily<Rational>& family,
                                                    const Rational& delta) {
    const auto full = family.alphabet().full_outcomes();
    std::vector<std::map<std::string, Distribution<Rational>>> steps;
    for (int i = 1; i <= family.steps(); ++i) {
        std::map<std::string, Distribution<Rational>> table;
        for (const auto& [h, row] : family.step_table(i))
            table.emplace(h, random_perturbed_row(rng, row, delta, full));
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<Rational>(family.alphabet(), std::move(steps));
}

inline ExtractorSpec random_binary_extractor(Rng& rng, int n, const ErasureAlphabet& alphabet) {
    std::uniform_int_distribution<int> bit(0, 1);
    std::unordered_map<std::string, std::string> table;
    for (const auto& seq : weakrand::all_sequences(alphabet.full(), n))
        table.emplace(seq, bit(rng) ? "1" : "0");
    return ExtractorSpec(n, alphabet, {"0", "1"}, std::move(table));
}

inline ExtractorSpec random_extractor(Rng& rng, int n, const ErasureAlphabet& alphabet,
                                      std::vector<std::string> outputs) {
    std::uniform_int_distribution<std::size_t> pick(0, outputs.size() - 1);
    std::unordered_map<std::string, std::string> table;
    for (const auto& seq : weakrand::all_sequences(alphabet.full(), n)) table.emplace(seq, outputs[pick(rng)]);
    return ExtractorSpec(n, alphabet, std::move(outputs), std::move(table));
}

inline RandomizedSpec<Rational> random_randomized(Rng& rng, int n, const ErasureAlphabet& alphabet,
                                                  std::vector<std::string> outputs, int aux_size = 2) {
    std::vector<std::string> aux;
    for (int y = 0; y < aux_size; ++y) aux.emplace_back(1, static_cast<char>('a' + y));
    std::uniform_int_distribution<std::size_t> pick(0, outputs.size() - 1);
    std::map<std::pair<std::string, std::string>, std::string> table;
    std::map<std::string, Distribution<Rational>> channel;
    for (const auto& seq : weakrand::all_sequences(alphabet.full(), n)) {
        channel.emplace(seq, random_distribution(rng, aux));
        for (const auto& y : aux) table.emplace(std::make_pair(seq, y), outputs[pick(rng)]);
    }
    return RandomizedSpec<Rational>(n, alphabet, std::move(outputs), std::move(aux), std::move(table),
                                    std::move(channel));
}

// ---------------------------------------------------------------------------
// quantum generators
// ---------------------------------------------------------------------------

inline Matrix random_matrix(Rng& rng, int dim, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = weakrand::Complex(gauss(rng), gauss(rng));
    return m;
}

inline Vector random_unit_vector(Rng& rng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(dim);
    for (int r = 0; r < dim; ++r) v(r) = weakrand::Complex(gauss(rng), gauss(rng));
    return v / v.norm();
}

inline weakrand::DensityOperator random_density(Rng& rng, int dim) {
    Matrix a = random_matrix(rng, dim);
    Matrix rho = a * a.adjoint();
    return weakrand::DensityOperator(rho / rho.trace().real());
}

/// Random complete Kraus family over the given observed symbols: random
/// operators A_j right-multiplied by (sum A'A)^(-1/2), split into 1 or 2
/// hidden outcomes per observed symbol.
inline KrausFamily random_kraus_family(Rng& rng, int dim, const std::string& observed) {
    std::uniform_int_distribution<int> hidden_count(1, 2);
    std::vector<int> per_outcome;
    int total = 0;
    for (char x : observed) {
        (void)x;
        per_outcome.push_back(hidden_count(rng));
        total += per_outcome.back();
    }
    std::vector<Matrix> raw;
    raw.reserve(static_cast<std::size_t>(total));
    Matrix gram = Matrix::Zero(dim, dim);
    for (int j = 0; j < total; ++j) {
        raw.push_back(random_matrix(rng, dim));
        gram += raw.back().adjoint() * raw.back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(gram);
    const Matrix normalize = eigen.operatorInverseSqrt();
    std::map<char, std::vector<Matrix>> operators;
    int next = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        std::vector<Matrix> ops;
        for (int u = 0; u < per_outcome[i]; ++u) ops.push_back(raw[static_cast<std::size_t>(next++)] * normalize);
        operators.emplace(observed[i], std::move(ops));
    }
    return KrausFamily(observed, std::move(operators));
}

inline AdaptiveStrategy random_strategy(Rng& rng, int n, int dim, const ErasureAlphabet& alphabet) {
    std::vector<std::map<std::string, KrausFamily>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, KrausFamily> table;
        for (const auto& h : weakrand::all_sequences(alphabet.full(), i - 1))
            table.emplace(h, random_kraus_family(rng, dim, alphabet.base()));
        steps.push_back(std::move(table));
    }
    return AdaptiveStrategy(alphabet, random_density(rng, dim), std::move(steps));
}

inline ErasureSchedule random_schedule(Rng& rng, const AdaptiveStrategy& strategy, double delta) {
    std::uniform_real_distribution<double> weight(0.0, delta);
    ErasureSchedule::WeightTable table(static_cast<std::size_t>(strategy.n()));
    for (int i = 1; i <= strategy.n(); ++i) {
        for (const auto& h : weakrand::all_sequences(strategy.alphabet().full(), i - 1)) {
            std::map<char, double> row;
            for (char x : strategy.alphabet().base()) row.emplace(x, weight(rng));
            table[static_cast<std::size_t>(i - 1)].emplace(h, std::move(row));
        }
    }
    return ErasureSchedule(delta, std::move(table));
}

/// The Hadamard-then-measure single-qubit operation used across fixtures.
inline KrausFamily hadamard_measure() {
    Matrix h(2, 2);
    const double isq = 1.0 / std::sqrt(2.0);
    h << isq, isq, isq, -isq;
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    std::map<char, std::vector<Matrix>> operators;
    operators.emplace('0', std::vector<Matrix>{p0 * h});
    operators.emplace('1', std::vector<Matrix>{p1 * h});
    return KrausFamily("01", std::move(operators));
}

inline AdaptiveStrategy hadamard_strategy(int n = 1) {
    const ErasureAlphabet alphabet("01");
    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    std::vector<std::map<std::string, KrausFamily>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, KrausFamily> table;
        for (const auto& h : weakrand::all_sequences(alphabet.full(), i - 1))
            table.emplace(h, hadamard_measure());
        steps.push_back(std::move(table));
    }
    return AdaptiveStrategy(alphabet, weakrand::DensityOperator(zero), std::move(steps));
}

}  // namespace testgen
