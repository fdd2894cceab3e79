#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "weakrand/alphabet.hpp"
#include "weakrand/distribution.hpp"

namespace weakrand {

/// Deterministic extractor candidate f: a total map from full-alphabet
/// sequences (erasures included) to a finite output set with declared order.
class ExtractorSpec {
  public:
    ExtractorSpec(int n, ErasureAlphabet alphabet, std::vector<std::string> outputs,
                  std::unordered_map<std::string, std::string> table)
        : n_(n), alphabet_(std::move(alphabet)), outputs_(std::move(outputs)), table_(std::move(table)) {
        if (n_ < 1) throw std::invalid_argument("extractor needs n >= 1");
        if (alphabet_.base_size() < 2)
            throw std::invalid_argument("extractors need at least two base symbols");
        if (outputs_.empty()) throw std::invalid_argument("empty output set");
        for (std::size_t i = 0; i < outputs_.size(); ++i) {
            if (!output_index_.emplace(outputs_[i], i).second)
                throw std::invalid_argument("duplicate output label '" + outputs_[i] + "'");
        }
        for (const auto& seq : all_sequences(alphabet_.full(), n_)) {
            auto it = table_.find(seq);
            if (it == table_.end())
                throw std::invalid_argument("extractor table misses sequence '" + seq + "'");
            if (!output_index_.count(it->second))
                throw std::invalid_argument("extractor maps '" + seq + "' to undeclared output '" +
                                            it->second + "'");
        }
    }

    int n() const { return n_; }
    const ErasureAlphabet& alphabet() const { return alphabet_; }
    const std::vector<std::string>& outputs() const { return outputs_; }
    std::size_t output_count() const { return outputs_.size(); }

    /// ceil(log2 |Z|), at least 1.
    int bit_width() const {
        int m = 0;
        std::size_t cover = 1;
        while (cover < outputs_.size()) {
            cover *= 2;
            ++m;
        }
        return m == 0 ? 1 : m;
    }

    const std::string& value(const std::string& sequence) const {
        auto it = table_.find(sequence);
        if (it == table_.end()) throw std::out_of_range("sequence '" + sequence + "' not in extractor table");
        return it->second;
    }

    std::size_t output_index(const std::string& label) const { return output_index_.at(label); }

  private:
    int n_;
    ErasureAlphabet alphabet_;
    std::vector<std::string> outputs_;
    std::unordered_map<std::string, std::string> table_;
    std::unordered_map<std::string, std::size_t> output_index_;
};

/// Randomized strategy g: a table on (sequence, auxiliary symbol) pairs plus
/// the channel supplying the auxiliary randomness per sequence.
template <class T>
class RandomizedSpec {
  public:
    RandomizedSpec(int n, ErasureAlphabet alphabet, std::vector<std::string> outputs,
                   std::vector<std::string> aux_alphabet,
                   std::map<std::pair<std::string, std::string>, std::string> table,
                   std::map<std::string, Distribution<T>> aux_channel)
        : n_(n),
          alphabet_(std::move(alphabet)),
          outputs_(std::move(outputs)),
          aux_alphabet_(std::move(aux_alphabet)),
          table_(std::move(table)),
          aux_channel_(std::move(aux_channel)) {
        if (aux_alphabet_.empty()) throw std::invalid_argument("empty auxiliary alphabet");
        for (const auto& seq : all_sequences(alphabet_.full(), n_)) {
            auto ch = aux_channel_.find(seq);
            if (ch == aux_channel_.end())
                throw std::invalid_argument("auxiliary channel misses sequence '" + seq + "'");
            if (ch->second.outcomes() != aux_alphabet_)
                throw std::invalid_argument("auxiliary channel entries must range over the declared alphabet");
            for (const auto& y : aux_alphabet_)
                if (!table_.count({seq, y}))
                    throw std::invalid_argument("randomized table misses ('" + seq + "', '" + y + "')");
        }
    }

    /// g that ignores the auxiliary input and plays `f` directly.
    static RandomizedSpec from_deterministic(const class ExtractorSpec& f) {
        std::vector<std::string> aux{"0"};
        std::map<std::pair<std::string, std::string>, std::string> table;
        std::map<std::string, Distribution<T>> channel;
        for (const auto& seq : all_sequences(f.alphabet().full(), f.n())) {
            table.emplace(std::make_pair(seq, "0"), f.value(seq));
            channel.emplace(seq, Distribution<T>::point_mass({"0"}, "0"));
        }
        return RandomizedSpec(f.n(), f.alphabet(), f.outputs(), std::move(aux), std::move(table),
                              std::move(channel));
    }

    int n() const { return n_; }
    const ErasureAlphabet& alphabet() const { return alphabet_; }
    const std::vector<std::string>& outputs() const { return outputs_; }
    const std::vector<std::string>& aux_alphabet() const { return aux_alphabet_; }

    const std::string& value(const std::string& sequence, const std::string& y) const {
        auto it = table_.find({sequence, y});
        if (it == table_.end())
            throw std::out_of_range("pair ('" + sequence + "', '" + y + "') not in randomized table");
        return it->second;
    }

    const Distribution<T>& aux_distribution(const std::string& sequence) const {
        auto it = aux_channel_.find(sequence);
        if (it == aux_channel_.end()) throw std::out_of_range("sequence '" + sequence + "' not in aux channel");
        return it->second;
    }

  private:
    int n_;
    ErasureAlphabet alphabet_;
    std::vector<std::string> outputs_;
    std::vector<std::string> aux_alphabet_;
    std::map<std::pair<std::string, std::string>, std::string> table_;
    std::map<std::string, Distribution<T>> aux_channel_;
};

/// Injective binary encoding of an output set of the given size: element k
/// is encoded as the ceil(log2 size)-bit big-endian representation of k.
/// encoding[k][j] is bit j+1 (most significant first) of element k.
inline std::vector<std::vector<int>> binary_encoding(std::size_t z_count) {
    if (z_count == 0) throw std::invalid_argument("empty output set");
    int m = 0;
    std::size_t cover = 1;
    while (cover < z_count) {
        cover *= 2;
        ++m;
    }
    if (m == 0) m = 1;
    std::vector<std::vector<int>> codes(z_count, std::vector<int>(static_cast<std::size_t>(m), 0));
    for (std::size_t k = 0; k < z_count; ++k)
        for (int j = 0; j < m; ++j) codes[k][static_cast<std::size_t>(j)] = static_cast<int>((k >> (m - 1 - j)) & 1);
    return codes;
}

}  // namespace weakrand
