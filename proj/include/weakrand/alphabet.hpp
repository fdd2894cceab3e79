#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace weakrand {

/// Base symbol set with the distinguished erasure symbol appended.
///
/// Symbols are single printable characters; '_' is reserved for the erasure
/// and can never be a base symbol. Output sequences and histories are plain
/// strings over these characters, e.g. "01_" for (0, 1, erased).
class ErasureAlphabet {
  public:
    static constexpr char kErased = '_';

    explicit ErasureAlphabet(std::string base) : base_(std::move(base)) {
        if (base_.empty()) throw std::invalid_argument("base alphabet must not be empty");
        for (std::size_t i = 0; i < base_.size(); ++i) {
            if (base_[i] == kErased) throw std::invalid_argument("'_' is reserved for the erasure symbol");
            if (base_.find(base_[i], i + 1) != std::string::npos)
                throw std::invalid_argument("duplicate symbol in base alphabet");
        }
        full_ = base_ + kErased;
    }

    const std::string& base() const { return base_; }
    const std::string& full() const { return full_; }
    std::size_t base_size() const { return base_.size(); }
    std::size_t full_size() const { return full_.size(); }

    bool is_base(char c) const { return base_.find(c) != std::string::npos; }
    bool in_full(char c) const { return c == kErased || is_base(c); }

    /// Base symbols as single-character strings, in declared order.
    std::vector<std::string> base_outcomes() const { return to_outcomes(base_); }
    /// Base symbols then '_', in declared order.
    std::vector<std::string> full_outcomes() const { return to_outcomes(full_); }

    friend bool operator==(const ErasureAlphabet& a, const ErasureAlphabet& b) {
        return a.base_ == b.base_;
    }

  private:
    static std::vector<std::string> to_outcomes(const std::string& symbols) {
        std::vector<std::string> out;
        out.reserve(symbols.size());
        for (char c : symbols) out.emplace_back(1, c);
        return out;
    }

    std::string base_;
    std::string full_;
};

/// All length-`length` strings over `symbols`, in odometer order with the
/// rightmost position varying fastest. This is the canonical sequence order
/// used by serialization and enumeration.
inline std::vector<std::string> all_sequences(const std::string& symbols, int length) {
    if (length < 0) throw std::invalid_argument("negative sequence length");
    std::vector<std::string> out{""};
    for (int i = 0; i < length; ++i) {
        std::vector<std::string> next;
        next.reserve(out.size() * symbols.size());
        for (const auto& prefix : out)
            for (char c : symbols) next.push_back(prefix + c);
        out = std::move(next);
    }
    return out;
}

/// Number of length-`length` sequences, guarding against overflow of the
/// enumeration caps.
inline std::size_t sequence_count(std::size_t alphabet_size, int length) {
    std::size_t n = 1;
    for (int i = 0; i < length; ++i) {
        if (n > static_cast<std::size_t>(-1) / alphabet_size)
            throw std::overflow_error("sequence count overflow");
        n *= alphabet_size;
    }
    return n;
}

}  // namespace weakrand
