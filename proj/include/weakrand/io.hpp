#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "weakrand/adversary.hpp"
#include "weakrand/extractor.hpp"
#include "weakrand/quantum.hpp"
#include "weakrand/source.hpp"

namespace weakrand::io {

using Json = nlohmann::ordered_json;

/// FNV-1a 64-bit digest of raw bytes, rendered as fixed-width hex. Used to
/// echo input identities into run reports.
inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return "fnv1a64:" + out;
}

/// Probability values on the wire: "p/q" strings on the exact backend,
/// plain JSON numbers on the float backend. The float parser also accepts
/// fraction strings so exact fixtures can be reused.
template <class T>
T parse_number(const Json& j);

template <>
inline Rational parse_number<Rational>(const Json& j) {
    if (j.is_string()) return rational_from_string(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw std::invalid_argument("exact backend requires rational strings like \"29/200\", got " + j.dump());
}

template <>
inline double parse_number<double>(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return NumericTraits<Rational>::to_double(rational_from_string(j.get<std::string>()));
    throw std::invalid_argument("expected a number, got " + j.dump());
}

template <class T>
Json number_to_json(const T& v);

template <>
inline Json number_to_json<Rational>(const Rational& v) {
    return Json(to_fraction_string(v));
}

template <>
inline Json number_to_json<double>(const double& v) {
    return Json(v);
}

/// A rational rendered both exactly and as a decimal, for reports.
inline Json scalar_report(const Rational& v) {
    Json j;
    j["rational"] = to_fraction_string(v);
    j["decimal"] = NumericTraits<Rational>::to_double(v);
    return j;
}

inline Json scalar_report(double v) { return Json(v); }

namespace detail {

inline const Json& require_field(const Json& j, const std::string& key, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string(what) + " is missing field \"" + key + "\"");
    return *it;
}

inline ErasureAlphabet parse_alphabet(const Json& j, const char* what) {
    return ErasureAlphabet(require_field(j, "base_alphabet", what).get<std::string>());
}

template <class T>
std::vector<T> parse_row(const Json& j, std::size_t expected, const std::string& context) {
    if (!j.is_array() || j.size() != expected)
        throw std::invalid_argument(context + " must be an array of " + std::to_string(expected) +
                                    " probabilities");
    std::vector<T> row;
    row.reserve(expected);
    for (const auto& cell : j) row.push_back(parse_number<T>(cell));
    return row;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// channel family documents
// ---------------------------------------------------------------------------

template <class T>
ChannelFamily<T> parse_channel_family(const Json& j) {
    const int n = detail::require_field(j, "n", "channel family").get<int>();
    const ErasureAlphabet alphabet = detail::parse_alphabet(j, "channel family");
    const Json& channels = detail::require_field(j, "channels", "channel family");
    if (!channels.is_array() || static_cast<int>(channels.size()) != n)
        throw std::invalid_argument("channel family needs one table per step");
    const auto base = alphabet.base_outcomes();
    std::vector<std::map<std::string, Distribution<T>>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, Distribution<T>> table;
        for (const auto& [history, row] : channels[static_cast<std::size_t>(i - 1)].items()) {
            const std::string context = "channel row for history \"" + history + "\" at step " + std::to_string(i);
            try {
                table.emplace(history, Distribution<T>(base, detail::parse_row<T>(row, base.size(), context)));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(context + ": " + e.what());
            }
        }
        steps.push_back(std::move(table));
    }
    return ChannelFamily<T>(alphabet, std::move(steps));
}

template <class T>
Json serialize_channel_family(const ChannelFamily<T>& family) {
    Json j;
    j["n"] = family.steps();
    j["base_alphabet"] = family.alphabet().base();
    Json steps = Json::array();
    for (int i = 1; i <= family.steps(); ++i) {
        Json table = Json::object();
        for (const auto& h : all_sequences(family.alphabet().full(), i - 1)) {
            Json row = Json::array();
            const auto& dist = family.conditional(i, h);
            for (std::size_t k = 0; k < dist.size(); ++k) row.push_back(number_to_json<T>(dist.prob_at(k)));
            table[h] = std::move(row);
        }
        steps.push_back(std::move(table));
    }
    j["channels"] = std::move(steps);
    return j;
}

// ---------------------------------------------------------------------------
// adaptive source documents
// ---------------------------------------------------------------------------

template <class T>
AdaptiveSource<T> parse_source(const Json& j) {
    const int n = detail::require_field(j, "n", "source").get<int>();
    const ErasureAlphabet alphabet = detail::parse_alphabet(j, "source");
    const Json& conditionals = detail::require_field(j, "conditionals", "source");
    if (!conditionals.is_array() || static_cast<int>(conditionals.size()) != n)
        throw std::invalid_argument("source needs one conditional table per step");
    const auto full = alphabet.full_outcomes();
    std::vector<std::map<std::string, Distribution<T>>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, Distribution<T>> table;
        for (const auto& [history, row] : conditionals[static_cast<std::size_t>(i - 1)].items()) {
            const std::string context =
                "source conditional for history \"" + history + "\" at step " + std::to_string(i);
            try {
                table.emplace(history, Distribution<T>(full, detail::parse_row<T>(row, full.size(), context)));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(context + ": " + e.what());
            }
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<T>(alphabet, std::move(steps));
}

template <class T>
Json serialize_source(const AdaptiveSource<T>& source) {
    Json j;
    j["n"] = source.steps();
    j["base_alphabet"] = source.alphabet().base();
    Json steps = Json::array();
    for (int i = 1; i <= source.steps(); ++i) {
        Json table = Json::object();
        // canonical order first, then any remaining stored histories
        for (const auto& h : all_sequences(source.alphabet().full(), i - 1)) {
            if (!source.has_conditional(i, h)) continue;
            Json row = Json::array();
            const auto& dist = source.conditional(i, h);
            for (std::size_t k = 0; k < dist.size(); ++k) row.push_back(number_to_json<T>(dist.prob_at(k)));
            table[h] = std::move(row);
        }
        for (const auto& [h, dist] : source.step_table(i)) {
            if (table.contains(h)) continue;
            Json row = Json::array();
            for (std::size_t k = 0; k < dist.size(); ++k) row.push_back(number_to_json<T>(dist.prob_at(k)));
            table[h] = std::move(row);
        }
        steps.push_back(std::move(table));
    }
    j["conditionals"] = std::move(steps);
    return j;
}

// ---------------------------------------------------------------------------
// extractor documents
// ---------------------------------------------------------------------------

/// An extractor spec plus its file-level convenience default: sequences with
/// erasures may be omitted from the table when `bottom_default` names the
/// base symbol that stands in for the erasure on lookup.
struct ExtractorDocument {
    ExtractorSpec spec;
    std::optional<std::string> bottom_default;
};

inline ExtractorDocument parse_extractor(const Json& j) {
    const int n = detail::require_field(j, "n", "extractor").get<int>();
    const ErasureAlphabet alphabet = detail::parse_alphabet(j, "extractor");
    const Json& table_json = detail::require_field(j, "table", "extractor");
    if (!table_json.is_object()) throw std::invalid_argument("extractor table must be an object");

    std::optional<std::string> bottom_default;
    if (j.contains("bottom_default")) {
        bottom_default = j["bottom_default"].get<std::string>();
        if (bottom_default->size() != 1 || !alphabet.is_base((*bottom_default)[0]))
            throw std::invalid_argument("bottom_default must be a single base symbol");
    }

    std::unordered_map<std::string, std::string> raw;
    for (const auto& [seq, value] : table_json.items()) {
        if (!value.is_string()) throw std::invalid_argument("extractor output for \"" + seq + "\" must be a string");
        raw.emplace(seq, value.get<std::string>());
    }

    std::unordered_map<std::string, std::string> table;
    for (const auto& seq : all_sequences(alphabet.full(), n)) {
        auto it = raw.find(seq);
        if (it != raw.end()) {
            table.emplace(seq, it->second);
            continue;
        }
        if (!bottom_default) throw std::invalid_argument("extractor table misses sequence \"" + seq + "\"");
        std::string substituted = seq;
        for (char& c : substituted)
            if (c == ErasureAlphabet::kErased) c = (*bottom_default)[0];
        auto jt = raw.find(substituted);
        if (jt == raw.end())
            throw std::invalid_argument("extractor table misses sequence \"" + substituted +
                                        "\" needed to default \"" + seq + "\"");
        table.emplace(seq, jt->second);
    }

    std::vector<std::string> outputs;
    if (j.contains("outputs")) {
        outputs = j["outputs"].get<std::vector<std::string>>();
    } else {
        for (const auto& seq : all_sequences(alphabet.full(), n)) {
            const std::string& v = table.at(seq);
            if (std::find(outputs.begin(), outputs.end(), v) == outputs.end()) outputs.push_back(v);
        }
    }
    return ExtractorDocument{ExtractorSpec(n, alphabet, std::move(outputs), std::move(table)),
                             std::move(bottom_default)};
}

inline Json serialize_extractor(const ExtractorDocument& doc) {
    const ExtractorSpec& f = doc.spec;
    Json j;
    j["n"] = f.n();
    j["base_alphabet"] = f.alphabet().base();
    j["outputs"] = f.outputs();

    // collapse erasure rows only when the default reproduces them faithfully
    bool collapse = doc.bottom_default.has_value();
    if (collapse) {
        for (const auto& seq : all_sequences(f.alphabet().full(), f.n())) {
            std::string substituted = seq;
            for (char& c : substituted)
                if (c == ErasureAlphabet::kErased) c = (*doc.bottom_default)[0];
            if (f.value(seq) != f.value(substituted)) {
                collapse = false;
                break;
            }
        }
    }
    if (collapse) j["bottom_default"] = *doc.bottom_default;
    Json table = Json::object();
    const auto sequences =
        collapse ? all_sequences(f.alphabet().base(), f.n()) : all_sequences(f.alphabet().full(), f.n());
    for (const auto& seq : sequences) table[seq] = f.value(seq);
    j["table"] = std::move(table);
    return j;
}

// ---------------------------------------------------------------------------
// quantum strategy and schedule documents
// ---------------------------------------------------------------------------

namespace detail {

inline Complex parse_complex(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument("complex numbers are [re, im] pairs, got " + j.dump());
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Matrix parse_matrix(const Json& j, const std::string& context) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument(context + " must be a nonempty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument(context + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline AdaptiveStrategy parse_strategy(const Json& j, StrategyLimits limits = {}) {
    const int dim = detail::require_field(j, "dim", "strategy").get<int>();
    const int n = detail::require_field(j, "n", "strategy").get<int>();
    const ErasureAlphabet alphabet = detail::parse_alphabet(j, "strategy");
    Matrix initial = detail::parse_matrix(detail::require_field(j, "initial", "strategy"), "initial state");
    if (initial.rows() != dim || initial.cols() != dim)
        throw std::invalid_argument("initial state does not match the declared dimension");
    const Json& steps_json = detail::require_field(j, "steps", "strategy");
    if (!steps_json.is_array() || static_cast<int>(steps_json.size()) != n)
        throw std::invalid_argument("strategy needs one operation table per step");
    std::vector<std::map<std::string, KrausFamily>> steps;
    for (int i = 1; i <= n; ++i) {
        std::map<std::string, KrausFamily> table;
        for (const auto& [history, ops_json] : steps_json[static_cast<std::size_t>(i - 1)].items()) {
            std::map<char, std::vector<Matrix>> operators;
            for (const auto& [outcome, matrices] : ops_json.items()) {
                if (outcome.size() != 1)
                    throw std::invalid_argument("operation outcomes are single symbols, got \"" + outcome + "\"");
                std::vector<Matrix> per_u;
                for (const auto& mj : matrices)
                    per_u.push_back(detail::parse_matrix(
                        mj, "operator for history \"" + history + "\" outcome \"" + outcome + "\""));
                operators.emplace(outcome[0], std::move(per_u));
            }
            try {
                table.emplace(history, KrausFamily(alphabet.base(), std::move(operators)));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("operation for history \"" + history + "\" at step " +
                                            std::to_string(i) + ": " + e.what());
            }
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveStrategy(alphabet, DensityOperator(std::move(initial)), std::move(steps), limits);
}

inline Json serialize_strategy(const AdaptiveStrategy& strategy) {
    Json j;
    j["dim"] = strategy.dim();
    j["n"] = strategy.n();
    j["base_alphabet"] = strategy.alphabet().base();
    j["initial"] = detail::matrix_to_json(strategy.initial_state().matrix());
    Json steps = Json::array();
    for (int i = 1; i <= strategy.n(); ++i) {
        Json table = Json::object();
        for (const auto& h : all_sequences(strategy.alphabet().full(), i - 1)) {
            const KrausFamily& op = strategy.operation(i, h);
            Json per_outcome = Json::object();
            for (char x : op.observed_symbols()) {
                Json matrices = Json::array();
                for (const Matrix& e : op.operators(x)) matrices.push_back(detail::matrix_to_json(e));
                per_outcome[std::string(1, x)] = std::move(matrices);
            }
            table[h] = std::move(per_outcome);
        }
        steps.push_back(std::move(table));
    }
    j["steps"] = std::move(steps);
    return j;
}

inline ErasureSchedule parse_schedule(const Json& j) {
    const double delta = parse_number<double>(detail::require_field(j, "delta", "schedule"));
    ErasureSchedule::WeightTable weights;
    if (j.contains("steps")) {
        const Json& steps = j["steps"];
        if (!steps.is_array()) throw std::invalid_argument("schedule steps must be an array");
        for (const auto& step : steps) {
            std::map<std::string, std::map<char, double>> per_history;
            for (const auto& [history, row] : step.items()) {
                std::map<char, double> per_outcome;
                for (const auto& [outcome, weight] : row.items()) {
                    if (outcome.size() != 1)
                        throw std::invalid_argument("schedule outcomes are single symbols, got \"" + outcome + "\"");
                    per_outcome.emplace(outcome[0], parse_number<double>(weight));
                }
                per_history.emplace(history, std::move(per_outcome));
            }
            weights.push_back(std::move(per_history));
        }
    }
    return ErasureSchedule(delta, std::move(weights));
}

inline Json serialize_schedule(const ErasureSchedule& schedule) {
    Json j;
    j["delta"] = schedule.delta();
    Json steps = Json::array();
    for (const auto& per_step : schedule.table()) {
        Json table = Json::object();
        for (const auto& [history, row] : per_step) {
            Json per_outcome = Json::object();
            for (const auto& [x, lambda] : row) per_outcome[std::string(1, x)] = lambda;
            table[history] = std::move(per_outcome);
        }
        steps.push_back(std::move(table));
    }
    j["steps"] = std::move(steps);
    return j;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << bytes;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
}

/// Canonical rendering: 2-space indent plus trailing newline. Fixture files
/// are stored in exactly this form, so serialize(parse(file)) == file.
inline std::string canonical_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace weakrand::io
