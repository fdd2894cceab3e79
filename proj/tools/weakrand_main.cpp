// Command-line front end: parse channel families, extractor tables, quantum
// strategies and erasure schedules from JSON files; run attacks,
// verifications and simulations; emit machine-readable reports.
//
// Exit codes: 0 success / verdict true, 1 verdict false, 2 input error.

#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "weakrand/weakrand.hpp"

namespace {

using weakrand::Rational;
using Json = weakrand::io::Json;

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitInputError = 2;

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
};

struct LoadedFile {
    std::string path;
    std::string bytes;
    Json json;
};

LoadedFile load(const std::string& path) {
    std::string bytes = weakrand::io::read_file(path);
    Json json = weakrand::io::parse_json_text(bytes, path);
    return LoadedFile{path, std::move(bytes), std::move(json)};
}

void emit(const Json& report, const std::string& out_path) {
    const std::string text = weakrand::io::canonical_text(report);
    if (out_path.empty())
        std::cout << text;
    else
        weakrand::io::write_file(out_path, text);
}

Rational parse_exact_delta(const std::string& text) {
    Rational delta = weakrand::rational_from_string(text);
    if (delta < 0 || delta > 1) throw std::invalid_argument("delta must lie in [0,1]");
    return delta;
}

double parse_float_delta(const std::string& text) {
    double delta = 0.0;
    if (text.find('/') != std::string::npos) {
        delta = weakrand::NumericTraits<Rational>::to_double(weakrand::rational_from_string(text));
    } else {
        std::size_t used = 0;
        delta = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("malformed delta '" + text + "'");
    }
    if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta must lie in [0,1]");
    return delta;
}

Json report_header(const std::string& command, std::initializer_list<std::pair<const char*, const LoadedFile*>> inputs,
                   const std::string& backend) {
    Json j;
    j["command"] = command;
    Json digests = Json::object();
    for (const auto& [name, file] : inputs) digests[name] = weakrand::io::fnv1a_digest(file->bytes);
    j["inputs"] = std::move(digests);
    j["backend"] = backend;
    return j;
}

int run_attack(const std::string& extractor_path, const std::string& channels_path, const std::string& delta_text,
               const std::string& out_path, const std::string& backend, std::size_t max_outcomes) {
    if (backend != "exact")
        throw std::invalid_argument("the attack command runs on the exact backend only (--backend exact)");
    const Clock clock;
    const LoadedFile extractor_file = load(extractor_path);
    const LoadedFile channels_file = load(channels_path);
    const Rational delta = parse_exact_delta(delta_text);
    if (delta == 0) throw std::invalid_argument("delta must be positive for the attack");

    const weakrand::io::ExtractorDocument doc = weakrand::io::parse_extractor(extractor_file.json);
    const auto family = weakrand::io::parse_channel_family<Rational>(channels_file.json);
    const std::size_t required = weakrand::sequence_count(family.alphabet().full_size(), family.steps());
    if (required > max_outcomes)
        throw std::invalid_argument("attack requires enumerating " + std::to_string(required) +
                                    " outcomes, above the cap of " + std::to_string(max_outcomes));

    const auto report = weakrand::attack_extractor(doc.spec, family, delta);
    const Rational threshold = delta / 10;
    const bool meets = report.bias >= threshold;

    Json out = report_header("attack", {{"extractor", &extractor_file}, {"channels", &channels_file}}, "exact");
    out["parameters"] = Json{{"delta", weakrand::io::scalar_report(delta)}};
    Json results;
    results["winner"] = report.winner;
    results["bias"] = weakrand::io::scalar_report(report.bias);
    results["threshold"] = weakrand::io::scalar_report(threshold);
    results["meets_threshold"] = meets;
    results["tilt"] = Json{{"tau", weakrand::io::scalar_report(report.tilt.tau)},
                           {"ratio_alpha", weakrand::io::scalar_report(report.tilt.ratio_alpha)},
                           {"swapped", report.tilt.swapped}};
    Json weights = Json::object();
    for (const auto& [seq, w] : report.agreement_weights) weights[seq] = weakrand::io::scalar_report(w);
    results["guess_weights"] = std::move(weights);
    Json matrix = Json::array();
    for (const auto& row : report.joint_outcome_matrix) {
        Json cells = Json::array();
        for (const auto& cell : row) cells.push_back(weakrand::io::scalar_report(cell));
        matrix.push_back(std::move(cells));
    }
    results["outcome_matrix"] = std::move(matrix);
    results["witness_source"] = weakrand::io::serialize_source(report.winning_source);
    out["results"] = std::move(results);
    out["duration_ms"] = clock.elapsed_ms();
    emit(out, out_path);
    return meets ? kExitTrue : kExitFalse;
}

template <class T>
int run_verify_source(const LoadedFile& source_file, const LoadedFile& channels_file, const T& delta,
                      const std::string& out_path) {
    const Clock clock;
    const auto source = weakrand::io::parse_source<T>(source_file.json);
    const auto family = weakrand::io::parse_channel_family<T>(channels_file.json);
    const weakrand::DeltaViolation violation = weakrand::find_delta_violation(source, family, delta);

    Json out = report_header("verify-source", {{"source", &source_file}, {"channels", &channels_file}},
                             weakrand::NumericTraits<T>::name());
    out["parameters"] = Json{{"delta", weakrand::io::scalar_report(delta)}};
    Json results;
    results["member"] = !violation.found;
    if (violation.found)
        results["violation"] = Json{{"step", violation.step}, {"history", violation.history},
                                    {"symbol", violation.symbol}};
    out["results"] = std::move(results);
    out["duration_ms"] = clock.elapsed_ms();
    emit(out, out_path);
    return violation.found ? kExitFalse : kExitTrue;
}

int run_quantum(const std::string& strategy_path, const std::string& schedule_path, const std::string& delta_text,
                const std::string& out_path) {
    const Clock clock;
    const LoadedFile strategy_file = load(strategy_path);
    const LoadedFile schedule_file = load(schedule_path);
    const double delta = parse_float_delta(delta_text);

    const weakrand::AdaptiveStrategy strategy = weakrand::io::parse_strategy(strategy_file.json);
    weakrand::ErasureSchedule schedule = weakrand::io::parse_schedule(schedule_file.json);
    if (schedule.delta() != delta)
        schedule = weakrand::ErasureSchedule(delta, schedule.table());  // revalidates weights against --delta

    const auto source = weakrand::run_noisy_strategy(strategy, schedule);
    const auto channels = weakrand::induced_channel_family(strategy);
    const bool verified = weakrand::is_delta_source(source, channels, delta);

    Json out = report_header("quantum", {{"strategy", &strategy_file}, {"schedule", &schedule_file}}, "float");
    out["parameters"] = Json{{"delta", weakrand::io::scalar_report(delta)}};
    Json results;
    results["reduction_verified"] = verified;
    results["observed_source"] = weakrand::io::serialize_source(source);
    results["induced_channels"] = weakrand::io::serialize_channel_family(channels);
    out["results"] = std::move(results);
    out["duration_ms"] = clock.elapsed_ms();
    emit(out, out_path);
    return verified ? kExitTrue : kExitFalse;
}

template <class T>
int run_sv(const LoadedFile& source_file, const T& delta, const std::string& out_path,
           std::size_t max_outcomes) {
    const Clock clock;
    const auto source = weakrand::io::parse_source<T>(source_file.json);
    const std::size_t required = weakrand::sequence_count(source.alphabet().full_size(), source.steps());
    if (required > max_outcomes)
        throw std::invalid_argument("simulation requires enumerating " + std::to_string(required) +
                                    " outcomes, above the cap of " + std::to_string(max_outcomes));
    const auto family = weakrand::sv_channel_family<T>(source.steps(), delta);

    Json out = report_header("sv", {{"source", &source_file}}, weakrand::NumericTraits<T>::name());
    out["parameters"] = Json{{"delta", weakrand::io::scalar_report(delta)}};
    Json results;

    const weakrand::DeltaViolation violation = weakrand::find_delta_violation(source, family, delta);
    if (violation.found) {
        results["valid_input"] = false;
        results["violation"] = Json{{"step", violation.step}, {"history", violation.history},
                                    {"symbol", violation.symbol}};
        out["results"] = std::move(results);
        out["duration_ms"] = clock.elapsed_ms();
        emit(out, out_path);
        return kExitFalse;
    }

    const auto certificate = weakrand::sv_certificate(source, delta);
    const bool is_sv = weakrand::is_sv_source(certificate.simulated, certificate.alpha);
    results["valid_input"] = true;
    results["alpha"] = weakrand::io::scalar_report(certificate.alpha);
    results["is_sv"] = is_sv;
    results["min_p0"] = weakrand::io::scalar_report(certificate.min_p0);
    results["max_p0"] = weakrand::io::scalar_report(certificate.max_p0);
    results["simulated_source"] = weakrand::io::serialize_source(certificate.simulated);
    out["results"] = std::move(results);
    out["duration_ms"] = clock.elapsed_ms();
    emit(out, out_path);
    return is_sv ? kExitTrue : kExitFalse;
}

template <class T>
int run_sample(const LoadedFile& source_file, std::uint64_t seed, int count, const std::string& out_path) {
    const Clock clock;
    const auto source = weakrand::io::parse_source<T>(source_file.json);
    Json out = report_header("sample", {{"source", &source_file}}, weakrand::NumericTraits<T>::name());
    out["parameters"] = Json{{"seed", seed}, {"count", count}};
    Json samples = Json::array();
    for (int i = 0; i < count; ++i)
        samples.push_back(weakrand::sample(source, seed + static_cast<std::uint64_t>(i)));
    out["results"] = Json{{"samples", std::move(samples)}};
    out["duration_ms"] = clock.elapsed_ms();
    emit(out, out_path);
    return kExitTrue;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"imperfect-randomness source toolkit: extractor attacks, source verification,\n"
                 "noisy quantum measurement simulation and SV-source bridging"};
    app.require_subcommand(1);

    std::string extractor_path, channels_path, source_path, strategy_path, schedule_path;
    std::string delta_text, out_path;
    std::string backend = "exact";
    std::uint64_t seed = 0;
    int count = 1;
    std::size_t max_outcomes = 1000000;

    auto* attack = app.add_subcommand("attack", "construct the strongest source against an extractor");
    attack->add_option("extractor", extractor_path, "extractor table (JSON)")->required();
    attack->add_option("channels", channels_path, "ideal channel family (JSON)")->required();
    attack->add_option("--delta", delta_text, "erasure bound, e.g. 1/5")->required();
    attack->add_option("--out", out_path, "report destination (default: stdout)");
    attack->add_option("--backend", backend, "numeric backend")->check(CLI::IsMember({"exact", "float"}));
    attack->add_option("--max-outcomes", max_outcomes, "enumeration cap");

    auto* verify = app.add_subcommand("verify-source", "check (delta,{Q})-source membership");
    verify->add_option("source", source_path, "adaptive source (JSON)")->required();
    verify->add_option("channels", channels_path, "ideal channel family (JSON)")->required();
    verify->add_option("--delta", delta_text, "erasure bound")->required();
    verify->add_option("--out", out_path, "report destination (default: stdout)");
    verify->add_option("--backend", backend, "numeric backend")->check(CLI::IsMember({"exact", "float"}));

    auto* quantum = app.add_subcommand("quantum", "run a noisy measurement strategy and verify the reduction");
    quantum->add_option("strategy", strategy_path, "adaptive strategy (JSON)")->required();
    quantum->add_option("schedule", schedule_path, "erasure schedule (JSON)")->required();
    quantum->add_option("--delta", delta_text, "erasure bound")->required();
    quantum->add_option("--out", out_path, "report destination (default: stdout)");

    auto* sv = app.add_subcommand("sv", "simulate a Santha-Vazirani source from a valid source");
    sv->add_option("source", source_path, "adaptive source (JSON)")->required();
    sv->add_option("--delta", delta_text, "erasure bound")->required();
    sv->add_option("--out", out_path, "report destination (default: stdout)");
    sv->add_option("--backend", backend, "numeric backend")->check(CLI::IsMember({"exact", "float"}));

    auto* sampler = app.add_subcommand("sample", "draw sequences from a source");
    sampler->add_option("source", source_path, "adaptive source (JSON)")->required();
    sampler->add_option("--seed", seed, "deterministic seed")->required();
    sampler->add_option("--count", count, "number of sequences");
    sampler->add_option("--out", out_path, "report destination (default: stdout)");
    sampler->add_option("--backend", backend, "numeric backend")->check(CLI::IsMember({"exact", "float"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (attack->parsed())
            return run_attack(extractor_path, channels_path, delta_text, out_path, backend, max_outcomes);
        if (verify->parsed()) {
            const LoadedFile source_file = load(source_path);
            const LoadedFile channels_file = load(channels_path);
            if (backend == "float")
                return run_verify_source<double>(source_file, channels_file, parse_float_delta(delta_text),
                                                 out_path);
            return run_verify_source<Rational>(source_file, channels_file, parse_exact_delta(delta_text), out_path);
        }
        if (quantum->parsed()) return run_quantum(strategy_path, schedule_path, delta_text, out_path);
        if (sv->parsed()) {
            const LoadedFile source_file = load(source_path);
            if (backend == "float") return run_sv<double>(source_file, parse_float_delta(delta_text), out_path);
            return run_sv<Rational>(source_file, parse_exact_delta(delta_text), out_path);
        }
        if (sampler->parsed()) {
            const LoadedFile source_file = load(source_path);
            if (backend == "float") return run_sample<double>(source_file, seed, count, out_path);
            return run_sample<Rational>(source_file, seed, count, out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
