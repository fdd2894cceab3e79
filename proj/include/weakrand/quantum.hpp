#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "weakrand/alphabet.hpp"
#include "weakrand/distribution.hpp"
#include "weakrand/source.hpp"

namespace weakrand {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Validity tolerance for quantum-side checks (hermiticity, positivity,
/// traces, completeness).
inline constexpr double kQuantumTol = 1e-9;
/// Outcome probabilities below this guard are treated as zero before
/// renormalizing post-states.
inline constexpr double kRenormGuard = 1e-12;

/// Positive semidefinite, trace-one operator describing a quantum state.
class DensityOperator {
  public:
    explicit DensityOperator(Matrix matrix) : matrix_(std::move(matrix)) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
            throw std::invalid_argument("density operator must be a nonempty square matrix");
        if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kQuantumTol)
            throw std::invalid_argument("density operator is not Hermitian");
        if (std::abs(matrix_.trace().real() - 1.0) > kQuantumTol || std::abs(matrix_.trace().imag()) > kQuantumTol)
            throw std::invalid_argument("density operator trace is not 1");
        Eigen::SelfAdjointEigenSolver<Matrix> eigen(matrix_);
        if (eigen.eigenvalues().minCoeff() < -kQuantumTol)
            throw std::invalid_argument("density operator is not positive semidefinite");
    }

    static DensityOperator pure(const Vector& psi) {
        const double norm = psi.norm();
        if (std::abs(norm - 1.0) > kQuantumTol) throw std::invalid_argument("state vector is not normalized");
        return DensityOperator(psi * psi.adjoint());
    }

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }

  private:
    Matrix matrix_;
};

/// A quantum operation with classical outcomes: operators E_{x,u} indexed by
/// the observed symbol x and a hidden index u, complete in the sense
/// sum E'E = identity.
class KrausFamily {
  public:
    KrausFamily(std::string observed_symbols, std::map<char, std::vector<Matrix>> operators)
        : observed_(std::move(observed_symbols)), operators_(std::move(operators)) {
        if (observed_.empty()) throw std::invalid_argument("operation needs at least one observed outcome");
        dim_ = -1;
        for (char x : observed_) {
            auto it = operators_.find(x);
            if (it == operators_.end() || it->second.empty())
                throw std::invalid_argument(std::string("no operators for observed outcome '") + x + "'");
            for (const Matrix& e : it->second) {
                if (e.rows() != e.cols()) throw std::invalid_argument("Kraus operators must be square");
                if (dim_ < 0) dim_ = static_cast<int>(e.rows());
                if (e.rows() != dim_) throw std::invalid_argument("Kraus operators disagree on dimension");
            }
        }
        if (operators_.size() != observed_.size())
            throw std::invalid_argument("operator table and observed symbols disagree");
        Matrix total = Matrix::Zero(dim_, dim_);
        for (char x : observed_)
            for (const Matrix& e : operators_.at(x)) total += e.adjoint() * e;
        if ((total - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > kQuantumTol)
            throw std::invalid_argument("Kraus family is not complete (sum E'E != id)");
    }

    int dim() const { return dim_; }
    const std::string& observed_symbols() const { return observed_; }
    const std::vector<Matrix>& operators(char x) const {
        auto it = operators_.find(x);
        if (it == operators_.end())
            throw std::out_of_range(std::string("observed outcome '") + x + "' not in operation");
        return it->second;
    }

    /// Unconditional post-state sum_{x,u} E rho E' (classical outcome ignored).
    Matrix collapse(const Matrix& rho) const {
        Matrix out = Matrix::Zero(dim_, dim_);
        for (char x : observed_)
            for (const Matrix& e : operators_.at(x)) out += e * rho * e.adjoint();
        return out;
    }

  private:
    std::string observed_;
    std::map<char, std::vector<Matrix>> operators_;
    int dim_ = 0;
};

/// Result of applying an operation to a state: the outcome law, the
/// renormalized post-state per outcome, and the set of outcomes whose
/// probability was below the renormalization guard (their post-state is the
/// input state, unchanged).
struct MeasurementResult {
    Distribution<double> outcome_law;
    std::map<char, DensityOperator> post_states;
    std::set<char> degenerate_outcomes;
};

inline MeasurementResult apply_operation(const DensityOperator& rho, const KrausFamily& op) {
    if (rho.dim() != op.dim()) throw std::invalid_argument("state/operation dimension mismatch");
    std::vector<std::string> outcomes;
    std::vector<double> probs;
    std::map<char, DensityOperator> posts;
    std::set<char> degenerate;
    for (char x : op.observed_symbols()) {
        Matrix branch = Matrix::Zero(rho.dim(), rho.dim());
        for (const Matrix& e : op.operators(x)) branch += e * rho.matrix() * e.adjoint();
        double p = branch.trace().real();
        if (p < 0.0 && p > -kQuantumTol) p = 0.0;
        outcomes.emplace_back(1, x);
        probs.push_back(p);
        if (p > kRenormGuard) {
            posts.emplace(x, DensityOperator(branch / p));
        } else {
            posts.emplace(x, rho);
            degenerate.insert(x);
        }
    }
    return MeasurementResult{Distribution<double>(std::move(outcomes), std::move(probs)), std::move(posts),
                             std::move(degenerate)};
}

/// Builds the preparation operation E_{z,i} = sqrt(P_Z(z)) |psi_z><i| that
/// maps every input state to the ensemble state sum_z P_Z(z) |psi_z><psi_z|.
/// Observed outcomes are labelled by `labels` (one symbol per ensemble
/// member); the basis index i is the hidden outcome.
inline KrausFamily prepare_state_operation(const std::vector<std::pair<double, Vector>>& ensemble,
                                           const std::vector<Vector>& basis, const std::string& labels) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    if (labels.size() != ensemble.size()) throw std::invalid_argument("one label per ensemble member required");
    const auto dim = static_cast<Eigen::Index>(basis.size());
    if (dim == 0) throw std::invalid_argument("empty basis");
    double total = 0.0;
    for (const auto& [p, psi] : ensemble) {
        if (p < -kQuantumTol) throw std::invalid_argument("negative ensemble probability");
        if (psi.size() != dim) throw std::invalid_argument("ensemble state dimension mismatch");
        if (std::abs(psi.norm() - 1.0) > kQuantumTol)
            throw std::invalid_argument("ensemble states must be unit vectors");
        total += p;
    }
    if (std::abs(total - 1.0) > kQuantumTol) throw std::invalid_argument("ensemble probabilities must sum to 1");
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (basis[static_cast<std::size_t>(i)].size() != dim)
            throw std::invalid_argument("basis vector dimension mismatch");
        for (Eigen::Index j = 0; j < dim; ++j) {
            const Complex ip = basis[static_cast<std::size_t>(i)].dot(basis[static_cast<std::size_t>(j)]);
            if (std::abs(ip - (i == j ? Complex(1, 0) : Complex(0, 0))) > kQuantumTol)
                throw std::invalid_argument("basis is not orthonormal");
        }
    }
    std::map<char, std::vector<Matrix>> operators;
    for (std::size_t z = 0; z < ensemble.size(); ++z) {
        const double amp = std::sqrt(std::max(ensemble[z].first, 0.0));
        std::vector<Matrix> per_u;
        per_u.reserve(static_cast<std::size_t>(dim));
        for (Eigen::Index i = 0; i < dim; ++i)
            per_u.push_back(amp * ensemble[z].second * basis[static_cast<std::size_t>(i)].adjoint());
        operators.emplace(labels[z], std::move(per_u));
    }
    return KrausFamily(labels, std::move(operators));
}

/// Resource caps for strategy evaluation; desk scale by default.
struct StrategyLimits {
    int max_dim = 8;
    int max_steps = 4;
};

/// Adaptive measurement strategy: a fixed initial state and, for every step
/// and every observed history (erasures included), the operation to apply.
class AdaptiveStrategy {
  public:
    AdaptiveStrategy(ErasureAlphabet alphabet, DensityOperator initial,
                     std::vector<std::map<std::string, KrausFamily>> steps, StrategyLimits limits = {})
        : alphabet_(std::move(alphabet)), initial_(std::move(initial)), steps_(std::move(steps)) {
        if (steps_.empty()) throw std::invalid_argument("strategy needs at least one step");
        if (static_cast<int>(steps_.size()) > limits.max_steps)
            throw std::invalid_argument("strategy exceeds the step cap of " + std::to_string(limits.max_steps));
        if (initial_.dim() > limits.max_dim)
            throw std::invalid_argument("strategy exceeds the dimension cap of " + std::to_string(limits.max_dim));
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            for (const auto& h : all_sequences(alphabet_.full(), static_cast<int>(i))) {
                auto it = steps_[i].find(h);
                if (it == steps_[i].end())
                    throw std::invalid_argument("strategy misses operation for history '" + h + "' at step " +
                                                std::to_string(i + 1));
                if (it->second.dim() != initial_.dim())
                    throw std::invalid_argument("operation dimension mismatch at history '" + h + "'");
                if (it->second.observed_symbols() != alphabet_.base())
                    throw std::invalid_argument("operation outcomes must match the base alphabet");
            }
        }
    }

    int n() const { return static_cast<int>(steps_.size()); }
    int dim() const { return initial_.dim(); }
    const ErasureAlphabet& alphabet() const { return alphabet_; }
    const DensityOperator& initial_state() const { return initial_; }

    const KrausFamily& operation(int step, const std::string& history) const {
        return steps_.at(static_cast<std::size_t>(step - 1)).at(history);
    }

  private:
    ErasureAlphabet alphabet_;
    DensityOperator initial_;
    std::vector<std::map<std::string, KrausFamily>> steps_;
};

/// Adversarial erasure weights lambda in [0, delta] per (history, outcome).
/// Unlisted pairs default to zero. Weights within 1e-9 above delta (or
/// slightly negative from rounding) are clamped into range.
class ErasureSchedule {
  public:
    using WeightTable = std::vector<std::map<std::string, std::map<char, double>>>;

    ErasureSchedule(double delta, WeightTable weights) : delta_(delta), weights_(std::move(weights)) {
        if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta must lie in [0,1]");
        for (auto& per_step : weights_) {
            for (auto& [history, row] : per_step) {
                for (auto& [x, lambda] : row) {
                    if (lambda < -kQuantumTol || lambda > delta_ + kQuantumTol)
                        throw std::invalid_argument(std::string("weight for ('") + history + "', '" + x +
                                                    "') lies outside [0, delta]");
                    lambda = std::min(std::max(lambda, 0.0), delta_);
                }
            }
        }
    }

    static ErasureSchedule zero(double delta) { return ErasureSchedule(delta, {}); }

    double delta() const { return delta_; }

    double weight(int step, const std::string& history, char x) const {
        const auto idx = static_cast<std::size_t>(step - 1);
        if (idx >= weights_.size()) return 0.0;
        auto it = weights_[idx].find(history);
        if (it == weights_[idx].end()) return 0.0;
        auto jt = it->second.find(x);
        return jt == it->second.end() ? 0.0 : jt->second;
    }

    const WeightTable& table() const { return weights_; }

  private:
    double delta_;
    WeightTable weights_;
};

namespace detail {

/// Recursive state evaluation shared by all strategy runs: the state after
/// any history (erasures leave it unchanged) and the ideal outcome law at
/// that history. Summations run in a fixed order, so results are bitwise
/// reproducible.
struct StateTree {
    // states keyed by history over the full alphabet, per prefix length
    std::vector<std::map<std::string, Matrix>> states;
    // ideal channel rows Q(. | history)
    std::vector<std::map<std::string, Distribution<double>>> channels;
};

inline StateTree evaluate_states(const AdaptiveStrategy& strategy) {
    StateTree tree;
    const int n = strategy.n();
    tree.states.resize(static_cast<std::size_t>(n) + 1);
    tree.channels.resize(static_cast<std::size_t>(n));
    tree.states[0].emplace("", strategy.initial_state().matrix());
    const std::string& base = strategy.alphabet().base();
    for (int i = 1; i <= n; ++i) {
        for (const auto& [history, rho] : tree.states[static_cast<std::size_t>(i - 1)]) {
            const KrausFamily& op = strategy.operation(i, history);
            std::vector<std::string> outcomes;
            std::vector<double> probs;
            for (char x : base) {
                Matrix branch = Matrix::Zero(rho.rows(), rho.cols());
                for (const Matrix& e : op.operators(x)) branch += e * rho * e.adjoint();
                double q = branch.trace().real();
                if (q < 0.0 && q > -kQuantumTol) q = 0.0;
                outcomes.emplace_back(1, x);
                probs.push_back(q);
                tree.states[static_cast<std::size_t>(i)].emplace(history + x,
                                                                 q > kRenormGuard ? Matrix(branch / q) : rho);
            }
            tree.states[static_cast<std::size_t>(i)].emplace(history + ErasureAlphabet::kErased, rho);
            tree.channels[static_cast<std::size_t>(i - 1)].emplace(
                history, Distribution<double>(std::move(outcomes), std::move(probs)));
        }
    }
    return tree;
}

}  // namespace detail

/// The ideal channel family induced by a strategy: the outcome law of step i
/// at every observed history, with erased steps leaving the state untouched.
inline ChannelFamily<double> induced_channel_family(const AdaptiveStrategy& strategy) {
    detail::StateTree tree = detail::evaluate_states(strategy);
    return ChannelFamily<double>(strategy.alphabet(), std::move(tree.channels));
}

/// Joint outcome law of the noiseless run (no erasures ever occur).
inline Distribution<double> run_perfect_strategy(const AdaptiveStrategy& strategy,
                                                 std::size_t max_outcomes = 1000000) {
    const ChannelFamily<double> channels = induced_channel_family(strategy);
    const std::string& base = strategy.alphabet().base();
    const std::size_t count = sequence_count(base.size(), strategy.n());
    if (count > max_outcomes)
        throw std::invalid_argument("enumeration requires " + std::to_string(count) +
                                    " outcomes, above the cap of " + std::to_string(max_outcomes));
    std::vector<std::string> outcomes;
    std::vector<double> probs;
    outcomes.reserve(count);
    probs.reserve(count);
    std::string prefix;
    auto walk = [&](auto&& self, int depth, double acc) -> void {
        if (depth == strategy.n()) {
            outcomes.push_back(prefix);
            probs.push_back(acc);
            return;
        }
        const Distribution<double>& row = channels.conditional(depth + 1, prefix);
        for (char c : base) {
            prefix.push_back(c);
            self(self, depth + 1, acc * row.prob(std::string(1, c)));
            prefix.pop_back();
        }
    };
    walk(walk, 0, 1.0);
    return Distribution<double>(std::move(outcomes), std::move(probs));
}

/// The observed-output source of a noisy run: each conditional thins the
/// ideal law by (1 - lambda) per outcome and diverts the residue to the
/// erasure symbol, whose branch reuses the unchanged state.
inline AdaptiveSource<double> run_noisy_strategy(const AdaptiveStrategy& strategy,
                                                 const ErasureSchedule& schedule) {
    const ChannelFamily<double> channels = induced_channel_family(strategy);
    const auto full = strategy.alphabet().full_outcomes();
    std::vector<std::map<std::string, Distribution<double>>> steps;
    for (int i = 1; i <= strategy.n(); ++i) {
        std::map<std::string, Distribution<double>> table;
        for (const auto& [history, q] : channels.step_table(i)) {
            std::vector<double> probs;
            probs.reserve(full.size());
            double kept = 0.0;
            for (std::size_t k = 0; k < q.size(); ++k) {
                const char x = q.outcomes()[k][0];
                const double p = (1.0 - schedule.weight(i, history, x)) * q.prob_at(k);
                probs.push_back(p);
                kept += p;
            }
            probs.push_back(std::max(1.0 - kept, 0.0));
            table.emplace(history, Distribution<double>(full, std::move(probs)));
        }
        steps.push_back(std::move(table));
    }
    return AdaptiveSource<double>(strategy.alphabet(), std::move(steps));
}

/// Confirms the reduction: the observed-output source of any noisy run is a
/// (delta, {Q})-source for the strategy's induced channels.
inline bool verify_reduction(const AdaptiveStrategy& strategy, const ErasureSchedule& schedule) {
    return is_delta_source(run_noisy_strategy(strategy, schedule), induced_channel_family(strategy),
                           schedule.delta());
}

/// Recovers erasure weights realizing `target` on the given strategy:
/// lambda = 1 - P(x|history) / Q(x|history), zero where Q vanishes. Errors
/// if the target is not a (delta, {Q})-source for the induced channels.
inline ErasureSchedule schedule_from_source(const AdaptiveSource<double>& target,
                                            const AdaptiveStrategy& strategy, double delta) {
    const ChannelFamily<double> channels = induced_channel_family(strategy);
    const DeltaViolation violation = find_delta_violation(target, channels, delta);
    if (violation.found)
        throw std::invalid_argument("target is not a (delta,Q)-source for this strategy: history '" +
                                    violation.history + "', symbol '" + violation.symbol + "' at step " +
                                    std::to_string(violation.step));
    ErasureSchedule::WeightTable weights(static_cast<std::size_t>(strategy.n()));
    for (int i = 1; i <= strategy.n(); ++i) {
        for (const auto& [history, q] : channels.step_table(i)) {
            std::map<char, double> row;
            const Distribution<double>& cond = target.conditional(i, history);
            for (std::size_t k = 0; k < q.size(); ++k) {
                const char x = q.outcomes()[k][0];
                const double ideal = q.prob_at(k);
                double lambda = 0.0;
                if (ideal > kRenormGuard) lambda = 1.0 - cond.prob(q.outcomes()[k]) / ideal;
                row.emplace(x, std::min(std::max(lambda, 0.0), delta));
            }
            weights[static_cast<std::size_t>(i - 1)].emplace(history, std::move(row));
        }
    }
    return ErasureSchedule(delta, std::move(weights));
}

}  // namespace weakrand
