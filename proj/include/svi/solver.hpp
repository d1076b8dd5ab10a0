#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "svi/problem.hpp"

namespace svi {

/// Sample-size schedule S_k.
///   Quadratic: N * ceil((k + lambda)^2 * ln(k + lambda)^(2 + 2b))
///   Linear:    N * ceil((k + lambda)   * ln(k + lambda)^(1 + b))
/// followed by min(., cap) when a cap is set.
struct ScheduleSpec {
    enum class Kind { Quadratic, Linear };

    Kind kind = Kind::Quadratic;
    std::uint64_t n_factor = 2;
    double lambda = 2.0001;
    double b = 1e-4;
    std::optional<std::uint64_t> cap;

    static ScheduleSpec quadratic(std::uint64_t n_factor = 2, double lambda = 2.0001, double b = 1e-4);
    static ScheduleSpec linear(std::uint64_t n_factor = 20, double lambda = 5.0, double b = 0.1);

    void validate() const;
};

std::uint64_t sample_schedule(const ScheduleSpec& spec, std::uint64_t k);

struct StopRule {
    double residual_tol = 1e-2;
    std::uint64_t max_iters = 200;
    std::uint64_t max_backtracks = 200;
};

struct SolverConfig {
    double gamma = 0.1;
    double rho = 0.8;
    double mu = 0.5;
    double nu = 30.0;
    double tau = 0.6;
    double safeguard_cap = 5000.0;  // M
    ScheduleSpec schedule = ScheduleSpec::linear();
    StopRule stop;

    /// Throws ConfigError unless gamma in (0,1], rho in (0,1), mu in (0, sqrt(3)/3),
    /// nu >= 0, tau > 1/2, M > 0 and the schedule is valid.
    void validate() const;
};

enum class Branch { Rest, Anderson, Seg };
std::string_view to_string(Branch b) noexcept;

struct IterateState {
    Vector x;
    std::uint64_t theta = 1;
    std::uint64_t k = 0;
    std::uint64_t oracle_calls = 0;  // sum of (1 + m_k) S_k
    std::uint64_t sample_evals = 0;  // every T(xi, x) evaluation actually made
};

struct TraceRecord {
    std::uint64_t k = 0;
    Branch branch = Branch::Seg;
    std::uint64_t theta = 1;  // theta_k at the start of the iteration
    double t_k = 0.0;
    std::uint64_t backtracks = 0;
    std::uint64_t sample_size = 0;
    std::optional<double> alpha;
    double norm_F = 0.0;
    std::optional<double> norm_Ftilde;
    double empirical_residual = 0.0;
    std::optional<double> exact_residual;  // r_gamma(x_k) when H is known
    std::uint64_t oracle_calls_cum = 0;
    std::uint64_t sample_evals_cum = 0;
    double elapsed_seconds = 0.0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct LineSearchResult {
    double t = 0.0;
    Vector y_half;
    std::uint64_t backtracks = 0;
};

/// Backtracking on t = gamma * rho^m until
///   t |H_xi(x) - H_xi(y)| <= mu |x - y|,   y = P_X(x - t H_xi(x)).
/// One xi-batch is reused for every trial. Throws LineSearchStalled past
/// cfg.stop.max_backtracks.
LineSearchResult line_search(const StochasticProblem& problem, const SampleBatch& batch_xi, const Vector& x,
                             const SolverConfig& cfg);
LineSearchResult line_search(const StochasticProblem& problem, const SampleBatch& batch_xi, const Vector& x,
                             const Vector& h_x, const SolverConfig& cfg);

/// alpha = <Ft, Ft - F> / |Ft - F|^2, the minimizer of |alpha F + (1 - alpha) Ft|.
/// Throws DegenerateMixing when |Ft - F| <= 1e-14 (|F| + |Ft| + 1).
double anderson_coefficient(const Vector& F, const Vector& Ftilde);
std::optional<double> try_anderson_coefficient(const Vector& F, const Vector& Ftilde) noexcept;

struct StepResult {
    IterateState state;
    TraceRecord record;
};

/// One full iteration: draws the xi- and eta-batches of size S_k from the two
/// streams and advances the state.
StepResult step(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                RngStream& stream_xi, RngStream& stream_eta);

/// Same, on batches the caller already drew.
StepResult step(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                const SampleBatch& batch_xi, const SampleBatch& batch_eta);

enum class SolveStatus { Converged, MaxIters, Stalled };
std::string_view to_string(SolveStatus s) noexcept;

using StepObserver = std::function<void(const TraceRecord& record, const IterateState& next,
                                        const SampleBatch& batch_xi, const SampleBatch& batch_eta)>;

struct SolveOptions {
    bool track_exact_residual = true;
    /// When false, elapsed_seconds stays 0 so traces are fully reproducible.
    bool record_timing = true;
    StepObserver observer;
};

struct SolveResult {
    Vector x;
    std::vector<TraceRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
    std::uint64_t theta = 1;
    /// Stopping residual of the last iterate it was evaluated at (NaN if none).
    double final_empirical_residual = 0.0;

    std::uint64_t iterations() const noexcept { return trace.size(); }
    std::uint64_t anderson_steps() const noexcept;
};

/// Anderson(1)-SEG. Iteration k draws its batches from root.split("xi/k") and
/// root.split("eta/k"), so runs are reproducible from (config, root seed).
SolveResult solve(const StochasticProblem& problem, const SolverConfig& cfg, const Vector& x0,
                  const RngStream& root, const SolveOptions& options = {});

/// Line-search SEG: the same iteration with the acceleration gate removed.
SolveResult solve_seg(const StochasticProblem& problem, const SolverConfig& cfg, const Vector& x0,
                      const RngStream& root, const SolveOptions& options = {});

}  // namespace svi
