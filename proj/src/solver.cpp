#include "svi/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "svi/error.hpp"

namespace svi {

namespace {

// "F = 0" in the rest test, and the degenerate denominator of the mixing
// coefficient, are both decided relative to the magnitudes involved.
constexpr double kRestTol = 1e-14;
constexpr double kDegenerateTol = 1e-14;

class Stopwatch {
public:
    using clock = std::chrono::steady_clock;

    void resume() { started_ = clock::now(); }
    void pause() { total_ += clock::now() - started_; }
    double seconds() const { return std::chrono::duration<double>(total_).count(); }

private:
    clock::time_point started_{};
    clock::duration total_{};
};

}  // namespace

ScheduleSpec ScheduleSpec::quadratic(std::uint64_t n_factor, double lambda, double b) {
    return {Kind::Quadratic, n_factor, lambda, b, std::nullopt};
}

ScheduleSpec ScheduleSpec::linear(std::uint64_t n_factor, double lambda, double b) {
    return {Kind::Linear, n_factor, lambda, b, std::nullopt};
}

void ScheduleSpec::validate() const {
    if (n_factor == 0) throw Error(ErrorCode::ConfigError, "schedule factor must be >= 1");
    if (!(b > 0.0)) throw Error(ErrorCode::ConfigError, "schedule exponent b must be positive");
    if (kind == Kind::Quadratic && !(lambda > 2.0))
        throw Error(ErrorCode::ConfigError, "quadratic schedule requires lambda > 2");
    // ln(k + lambda) must be positive at k = 0.
    if (kind == Kind::Linear && !(lambda > 1.0))
        throw Error(ErrorCode::ConfigError, "linear schedule requires lambda > 1");
    if (cap && *cap == 0) throw Error(ErrorCode::ConfigError, "schedule cap must be >= 1");
}

std::uint64_t sample_schedule(const ScheduleSpec& spec, std::uint64_t k) {
    const double s = static_cast<double>(k) + spec.lambda;
    const double base = spec.kind == ScheduleSpec::Kind::Quadratic ? s * s * std::pow(std::log(s), 2.0 + 2.0 * spec.b)
                                                                   : s * std::pow(std::log(s), 1.0 + spec.b);
    const auto size = spec.n_factor * static_cast<std::uint64_t>(std::ceil(base));
    return spec.cap ? std::min(size, *spec.cap) : size;
}

void SolverConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
    if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0, 1)");
    if (!(mu > 0.0 && mu < std::sqrt(3.0) / 3.0)) fail("mu must lie in (0, sqrt(3)/3)");
    if (!(nu >= 0.0)) fail("nu must be nonnegative");
    if (!(tau > 0.5)) fail("tau must exceed 1/2");
    if (!(safeguard_cap > 0.0)) fail("safeguard cap M must be positive");
    if (!(stop.residual_tol >= 0.0)) fail("residual tolerance must be nonnegative");
    schedule.validate();
}

std::string_view to_string(Branch b) noexcept {
    switch (b) {
        case Branch::Rest: return "rest";
        case Branch::Anderson: return "anderson";
        case Branch::Seg: return "seg";
    }
    return "?";
}

std::string_view to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIters: return "max_iters";
        case SolveStatus::Stalled: return "stalled";
    }
    return "?";
}

LineSearchResult line_search(const StochasticProblem& problem, const SampleBatch& batch_xi, const Vector& x,
                             const SolverConfig& cfg) {
    return line_search(problem, batch_xi, x, empirical_operator(problem, batch_xi, x), cfg);
}

LineSearchResult line_search(const StochasticProblem& problem, const SampleBatch& batch_xi, const Vector& x,
                             const Vector& h_x, const SolverConfig& cfg) {
    if (batch_xi.size() == 0) throw Error(ErrorCode::EmptyBatch, "line search needs a nonempty batch");
    double t = cfg.gamma;
    for (std::uint64_t m = 0;; ++m) {
        Vector y = problem.set().project(x - t * h_x);
        const Vector h_y = empirical_operator(problem, batch_xi, y);
        if (t * (h_x - h_y).norm() <= cfg.mu * (x - y).norm()) return {t, std::move(y), m};
        if (m >= cfg.stop.max_backtracks)
            throw Error(ErrorCode::LineSearchStalled,
                        "no acceptable step after " + std::to_string(m) + " backtracks (t = " + std::to_string(t) + ")");
        t *= cfg.rho;
    }
}

std::optional<double> try_anderson_coefficient(const Vector& F, const Vector& Ftilde) noexcept {
    const Vector diff = Ftilde - F;
    const double denom = diff.norm();
    if (denom <= kDegenerateTol * (F.norm() + Ftilde.norm() + 1.0)) return std::nullopt;
    return Ftilde.dot(diff) / (denom * denom);
}

double anderson_coefficient(const Vector& F, const Vector& Ftilde) {
    if (F.size() != Ftilde.size()) throw Error(ErrorCode::DimensionMismatch, "residual vectors differ in length");
    auto alpha = try_anderson_coefficient(F, Ftilde);
    if (!alpha) throw Error(ErrorCode::DegenerateMixing, "Ftilde - F vanishes; mixing is undefined");
    return *alpha;
}

namespace {

// One iteration given both batches and the already-evaluated H_xi(x_k).
StepResult advance(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                   const SampleBatch& batch_xi, const SampleBatch& batch_eta, std::uint64_t S, const Vector& h_x,
                   double stop_residual, bool accelerate) {
    const Vector& x = state.x;
    const FeasibleSet& X = problem.set();

    StepResult out{state, {}};
    TraceRecord& rec = out.record;
    IterateState& next = out.state;
    rec.k = state.k;
    rec.theta = state.theta;
    rec.sample_size = S;
    rec.empirical_residual = stop_residual;
    next.k = state.k + 1;

    // Step 1: rest test.
    const Vector F_gamma = X.project(x - cfg.gamma * h_x) - x;
    if (F_gamma.norm() <= kRestTol * (1.0 + x.norm())) {
        rec.branch = Branch::Rest;
        rec.t_k = cfg.gamma;
        rec.norm_F = F_gamma.norm();
        next.oracle_calls += S;
        next.sample_evals += S;
        rec.oracle_calls_cum = next.oracle_calls;
        rec.sample_evals_cum = next.sample_evals;
        return out;
    }

    // Step 2.
    LineSearchResult ls = line_search(problem, batch_xi, x, h_x, cfg);
    rec.t_k = ls.t;
    rec.backtracks = ls.backtracks;

    // Step 3.
    const Vector F = ls.y_half - x;
    const Vector h_eta = empirical_operator(problem, batch_eta, ls.y_half);
    Vector y_next = X.project(x - ls.t * h_eta);
    const Vector Ftilde = y_next - x;
    rec.norm_F = F.norm();
    rec.norm_Ftilde = Ftilde.norm();

    const std::uint64_t trials = ls.backtracks + 1;
    next.oracle_calls += trials * S;
    next.sample_evals += (trials + 2) * S;
    rec.oracle_calls_cum = next.oracle_calls;
    rec.sample_evals_cum = next.sample_evals;

    bool take_anderson = false;
    if (accelerate) {
        const double gate = std::min(F.norm(), cfg.nu * std::pow(static_cast<double>(state.theta), -cfg.tau));
        if (Ftilde.norm() < gate) {
            rec.alpha = try_anderson_coefficient(F, Ftilde);
            // Step 4.
            take_anderson = rec.alpha && std::abs(*rec.alpha) <= cfg.safeguard_cap;
        }
    }

    if (take_anderson) {
        const double a = *rec.alpha;
        next.x = a * x + (1.0 - a) * y_next;
        next.theta = state.theta + 1;
        rec.branch = Branch::Anderson;
    } else {
        next.x = std::move(y_next);
        rec.branch = Branch::Seg;
    }
    return out;
}

StepResult step_on_batches(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                           const SampleBatch& batch_xi, const SampleBatch& batch_eta) {
    if (batch_xi.size() == 0 || batch_eta.size() == 0) throw Error(ErrorCode::EmptyBatch, "step needs both batches");
    const Vector h_x = empirical_operator(problem, batch_xi, state.x);
    const double r = (problem.set().project(state.x - h_x) - state.x).norm();
    StepResult res = advance(state, problem, cfg, batch_xi, batch_eta, batch_xi.size(), h_x, r, true);
    if (problem.has_exact_mean()) res.record.exact_residual = exact_residual(problem, state.x, cfg.gamma);
    return res;
}

SolveResult run(const StochasticProblem& problem, const SolverConfig& cfg, const Vector& x0, const RngStream& root,
                const SolveOptions& options, bool accelerate) {
    cfg.validate();
    if (static_cast<std::size_t>(x0.size()) != problem.dim())
        throw Error(ErrorCode::DimensionMismatch, "initial point length does not match problem dimension");

    SolveResult result;
    IterateState state;
    state.x = problem.set().project(x0);
    result.final_empirical_residual = std::numeric_limits<double>::quiet_NaN();
    const bool exact = options.track_exact_residual && problem.has_exact_mean();

    Stopwatch watch;
    for (;;) {
        if (state.k >= cfg.stop.max_iters) {
            result.status = SolveStatus::MaxIters;
            break;
        }
        watch.resume();
        const std::uint64_t S = sample_schedule(cfg.schedule, state.k);
        const std::string tag = std::to_string(state.k);
        RngStream xi_stream = root.split("xi/" + tag);
        RngStream eta_stream = root.split("eta/" + tag);
        const SampleBatch batch_xi = sample_batch(problem, S, xi_stream, SampleFamily::Xi);
        const SampleBatch batch_eta = sample_batch(problem, S, eta_stream, SampleFamily::Eta);

        const Vector h_x = empirical_operator(problem, batch_xi, state.x);
        const double r = (problem.set().project(state.x - h_x) - state.x).norm();
        result.final_empirical_residual = r;
        if (r < cfg.stop.residual_tol) {
            watch.pause();
            result.status = SolveStatus::Converged;
            break;
        }

        StepResult res;
        try {
            res = advance(state, problem, cfg, batch_xi, batch_eta, S, h_x, r, accelerate);
        } catch (const Error& e) {
            watch.pause();
            if (e.code() != ErrorCode::LineSearchStalled) throw;
            result.status = SolveStatus::Stalled;
            break;
        }
        watch.pause();

        if (options.record_timing) res.record.elapsed_seconds = watch.seconds();
        if (exact) res.record.exact_residual = exact_residual(problem, state.x, cfg.gamma);
        if (options.observer) options.observer(res.record, res.state, batch_xi, batch_eta);
        result.trace.push_back(res.record);
        state = std::move(res.state);
    }
    result.x = std::move(state.x);
    result.theta = state.theta;
    return result;
}

}  // namespace

StepResult step(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                RngStream& stream_xi, RngStream& stream_eta) {
    cfg.validate();
    const std::uint64_t S = sample_schedule(cfg.schedule, state.k);
    const SampleBatch batch_xi = sample_batch(problem, S, stream_xi, SampleFamily::Xi);
    const SampleBatch batch_eta = sample_batch(problem, S, stream_eta, SampleFamily::Eta);
    return step_on_batches(state, problem, cfg, batch_xi, batch_eta);
}

StepResult step(const IterateState& state, const StochasticProblem& problem, const SolverConfig& cfg,
                const SampleBatch& batch_xi, const SampleBatch& batch_eta) {
    cfg.validate();
    return step_on_batches(state, problem, cfg, batch_xi, batch_eta);
}

std::uint64_t SolveResult::anderson_steps() const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : trace) n += r.branch == Branch::Anderson ? 1 : 0;
    return n;
}

SolveResult solve(const StochasticProblem& problem, const SolverConfig& cfg, const Vector& x0,
                  const RngStream& root, const SolveOptions& options) {
    return run(problem, cfg, x0, root, options, true);
}

SolveResult solve_seg(const StochasticProblem& problem, const SolverConfig& cfg, const Vector& x0,
                      const RngStream& root, const SolveOptions& options) {
    return run(problem, cfg, x0, root, options, false);
}

}  // namespace svi
