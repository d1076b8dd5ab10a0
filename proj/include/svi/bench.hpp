#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svi/portfolio.hpp"
#include "svi/problems.hpp"
#include "svi/solver.hpp"

namespace svi::bench {

enum class Family { Example1, Example2, Portfolio, CustomLcp };
enum class Algorithm { AndersonSeg, Seg };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Algorithm a) noexcept;
Family parse_family(std::string_view s);
Algorithm parse_algorithm(std::string_view s);

/// Solver settings used in the experiments: nu = 30, M = 5000, tau = 0.6,
/// rho = 0.8, mu = 0.5, stop at residual < 1e-2 or 200 iterations.
SolverConfig paper_config(double gamma, const ScheduleSpec& schedule);

struct ExperimentSpec {
    Family family = Family::Example1;
    std::size_t n = 10;
    SolverConfig solver = paper_config(0.1, ScheduleSpec::linear());
    std::vector<std::uint64_t> seeds{0};  // trial indices, each a fresh instance
    std::uint64_t base_seed = 42;
    std::vector<Algorithm> algorithms{Algorithm::AndersonSeg, Algorithm::Seg};
    std::optional<std::filesystem::path> output_dir;
    bool record_timing = true;
    std::size_t threads = 0;  // 0: SVI_THREADS or hardware concurrency

    // CustomLcp
    std::optional<LcpProblem> lcp;
    // Portfolio
    std::optional<std::filesystem::path> prices;
    portfolio::Frequency frequency = portfolio::Frequency::Weekly;
    double weight_cap = 0.2;

    void validate() const;
};

struct SummaryRow {
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::AndersonSeg;
    std::uint64_t iters = 0;
    std::uint64_t anderson_steps = 0;
    std::uint64_t backtracks_total = 0;
    std::uint64_t oracle_calls = 0;
    double cpu_seconds = 0.0;
    double final_empirical_residual = 0.0;
    SolveStatus status = SolveStatus::MaxIters;
    std::uint64_t theta_final = 1;
};

struct AlgorithmMean {
    Algorithm algorithm = Algorithm::AndersonSeg;
    std::size_t runs = 0;
    double cpu_seconds = 0.0;
    double iters = 0.0;
    double anderson_steps = 0.0;
    double oracle_calls = 0.0;
};

struct TrialRun {
    SummaryRow row;
    std::vector<TraceRecord> trace;
    Vector x_final;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;     // trial-major, algorithms in spec order
    std::vector<AlgorithmMean> means;  // one per algorithm in spec order
    std::vector<TrialRun> runs;        // same order as rows
};

/// Runs every (seed, algorithm) pair. Trials may run concurrently; results
/// are merged in (seed, algorithm) order. With an output directory set,
/// writes trace_<algo>_seed<s>.csv, instance_seed<s>.json, summary.csv and
/// summary_means.csv.
SummaryTable run_experiment(const ExperimentSpec& spec);

/// Worker count: SVI_THREADS if set, capped by hardware threads and tasks.
std::size_t worker_count(std::size_t requested, std::size_t tasks);

// ---------------------------------------------------------------------------
// CSV output. '.' decimal separator, ',' delimiter, LF line endings; reals in
// shortest round-trip form, elapsed times to the millisecond.

std::string format_real(double v);
std::string trace_csv(const std::vector<TraceRecord>& trace);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_means_csv(const std::vector<AlgorithmMean>& means);

struct TraceFile {
    std::filesystem::path path;
    std::string algorithm;
    std::uint64_t seed = 0;
};

/// Trace files named trace_<algo>_seed<s>.csv in `dir`, sorted by (algo, seed).
std::vector<TraceFile> discover_traces(const std::filesystem::path& dir);

/// Long-format merge: k,elapsed_seconds,residual,algo,seed.
std::string emit_plot_data(const std::vector<TraceFile>& traces);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json instance_json(const StochasticProblem& problem);
nlohmann::json lcp_json(const LcpProblem& lcp);
LcpProblem lcp_from_json(const nlohmann::json& j);
LcpProblem load_lcp(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Portfolio pipeline

struct PortfolioRunSpec {
    std::string data_set = "data";
    double weight_cap = 0.2;
    SolverConfig solver = [] {
        SolverConfig c = paper_config(0.1, ScheduleSpec::quadratic(2, 2.0001, 1e-4));
        c.stop.residual_tol = 0.0;  // iteration count only
        c.stop.max_iters = 2000;
        return c;
    }();
    std::uint64_t seed = 42;
    bool record_timing = true;
    std::optional<std::filesystem::path> output_dir;
};

struct PortfolioIterate {
    std::uint64_t k = 0;
    std::optional<double> sharpe;
    double cumulative = 0.0;
    double objective = 0.0;
    double empirical_residual = 0.0;
    Branch branch = Branch::Seg;
};

struct PortfolioReport {
    std::string data_set;
    std::size_t n = 0;
    std::size_t t_in = 0;
    std::size_t t_out = 0;
    portfolio::Frequency frequency = portfolio::Frequency::Weekly;
    std::optional<double> sr_naive, sr_solver;
    double ar_naive = 0.0, ar_solver = 0.0;
    double cr_naive = 0.0, cr_solver = 0.0;
    Vector weights;
    Vector naive;
    SolveStatus status = SolveStatus::MaxIters;
    std::uint64_t iterations = 0;
    std::vector<PortfolioIterate> curve;
    std::vector<TraceRecord> trace;
};

/// Splits the returns, solves the windowed LCP with Anderson(1)-SEG from the
/// naive portfolio, and scores both weight vectors out of sample.
PortfolioReport run_portfolio(const portfolio::PriceMatrix& prices, const PortfolioRunSpec& spec);

/// Loads the CSV, runs the pipeline and, with an output directory, writes
/// metrics.json, portfolio_curve.csv and trace.csv. Returns the metrics JSON.
nlohmann::json run_portfolio(const std::filesystem::path& prices_path, portfolio::Frequency frequency,
                             const PortfolioRunSpec& spec);

nlohmann::json metrics_json(const PortfolioReport& report);
std::string portfolio_curve_csv(const std::vector<PortfolioIterate>& curve);

}  // namespace svi::bench
