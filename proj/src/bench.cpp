#include "svi/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "svi/error.hpp"

namespace svi::bench {

namespace fs = std::filesystem;

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::Example1: return "example1";
        case Family::Example2: return "example2";
        case Family::Portfolio: return "portfolio";
        case Family::CustomLcp: return "lcp";
    }
    return "?";
}

std::string_view to_string(Algorithm a) noexcept { return a == Algorithm::AndersonSeg ? "aseg" : "seg"; }

Family parse_family(std::string_view s) {
    if (s == "example1") return Family::Example1;
    if (s == "example2") return Family::Example2;
    if (s == "portfolio") return Family::Portfolio;
    if (s == "lcp") return Family::CustomLcp;
    throw Error(ErrorCode::ConfigError, "unknown problem family '" + std::string(s) + "'");
}

Algorithm parse_algorithm(std::string_view s) {
    if (s == "aseg") return Algorithm::AndersonSeg;
    if (s == "seg") return Algorithm::Seg;
    throw Error(ErrorCode::ConfigError, "unknown algorithm '" + std::string(s) + "' (expected aseg or seg)");
}

SolverConfig paper_config(double gamma, const ScheduleSpec& schedule) {
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.nu = 30.0;
    cfg.safeguard_cap = 5000.0;
    cfg.tau = 0.6;
    cfg.rho = 0.8;
    cfg.mu = 0.5;
    cfg.schedule = schedule;
    cfg.stop.residual_tol = 1e-2;
    cfg.stop.max_iters = 200;
    return cfg;
}

void ExperimentSpec::validate() const {
    if (seeds.empty()) throw Error(ErrorCode::ConfigError, "at least one seed is required");
    if (algorithms.empty()) throw Error(ErrorCode::ConfigError, "at least one algorithm is required");
    if ((family == Family::Example1 || family == Family::Example2) && n == 0)
        throw Error(ErrorCode::ConfigError, "dimension n must be >= 1");
    if (family == Family::CustomLcp && !lcp) throw Error(ErrorCode::ConfigError, "lcp family needs an LCP instance");
    if (family == Family::Portfolio && !prices) throw Error(ErrorCode::ConfigError, "portfolio family needs a price file");
    try {
        solver.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
}

std::size_t worker_count(std::size_t requested, std::size_t tasks) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("SVI_THREADS")) {
            std::size_t cap = 0;
            const std::string_view sv(env);
            if (std::from_chars(sv.data(), sv.data() + sv.size(), cap).ec == std::errc{} && cap > 0) n = std::min(n, cap);
        }
    }
    return std::max<std::size_t>(1, std::min(n, tasks));
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string format_millis(double seconds) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, seconds, std::chars_format::fixed, 3);
    return std::string(buf, res.ptr);
}

std::string format_opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& trace) {
    std::string out =
        "k,branch,theta,t_k,backtracks,S_k,alpha,norm_F,norm_Ftilde,empirical_residual,exact_residual,"
        "oracle_calls_cum,sample_evals_cum,elapsed_seconds\n";
    for (const auto& r : trace) {
        out += std::to_string(r.k) + ',' + std::string(to_string(r.branch)) + ',' + std::to_string(r.theta) + ',' +
               format_real(r.t_k) + ',' + std::to_string(r.backtracks) + ',' + std::to_string(r.sample_size) + ',' +
               format_opt(r.alpha) + ',' + format_real(r.norm_F) + ',' + format_opt(r.norm_Ftilde) + ',' +
               format_real(r.empirical_residual) + ',' + format_opt(r.exact_residual) + ',' +
               std::to_string(r.oracle_calls_cum) + ',' + std::to_string(r.sample_evals_cum) + ',' +
               format_millis(r.elapsed_seconds) + '\n';
    }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out =
        "seed,algo,iters,anderson_steps,backtracks_total,oracle_calls,cpu_seconds,final_empirical_residual,status\n";
    for (const auto& r : rows) {
        out += std::to_string(r.seed) + ',' + std::string(to_string(r.algorithm)) + ',' + std::to_string(r.iters) + ',' +
               std::to_string(r.anderson_steps) + ',' + std::to_string(r.backtracks_total) + ',' +
               std::to_string(r.oracle_calls) + ',' + format_millis(r.cpu_seconds) + ',' +
               format_real(r.final_empirical_residual) + ',' + std::string(to_string(r.status)) + '\n';
    }
    return out;
}

std::string summary_means_csv(const std::vector<AlgorithmMean>& means) {
    std::string out = "algo,runs,mean_cpu_seconds,mean_iters,mean_anderson_steps,mean_oracle_calls\n";
    for (const auto& m : means) {
        out += std::string(to_string(m.algorithm)) + ',' + std::to_string(m.runs) + ',' + format_real(m.cpu_seconds) +
               ',' + format_real(m.iters) + ',' + format_real(m.anderson_steps) + ',' + format_real(m.oracle_calls) +
               '\n';
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<TraceFile> discover_traces(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoError, "trace directory not found: " + dir.string());
    static const std::regex pattern(R"(trace_(.+)_seed(\d+)\.csv)");
    std::vector<TraceFile> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        std::smatch m;
        if (entry.is_regular_file() && std::regex_match(name, m, pattern))
            files.push_back({entry.path(), m[1].str(), std::stoull(m[2].str())});
    }
    std::sort(files.begin(), files.end(), [](const TraceFile& a, const TraceFile& b) {
        return std::tie(a.algorithm, a.seed) < std::tie(b.algorithm, b.seed);
    });
    return files;
}

std::string emit_plot_data(const std::vector<TraceFile>& traces) {
    std::string out = "k,elapsed_seconds,residual,algo,seed\n";
    for (const auto& t : traces) {
        std::ifstream in(t.path, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "missing trace file " + t.path.string());
        std::string line;
        if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty trace file " + t.path.string());
        const auto header = split_line(line);
        auto column = [&](const std::string& name) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw Error(ErrorCode::IoError, t.path.string() + " lacks column " + name);
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t ck = column("k"), ce = column("elapsed_seconds"), cr = column("empirical_residual");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_line(line);
            if (cells.size() != header.size()) throw Error(ErrorCode::IoError, "malformed row in " + t.path.string());
            out += cells[ck] + ',' + cells[ce] + ',' + cells[cr] + ',' + t.algorithm + ',' + std::to_string(t.seed) + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json lcp_json(const LcpProblem& lcp) { return {{"M", matrix_json(lcp.M)}, {"q", vector_json(lcp.q)}}; }

LcpProblem lcp_from_json(const nlohmann::json& j) {
    try {
        const auto& rows = j.at("M");
        const auto& q = j.at("q");
        const auto m = static_cast<Eigen::Index>(q.size());
        LcpProblem lcp{Matrix(m, m), Vector(m)};
        if (static_cast<Eigen::Index>(rows.size()) != m)
            throw Error(ErrorCode::DimensionMismatch, "LCP matrix row count does not match q");
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != m)
                throw Error(ErrorCode::DimensionMismatch, "LCP matrix row " + std::to_string(i) + " has the wrong length");
            for (Eigen::Index k = 0; k < m; ++k) lcp.M(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
            lcp.q[i] = q.at(static_cast<std::size_t>(i)).get<double>();
        }
        lcp.validate();
        return lcp;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("malformed LCP JSON: ") + e.what());
    }
}

LcpProblem load_lcp(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open LCP file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
    return lcp_from_json(j);
}

nlohmann::json instance_json(const StochasticProblem& problem) {
    if (const auto* p = dynamic_cast<const ScpProblem*>(&problem))
        return {{"family", "example1"}, {"n", p->n()}, {"B", matrix_json(p->B())}};
    if (const auto* p = dynamic_cast<const FractionalProblem*>(&problem))
        return {{"family", "example2"}, {"n", p->dim()},          {"U", matrix_json(p->U())},
                {"c", vector_json(p->c())}, {"r", vector_json(p->r())}, {"d", p->d()}};
    if (const auto* p = dynamic_cast<const LcpSviProblem*>(&problem)) {
        nlohmann::json j = lcp_json(p->lcp());
        j["family"] = "lcp";
        j["deterministic"] = p->has_exact_mean();
        return j;
    }
    if (const auto* p = dynamic_cast<const portfolio::WindowedPortfolioProblem*>(&problem))
        return {{"family", "portfolio"},
                {"assets", p->assets()},
                {"T_in", p->in_sample().rows()},
                {"upper", vector_json(p->upper())},
                {"window_convention", "eta rows 1..S; xi rows T_in/2..T_in/2+S (1-based, inclusive)"}};
    return {{"family", problem.name()}, {"n", problem.dim()}};
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct Trial {
    std::uint64_t seed;
    std::shared_ptr<const StochasticProblem> problem;
    Vector x0;
    RngStream solver_root;
};

Trial make_trial(const ExperimentSpec& spec, const RngStream& root, std::uint64_t seed) {
    const RngStream trial = root.split("trial/" + std::to_string(seed));
    RngStream inst = trial.split("instance");
    RngStream start = trial.split("x0");
    const auto n = static_cast<Eigen::Index>(spec.n);
    switch (spec.family) {
        case Family::Example1: {
            auto p = gen_scp(spec.n, inst);
            Vector x0(n);
            for (auto& v : x0) v = start.uniform(0.0, 1.0);
            return {seed, p, x0, trial.split("solver")};
        }
        case Family::Example2: {
            auto p = gen_fractional(spec.n, inst);
            Vector x0(n);
            for (auto& v : x0) v = start.uniform(0.0, 4.0);
            return {seed, p, x0, trial.split("solver")};
        }
        case Family::CustomLcp: {
            auto p = lcp_to_svi(*spec.lcp);
            return {seed, p, Vector::Zero(static_cast<Eigen::Index>(p->dim())), trial.split("solver")};
        }
        case Family::Portfolio: {
            const auto prices = portfolio::load_prices(*spec.prices, spec.frequency);
            const auto split = portfolio::split_returns(portfolio::log_returns(prices));
            const auto assets = static_cast<std::size_t>(split.in_sample.cols());
            const double cap = std::max(spec.weight_cap, 1.0 / static_cast<double>(assets));
            auto p = std::make_shared<portfolio::WindowedPortfolioProblem>(
                split.in_sample, Vector::Constant(static_cast<Eigen::Index>(assets), cap));
            Vector x0 = Vector::Zero(static_cast<Eigen::Index>(p->dim()));
            x0.head(static_cast<Eigen::Index>(assets)) = portfolio::naive_weights(assets);
            return {seed, p, x0, trial.split("solver")};
        }
    }
    throw Error(ErrorCode::ConfigError, "unsupported family");
}

TrialRun run_one(const Trial& trial, Algorithm algo, const SolverConfig& cfg, bool record_timing) {
    SolveOptions opts;
    opts.record_timing = record_timing;
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res = algo == Algorithm::AndersonSeg ? solve(*trial.problem, cfg, trial.x0, trial.solver_root, opts)
                                                     : solve_seg(*trial.problem, cfg, trial.x0, trial.solver_root, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrialRun run;
    SummaryRow& row = run.row;
    row.seed = trial.seed;
    row.algorithm = algo;
    row.iters = res.iterations();
    row.anderson_steps = res.anderson_steps();
    for (const auto& r : res.trace) row.backtracks_total += r.backtracks;
    row.oracle_calls = res.trace.empty() ? 0 : res.trace.back().oracle_calls_cum;
    row.cpu_seconds = record_timing ? secs : 0.0;
    row.final_empirical_residual = res.final_empirical_residual;
    row.status = res.status;
    row.theta_final = res.theta;
    run.trace = std::move(res.trace);
    run.x_final = std::move(res.x);
    return run;
}

}  // namespace

SummaryTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const RngStream root = RngStream::root(spec.base_seed);

    SolverConfig cfg = spec.solver;
    std::vector<Trial> trials;
    trials.reserve(spec.seeds.size());
    for (auto seed : spec.seeds) trials.push_back(make_trial(spec, root, seed));
    if (spec.family == Family::Portfolio) {
        const auto* p = static_cast<const portfolio::WindowedPortfolioProblem*>(trials.front().problem.get());
        const auto half = static_cast<std::uint64_t>(p->max_window());
        cfg.schedule.cap = cfg.schedule.cap ? std::min(*cfg.schedule.cap, half) : half;
    }

    const std::size_t n_algos = spec.algorithms.size();
    const std::size_t n_tasks = trials.size() * n_algos;
    std::vector<TrialRun> runs(n_tasks);
    std::vector<std::exception_ptr> errors(n_tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
            try {
                runs[i] = run_one(trials[i / n_algos], spec.algorithms[i % n_algos], cfg, spec.record_timing);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = worker_count(spec.threads, n_tasks);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SummaryTable table;
    for (auto& r : runs) table.rows.push_back(r.row);
    for (std::size_t a = 0; a < n_algos; ++a) {
        AlgorithmMean m;
        m.algorithm = spec.algorithms[a];
        for (std::size_t t = 0; t < trials.size(); ++t) {
            const auto& row = runs[t * n_algos + a].row;
            ++m.runs;
            m.cpu_seconds += row.cpu_seconds;
            m.iters += static_cast<double>(row.iters);
            m.anderson_steps += static_cast<double>(row.anderson_steps);
            m.oracle_calls += static_cast<double>(row.oracle_calls);
        }
        const auto k = static_cast<double>(m.runs);
        m.cpu_seconds /= k;
        m.iters /= k;
        m.anderson_steps /= k;
        m.oracle_calls /= k;
        table.means.push_back(m);
    }

    if (spec.output_dir) {
        const fs::path& dir = *spec.output_dir;
        for (const auto& t : trials)
            write_text(dir / ("instance_seed" + std::to_string(t.seed) + ".json"), instance_json(*t.problem).dump(1) + "\n");
        for (const auto& r : runs)
            write_text(dir / ("trace_" + std::string(to_string(r.row.algorithm)) + "_seed" + std::to_string(r.row.seed) +
                              ".csv"),
                       trace_csv(r.trace));
        write_text(dir / "summary.csv", summary_csv(table.rows));
        write_text(dir / "summary_means.csv", summary_means_csv(table.means));
    }
    table.runs = std::move(runs);
    return table;
}

// ---------------------------------------------------------------------------
// Portfolio

PortfolioReport run_portfolio(const portfolio::PriceMatrix& prices, const PortfolioRunSpec& spec) {
    using namespace portfolio;
    const ReturnsSplit split = split_returns(log_returns(prices));
    const auto n = split.in_sample.cols();
    const auto assets = static_cast<std::size_t>(n);
    // With fewer than 1/cap assets the capped simplex is empty; fall back to
    // the loosest cap that keeps it nonempty.
    const double cap = std::max(spec.weight_cap, 1.0 / static_cast<double>(assets));
    const WindowedPortfolioProblem problem(split.in_sample, Vector::Constant(n, cap));

    SolverConfig cfg = spec.solver;
    const auto half = static_cast<std::uint64_t>(problem.max_window());
    cfg.schedule.cap = cfg.schedule.cap ? std::min(*cfg.schedule.cap, half) : half;

    const Matrix sigma_in = sample_covariance(split.in_sample);
    const Vector rho_in = split.in_sample.colwise().mean().transpose();

    PortfolioReport rep;
    rep.data_set = spec.data_set;
    rep.n = assets;
    rep.t_in = static_cast<std::size_t>(split.in_sample.rows());
    rep.t_out = static_cast<std::size_t>(split.out_of_sample.rows());
    rep.frequency = prices.frequency;

    auto try_sharpe = [&](const Vector& w) -> std::optional<double> {
        try {
            return sharpe(w, split.out_of_sample);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateVariance) throw;
            return std::nullopt;
        }
    };

    rep.naive = naive_weights(assets);
    rep.sr_naive = try_sharpe(rep.naive);
    const Returns naive_ret = cumulative_and_annualized(rep.naive, split.out_of_sample, prices.frequency);
    rep.cr_naive = naive_ret.cumulative;
    rep.ar_naive = naive_ret.annualized;

    Vector x0 = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
    x0.head(n) = rep.naive;
    SolveOptions opts;
    opts.record_timing = spec.record_timing;
    opts.observer = [&](const TraceRecord& rec, const IterateState& next, const SampleBatch&, const SampleBatch&) {
        const Vector w = next.x.head(n);
        rep.curve.push_back({rec.k, try_sharpe(w), cumulative_and_annualized(w, split.out_of_sample, prices.frequency).cumulative,
                             mean_variance_objective(w, sigma_in, rho_in), rec.empirical_residual, rec.branch});
    };
    SolveResult res = solve(problem, cfg, x0, RngStream::root(spec.seed).split("portfolio"), opts);

    rep.weights = res.x.head(n);
    rep.sr_solver = try_sharpe(rep.weights);
    const Returns solver_ret = cumulative_and_annualized(rep.weights, split.out_of_sample, prices.frequency);
    rep.cr_solver = solver_ret.cumulative;
    rep.ar_solver = solver_ret.annualized;
    rep.status = res.status;
    rep.iterations = res.iterations();
    rep.trace = std::move(res.trace);
    return rep;
}

nlohmann::json metrics_json(const PortfolioReport& r) {
    return {
        {"data_set", r.data_set},
        {"n", r.n},
        {"T_in", r.t_in},
        {"T_out", r.t_out},
        {"SR_naive", optional_json(r.sr_naive)},
        {"SR_solver", optional_json(r.sr_solver)},
        {"AR_naive", r.ar_naive},
        {"AR_solver", r.ar_solver},
        {"CR_naive", r.cr_naive},
        {"CR_solver", r.cr_solver},
        {"weights", vector_json(r.weights)},
        {"frequency", r.frequency == portfolio::Frequency::Weekly ? "weekly" : "daily"},
        {"status", std::string(to_string(r.status))},
        {"iterations", r.iterations},
        {"window_convention", "eta rows 1..S; xi rows T_in/2..T_in/2+S (1-based, inclusive)"},
    };
}

std::string portfolio_curve_csv(const std::vector<PortfolioIterate>& curve) {
    std::string out = "k,sharpe,cumulative_return,objective,empirical_residual,branch\n";
    for (const auto& c : curve)
        out += std::to_string(c.k) + ',' + format_opt(c.sharpe) + ',' + format_real(c.cumulative) + ',' +
               format_real(c.objective) + ',' + format_real(c.empirical_residual) + ',' + std::string(to_string(c.branch)) +
               '\n';
    return out;
}

nlohmann::json run_portfolio(const fs::path& prices_path, portfolio::Frequency frequency, const PortfolioRunSpec& spec) {
    const auto prices = portfolio::load_prices(prices_path, frequency);
    const PortfolioReport rep = run_portfolio(prices, spec);
    nlohmann::json metrics = metrics_json(rep);
    if (spec.output_dir) {
        write_text(*spec.output_dir / "metrics.json", metrics.dump(2) + "\n");
        write_text(*spec.output_dir / "portfolio_curve.csv", portfolio_curve_csv(rep.curve));
        write_text(*spec.output_dir / "trace.csv", trace_csv(rep.trace));
    }
    return metrics;
}

}  // namespace svi::bench
