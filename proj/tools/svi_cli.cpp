#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svi/bench.hpp"
#include "svi/error.hpp"

namespace {

using nlohmann::json;
using namespace svi;

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
    try {
        json j;
        in >> j;
        if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config file must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("invalid config JSON: ") + e.what());
    }
}

// Value from the command line when given, else from the config file, else the default.
template <class T>
T pick(const CLI::App& app, const std::string& flag, const T& cli_value, const json& cfg, const std::string& key) {
    if (app.count(flag) > 0 || !cfg.contains(key)) return cli_value;
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "config key '" + key + "': " + e.what());
    }
}

ScheduleSpec parse_schedule(const std::string& s) {
    if (s == "quad" || s == "quadratic") return ScheduleSpec::quadratic();
    if (s == "linear") return ScheduleSpec::linear();
    throw Error(ErrorCode::ConfigError, "unknown schedule '" + s + "' (expected quad or linear)");
}

portfolio::Frequency parse_frequency(const std::string& s) {
    if (s == "weekly") return portfolio::Frequency::Weekly;
    if (s == "daily") return portfolio::Frequency::Daily;
    throw Error(ErrorCode::ConfigError, "unknown frequency '" + s + "' (expected weekly or daily)");
}

std::vector<bench::Algorithm> parse_algorithms(const std::vector<std::string>& names) {
    std::vector<bench::Algorithm> out;
    for (const auto& n : names) out.push_back(bench::parse_algorithm(n));
    return out;
}

struct BenchArgs {
    std::string family = "example1";
    std::size_t n = 10;
    double gamma = 0.1;
    std::string schedule = "linear";
    std::size_t seeds = 10;
    std::uint64_t seed = 42;
    std::string out;
    std::vector<std::string> algos{"aseg", "seg"};
    std::uint64_t max_iters = 200;
    double tol = 1e-2;
    std::size_t threads = 0;
    bool no_timing = false;
    std::string config;
};

int run_bench(const CLI::App& app, const BenchArgs& a) {
    const json cfg = read_config(a.config);
    bench::ExperimentSpec spec;
    spec.family = bench::parse_family(pick(app, "family", a.family, cfg, "family"));
    spec.n = pick(app, "--n", a.n, cfg, "n");
    const double gamma = pick(app, "--gamma", a.gamma, cfg, "gamma");
    spec.solver = bench::paper_config(gamma, parse_schedule(pick(app, "--schedule", a.schedule, cfg, "schedule")));
    spec.solver.stop.max_iters = pick(app, "--max-iters", a.max_iters, cfg, "max_iters");
    spec.solver.stop.residual_tol = pick(app, "--tol", a.tol, cfg, "tol");
    const std::size_t seeds = pick(app, "--seeds", a.seeds, cfg, "seeds");
    spec.seeds.clear();
    for (std::size_t s = 0; s < seeds; ++s) spec.seeds.push_back(s);
    spec.base_seed = pick(app, "--seed", a.seed, cfg, "seed");
    spec.algorithms = parse_algorithms(pick(app, "--algos", a.algos, cfg, "algos"));
    spec.threads = pick(app, "--threads", a.threads, cfg, "threads");
    spec.record_timing = !pick(app, "--no-timing", a.no_timing, cfg, "no_timing");
    const std::string out = pick(app, "--out", a.out, cfg, "out");
    if (!out.empty()) spec.output_dir = out;

    const bench::SummaryTable table = bench::run_experiment(spec);
    std::cout << bench::summary_means_csv(table.means);
    return 0;
}

struct PortfolioArgs {
    std::string prices;
    std::string freq = "weekly";
    std::string out;
    std::string name;
    double cap = 0.2;
    std::uint64_t max_iters = 2000;
    double gamma = 0.1;
    std::uint64_t seed = 42;
    bool no_timing = false;
    std::string config;
};

int run_portfolio_cmd(const CLI::App& app, const PortfolioArgs& a) {
    const json cfg = read_config(a.config);
    bench::PortfolioRunSpec spec;
    const std::string prices = pick(app, "--prices", a.prices, cfg, "prices");
    if (prices.empty()) throw Error(ErrorCode::ConfigError, "--prices is required");
    const std::string name = pick(app, "--name", a.name, cfg, "data_set");
    spec.data_set = name.empty() ? std::filesystem::path(prices).stem().string() : name;
    spec.weight_cap = pick(app, "--cap", a.cap, cfg, "cap");
    spec.solver.gamma = pick(app, "--gamma", a.gamma, cfg, "gamma");
    spec.solver.stop.max_iters = pick(app, "--max-iters", a.max_iters, cfg, "max_iters");
    spec.seed = pick(app, "--seed", a.seed, cfg, "seed");
    spec.record_timing = !pick(app, "--no-timing", a.no_timing, cfg, "no_timing");
    const std::string out = pick(app, "--out", a.out, cfg, "out");
    if (!out.empty()) spec.output_dir = out;

    const json metrics =
        bench::run_portfolio(prices, parse_frequency(pick(app, "--freq", a.freq, cfg, "freq")), spec);
    std::cout << metrics.dump(2) << '\n';
    return 0;
}

struct LcpArgs {
    std::string file;
    std::string algo = "aseg";
    double gamma = 0.1;
    std::uint64_t max_iters = 2000;
    double tol = 1e-8;
    std::uint64_t seed = 42;
    std::string out;
};

int run_lcp(const LcpArgs& a) {
    const LcpProblem lcp = bench::load_lcp(a.file);
    const auto problem = lcp_to_svi(lcp);
    SolverConfig cfg = bench::paper_config(a.gamma, ScheduleSpec::linear());
    cfg.schedule.cap = 1;  // deterministic operator: one evaluation per sample is exact
    cfg.stop.max_iters = a.max_iters;
    cfg.stop.residual_tol = a.tol;
    const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(lcp.side()));
    const RngStream root = RngStream::root(a.seed);
    SolveOptions opts;
    opts.record_timing = false;
    const SolveResult res = bench::parse_algorithm(a.algo) == bench::Algorithm::AndersonSeg
                                ? solve(*problem, cfg, x0, root, opts)
                                : solve_seg(*problem, cfg, x0, root, opts);
    const Vector w = lcp.M * res.x + lcp.q;
    json j = {{"algo", a.algo},
              {"status", std::string(to_string(res.status))},
              {"iterations", res.iterations()},
              {"anderson_steps", res.anderson_steps()},
              {"residual", exact_residual(*problem, res.x, 1.0)},
              {"complementarity", res.x.dot(w)},
              {"x", std::vector<double>(res.x.data(), res.x.data() + res.x.size())}};
    if (!a.out.empty()) bench::write_text(std::filesystem::path(a.out) / "trace.csv", bench::trace_csv(res.trace));
    std::cout << j.dump(2) << '\n';
    return res.status == SolveStatus::Converged ? 0 : 2;
}

int run_plot_data(const std::string& dir, const std::string& out) {
    const std::string csv = bench::emit_plot_data(bench::discover_traces(dir));
    if (out.empty())
        std::cout << csv;
    else
        bench::write_text(out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anderson(1)-accelerated stochastic extragradient solver and benchmarks"};
    app.require_subcommand(1);

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Run ASEG vs SEG on a generated problem family");
    bench_cmd->add_option("family", ba.family, "example1 or example2")->check(CLI::IsMember({"example1", "example2"}));
    bench_cmd->add_option("--n", ba.n, "Problem dimension")->capture_default_str();
    bench_cmd->add_option("--gamma", ba.gamma, "Initial step size")->capture_default_str();
    bench_cmd->add_option("--schedule", ba.schedule, "Sample-size schedule: quad or linear")->capture_default_str();
    bench_cmd->add_option("--seeds", ba.seeds, "Number of independent trials")->capture_default_str();
    bench_cmd->add_option("--seed", ba.seed, "Root seed")->capture_default_str();
    bench_cmd->add_option("--out", ba.out, "Output directory for traces and summaries");
    bench_cmd->add_option("--algos", ba.algos, "Algorithms to run (aseg, seg)")->capture_default_str();
    bench_cmd->add_option("--max-iters", ba.max_iters, "Iteration limit")->capture_default_str();
    bench_cmd->add_option("--tol", ba.tol, "Stopping residual")->capture_default_str();
    bench_cmd->add_option("--threads", ba.threads, "Worker threads (0: SVI_THREADS or all cores)");
    bench_cmd->add_flag("--no-timing", ba.no_timing, "Write zero timings for byte-reproducible output");
    bench_cmd->add_option("--config", ba.config, "JSON config file; explicit flags override it");

    PortfolioArgs pa;
    auto* port_cmd = app.add_subcommand("portfolio", "Mean-variance portfolio from a price CSV");
    port_cmd->add_option("--prices", pa.prices, "Price CSV: header of tickers, one row per period");
    port_cmd->add_option("--freq", pa.freq, "weekly or daily")->capture_default_str();
    port_cmd->add_option("--out", pa.out, "Output directory");
    port_cmd->add_option("--name", pa.name, "Data set name in the metrics (default: file stem)");
    port_cmd->add_option("--cap", pa.cap, "Per-asset weight cap")->capture_default_str();
    port_cmd->add_option("--gamma", pa.gamma, "Initial step size")->capture_default_str();
    port_cmd->add_option("--max-iters", pa.max_iters, "Iteration count")->capture_default_str();
    port_cmd->add_option("--seed", pa.seed, "Root seed")->capture_default_str();
    port_cmd->add_flag("--no-timing", pa.no_timing, "Write zero timings");
    port_cmd->add_option("--config", pa.config, "JSON config file; explicit flags override it");

    LcpArgs la;
    auto* lcp_cmd = app.add_subcommand("lcp", "Solve LCP(q, M) read from a JSON file {\"M\": [[...]], \"q\": [...]}");
    lcp_cmd->add_option("--file", la.file, "LCP JSON file")->required();
    lcp_cmd->add_option("--algo", la.algo, "aseg or seg")->capture_default_str();
    lcp_cmd->add_option("--gamma", la.gamma, "Initial step size")->capture_default_str();
    lcp_cmd->add_option("--max-iters", la.max_iters, "Iteration limit")->capture_default_str();
    lcp_cmd->add_option("--tol", la.tol, "Stopping residual")->capture_default_str();
    lcp_cmd->add_option("--seed", la.seed, "Root seed")->capture_default_str();
    lcp_cmd->add_option("--out", la.out, "Directory for trace.csv");

    std::string plot_dir, plot_out;
    auto* plot_cmd = app.add_subcommand("plot-data", "Merge trace CSVs into one long-format table");
    plot_cmd->add_option("--dir", plot_dir, "Directory holding trace_<algo>_seed<s>.csv")->required();
    plot_cmd->add_option("--out", plot_out, "Output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench_cmd) return run_bench(*bench_cmd, ba);
        if (*port_cmd) return run_portfolio_cmd(*port_cmd, pa);
        if (*lcp_cmd) return run_lcp(la);
        if (*plot_cmd) return run_plot_data(plot_dir, plot_out);
    } catch (const svi::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
