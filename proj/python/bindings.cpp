#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "svi/bench.hpp"
#include "svi/error.hpp"
#include "svi/feasible_set.hpp"
#include "svi/portfolio.hpp"
#include "svi/problems.hpp"
#include "svi/rng.hpp"
#include "svi/solver.hpp"

namespace py = pybind11;
using namespace svi;

namespace {

py::dict record_dict(const TraceRecord& r) {
    py::dict d;
    d["k"] = r.k;
    d["branch"] = std::string(to_string(r.branch));
    d["theta"] = r.theta;
    d["t_k"] = r.t_k;
    d["backtracks"] = r.backtracks;
    d["S_k"] = r.sample_size;
    d["alpha"] = r.alpha;
    d["norm_F"] = r.norm_F;
    d["norm_Ftilde"] = r.norm_Ftilde;
    d["empirical_residual"] = r.empirical_residual;
    d["exact_residual"] = r.exact_residual;
    d["oracle_calls_cum"] = r.oracle_calls_cum;
    d["sample_evals_cum"] = r.sample_evals_cum;
    d["elapsed_seconds"] = r.elapsed_seconds;
    return d;
}

SolverConfig make_config(double gamma, const std::string& schedule, std::uint64_t max_iters, double tol, double nu,
                         std::optional<std::uint64_t> cap) {
    ScheduleSpec s;
    if (schedule == "quad")
        s = ScheduleSpec::quadratic();
    else if (schedule == "linear")
        s = ScheduleSpec::linear();
    else
        throw Error(ErrorCode::ConfigError, "schedule must be 'quad' or 'linear'");
    s.cap = cap;
    SolverConfig cfg = bench::paper_config(gamma, s);
    cfg.stop.max_iters = max_iters;
    cfg.stop.residual_tol = tol;
    cfg.nu = nu;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Anderson(1)-accelerated stochastic extragradient solver";

    static py::exception<Error> error(m, "SviError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error;
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::class_<RngStream>(m, "RngStream")
        .def_static("root", &RngStream::root, py::arg("seed"))
        .def("split", &RngStream::split, py::arg("label"))
        .def("next_u64", &RngStream::next_u64)
        .def("uniform", &RngStream::uniform, py::arg("lo"), py::arg("hi"))
        .def("normal", &RngStream::normal, py::arg("mean"), py::arg("sd"))
        .def_property_readonly("label", &RngStream::label)
        .def_property_readonly("key", &RngStream::key);

    py::class_<FeasibleSet>(m, "FeasibleSet")
        .def_static("orthant", &FeasibleSet::orthant, py::arg("dim"))
        .def_static("box", py::overload_cast<std::size_t, double, double>(&FeasibleSet::box), py::arg("dim"),
                    py::arg("lower"), py::arg("upper"))
        .def_static("box_bounds", py::overload_cast<Vector, Vector>(&FeasibleSet::box), py::arg("lower"),
                    py::arg("upper"))
        .def_static("whole_space", &FeasibleSet::whole_space, py::arg("dim"))
        .def_property_readonly("dim", &FeasibleSet::dim)
        .def("project", &FeasibleSet::project, py::arg("x"))
        .def("contains", &FeasibleSet::contains, py::arg("x"), py::arg("tol") = 1e-12);

    py::class_<StochasticProblem, std::shared_ptr<StochasticProblem>>(m, "StochasticProblem")
        .def_property_readonly("dim", &StochasticProblem::dim)
        .def_property_readonly("name", &StochasticProblem::name)
        .def_property_readonly("has_exact_mean", &StochasticProblem::has_exact_mean)
        .def("exact_mean", &StochasticProblem::exact_mean, py::arg("x"))
        .def("project", [](const StochasticProblem& p, const Vector& x) { return p.set().project(x); })
        .def("draw", [](const StochasticProblem& p, RngStream& s) { return p.draw(s).data; })
        .def("apply", [](const StochasticProblem& p, const Vector& sample, const Vector& x) {
            return p.apply(Sample{sample}, x);
        })
        .def("exact_residual", [](const StochasticProblem& p, const Vector& x, double t) {
            return exact_residual(p, x, t);
        }, py::arg("x"), py::arg("t"))
        .def("sample_mean", [](const StochasticProblem& p, const Vector& x, std::size_t size, RngStream& s) {
            return empirical_operator(p, sample_batch(p, size, s), x);
        }, py::arg("x"), py::arg("size"), py::arg("stream"));

    py::class_<ScpProblem, StochasticProblem, std::shared_ptr<ScpProblem>>(m, "ScpProblem")
        .def(py::init<Matrix>(), py::arg("B"))
        .def_property_readonly("B", &ScpProblem::B);
    py::class_<FractionalProblem, StochasticProblem, std::shared_ptr<FractionalProblem>>(m, "FractionalProblem")
        .def(py::init<Matrix, Vector, Vector, double>(), py::arg("U"), py::arg("c"), py::arg("r"), py::arg("d"))
        .def("objective", [](const FractionalProblem& p, const Vector& sample, const Vector& x) {
            return p.objective(Sample{sample}, x);
        });
    py::class_<LcpSviProblem, StochasticProblem, std::shared_ptr<LcpSviProblem>>(m, "LcpSviProblem");

    m.def("gen_scp", &gen_scp, py::arg("n"), py::arg("stream"));
    m.def("gen_fractional", &gen_fractional, py::arg("n"), py::arg("stream"));
    m.def("lcp_to_svi", [](const Matrix& M, const Vector& q) { return lcp_to_svi(LcpProblem{M, q}); }, py::arg("M"),
          py::arg("q"));
    m.def("brute_force_lcp", [](const Matrix& M, const Vector& q) { return brute_force_lcp(LcpProblem{M, q}); },
          py::arg("M"), py::arg("q"));

    m.def("sample_schedule", [](const std::string& kind, std::uint64_t k) {
        return sample_schedule(kind == "quad" ? ScheduleSpec::quadratic() : ScheduleSpec::linear(), k);
    }, py::arg("kind"), py::arg("k"));
    m.def("anderson_coefficient", &anderson_coefficient, py::arg("F"), py::arg("Ftilde"));

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("x", &SolveResult::x)
        .def_readonly("theta", &SolveResult::theta)
        .def_readonly("final_empirical_residual", &SolveResult::final_empirical_residual)
        .def_property_readonly("status", [](const SolveResult& r) { return std::string(to_string(r.status)); })
        .def_property_readonly("iterations", &SolveResult::iterations)
        .def_property_readonly("anderson_steps", &SolveResult::anderson_steps)
        .def_property_readonly("trace", [](const SolveResult& r) {
            py::list out;
            for (const auto& rec : r.trace) out.append(record_dict(rec));
            return out;
        });

    auto solve_fn = [](bool accelerate) {
        return [accelerate](const StochasticProblem& p, const Vector& x0, std::uint64_t seed, double gamma,
                            const std::string& schedule, std::uint64_t max_iters, double tol, double nu,
                            std::optional<std::uint64_t> cap, bool record_timing) {
            const SolverConfig cfg = make_config(gamma, schedule, max_iters, tol, nu, cap);
            SolveOptions opts;
            opts.record_timing = record_timing;
            py::gil_scoped_release release;
            const RngStream root = RngStream::root(seed);
            return accelerate ? solve(p, cfg, x0, root, opts) : solve_seg(p, cfg, x0, root, opts);
        };
    };
    m.def("solve", solve_fn(true), py::arg("problem"), py::arg("x0"), py::arg("seed") = 42, py::arg("gamma") = 0.1,
          py::arg("schedule") = "linear", py::arg("max_iters") = 200, py::arg("tol") = 1e-2, py::arg("nu") = 30.0,
          py::arg("cap") = py::none(), py::arg("record_timing") = true,
          "Anderson(1)-SEG from x0 with the experiment parameters.");
    m.def("solve_seg", solve_fn(false), py::arg("problem"), py::arg("x0"), py::arg("seed") = 42,
          py::arg("gamma") = 0.1, py::arg("schedule") = "linear", py::arg("max_iters") = 200, py::arg("tol") = 1e-2,
          py::arg("nu") = 30.0, py::arg("cap") = py::none(), py::arg("record_timing") = true,
          "Line-search SEG baseline.");

    m.def("build_lcp", [](const Matrix& sigma, const Vector& rho, const Vector& upper) {
        const LcpProblem l = portfolio::build_lcp(sigma, rho, upper);
        return py::make_tuple(l.M, l.q);
    }, py::arg("sigma"), py::arg("rho"), py::arg("upper"));
    m.def("in_sample_length", &portfolio::in_sample_length, py::arg("rows"));
    m.def("sharpe", &portfolio::sharpe, py::arg("w"), py::arg("out_of_sample"));

    m.def("run_portfolio", [](const std::filesystem::path& prices, const std::string& freq, std::uint64_t max_iters,
                              double cap, std::optional<std::filesystem::path> out) {
        bench::PortfolioRunSpec spec;
        spec.solver.stop.max_iters = max_iters;
        spec.weight_cap = cap;
        spec.output_dir = std::move(out);
        spec.record_timing = false;
        spec.data_set = prices.stem().string();
        const auto f = freq == "daily" ? portfolio::Frequency::Daily : portfolio::Frequency::Weekly;
        return bench::run_portfolio(prices, f, spec).dump();
    }, py::arg("prices"), py::arg("freq") = "weekly", py::arg("max_iters") = 2000, py::arg("cap") = 0.2,
          py::arg("out") = py::none(), "Runs the portfolio pipeline; returns the metrics as a JSON string.");
}
