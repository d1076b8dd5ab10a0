#include "svi/problem.hpp"

#include "svi/error.hpp"

namespace svi {

void StochasticProblem::check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim())
        throw Error(ErrorCode::DimensionMismatch, "point of length " + std::to_string(x.size()) +
                                                      " for a problem of dimension " + std::to_string(dim()));
}

Vector StochasticProblem::exact_mean(const Vector&) const {
    throw Error(ErrorCode::MeanUnavailable, name() + " has no exact mean operator");
}

SampleBatch StochasticProblem::sample_batch(std::size_t size, RngStream& stream, SampleFamily) const {
    SampleBatch batch;
    batch.samples.reserve(size);
    for (std::size_t j = 0; j < size; ++j) batch.samples.push_back(draw(stream));
    return batch;
}

Vector StochasticProblem::batch_mean(const SampleBatch& batch, const Vector& x) const {
    Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim()));
    for (const auto& s : batch.samples) acc += apply(s, x);
    return acc / static_cast<double>(batch.size());
}

FunctionProblem::FunctionProblem(FeasibleSet set, DrawFn draw, ApplyFn apply, MeanFn exact_mean)
    : StochasticProblem(std::move(set)), draw_(std::move(draw)), apply_(std::move(apply)),
      mean_(std::move(exact_mean)) {}

Vector FunctionProblem::apply(const Sample& sample, const Vector& x) const {
    check_dim(x);
    Vector out = apply_(sample, x);
    if (static_cast<std::size_t>(out.size()) != dim())
        throw Error(ErrorCode::DimensionMismatch, "operator returned a vector of the wrong length");
    return out;
}

Vector FunctionProblem::exact_mean(const Vector& x) const {
    if (!mean_) return StochasticProblem::exact_mean(x);
    check_dim(x);
    return mean_(x);
}

SampleBatch sample_batch(const StochasticProblem& problem, std::size_t size, RngStream& stream,
                         SampleFamily family) {
    if (size == 0) throw Error(ErrorCode::EmptyBatch, "batch size must be >= 1");
    return problem.sample_batch(size, stream, family);
}

Vector empirical_operator(const StochasticProblem& problem, const SampleBatch& batch, const Vector& x) {
    if (batch.size() == 0) throw Error(ErrorCode::EmptyBatch, "cannot average over an empty batch");
    if (static_cast<std::size_t>(x.size()) != problem.dim())
        throw Error(ErrorCode::DimensionMismatch, "point length does not match problem dimension");
    return problem.batch_mean(batch, x);
}

double exact_residual(const StochasticProblem& problem, const Vector& x, double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidStep, "residual step must be positive");
    if (!problem.has_exact_mean())
        throw Error(ErrorCode::MeanUnavailable, problem.name() + " has no exact mean operator");
    if (static_cast<std::size_t>(x.size()) != problem.dim())
        throw Error(ErrorCode::DimensionMismatch, "point length does not match problem dimension");
    return (problem.set().project(x - t * problem.exact_mean(x)) - x).norm();
}

double empirical_residual(const StochasticProblem& problem, const SampleBatch& batch, const Vector& x) {
    const Vector h = empirical_operator(problem, batch, x);
    return (problem.set().project(x - h) - x).norm();
}

OracleErrors oracle_errors(const StochasticProblem& problem, const SampleBatch& batch_xi,
                           const SampleBatch& batch_eta, const Vector& x_k, const Vector& y_half) {
    if (!problem.has_exact_mean())
        throw Error(ErrorCode::MeanUnavailable, problem.name() + " has no exact mean operator");
    const Vector h_y = problem.exact_mean(y_half);
    return {
        empirical_operator(problem, batch_xi, x_k) - problem.exact_mean(x_k),
        empirical_operator(problem, batch_eta, y_half) - h_y,
        empirical_operator(problem, batch_xi, y_half) - h_y,
    };
}

}  // namespace svi
