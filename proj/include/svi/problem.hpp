#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "svi/feasible_set.hpp"
#include "svi/rng.hpp"
#include "svi/types.hpp"

namespace svi {

/// One realization of the random variable. The payload layout is private to
/// the problem that drew it; a sample can be re-applied at any number of points.
struct Sample {
    Vector data;
};

/// Optional per-batch precomputation a problem may attach when drawing a batch
/// (e.g. batch-averaged matrices) so that the batch mean operator does not have
/// to loop over samples at every evaluation.
class BatchSummary {
public:
    virtual ~BatchSummary() = default;
};

struct SampleBatch {
    std::vector<Sample> samples;
    std::shared_ptr<const BatchSummary> summary;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Which of the two independent sample families a batch belongs to. I.i.d.
/// problems ignore it; deterministic-window problems use it to pick the window.
enum class SampleFamily { Xi, Eta };

/// A stochastic variational inequality SVI(X, H) with H(x) = E[T(xi, x)].
class StochasticProblem {
public:
    explicit StochasticProblem(FeasibleSet set) : set_(std::move(set)) {}
    virtual ~StochasticProblem() = default;

    std::size_t dim() const noexcept { return set_.dim(); }
    const FeasibleSet& set() const noexcept { return set_; }

    virtual Sample draw(RngStream& stream) const = 0;

    /// T(xi, x) for one sample.
    virtual Vector apply(const Sample& sample, const Vector& x) const = 0;

    virtual bool has_exact_mean() const { return false; }
    /// H(x). Throws MeanUnavailable unless has_exact_mean().
    virtual Vector exact_mean(const Vector& x) const;

    /// Draws `size` samples. The default is i.i.d. draws from `stream`.
    virtual SampleBatch sample_batch(std::size_t size, RngStream& stream, SampleFamily family) const;

    /// Mean of T(xi_j, x) over the batch. Overrides must agree with the
    /// default sample loop up to rounding.
    virtual Vector batch_mean(const SampleBatch& batch, const Vector& x) const;

    virtual std::string name() const { return "custom"; }

protected:
    void check_dim(const Vector& x) const;

private:
    FeasibleSet set_;
};

/// A problem assembled from callables; useful for tests and the Python layer.
class FunctionProblem final : public StochasticProblem {
public:
    using DrawFn = std::function<Sample(RngStream&)>;
    using ApplyFn = std::function<Vector(const Sample&, const Vector&)>;
    using MeanFn = std::function<Vector(const Vector&)>;

    FunctionProblem(FeasibleSet set, DrawFn draw, ApplyFn apply, MeanFn exact_mean = {});

    Sample draw(RngStream& stream) const override { return draw_(stream); }
    Vector apply(const Sample& sample, const Vector& x) const override;
    bool has_exact_mean() const override { return static_cast<bool>(mean_); }
    Vector exact_mean(const Vector& x) const override;

private:
    DrawFn draw_;
    ApplyFn apply_;
    MeanFn mean_;
};

/// Throws EmptyBatch for size 0.
SampleBatch sample_batch(const StochasticProblem& problem, std::size_t size, RngStream& stream,
                         SampleFamily family = SampleFamily::Xi);

/// H_batch(x) = (1/S) sum_j T(xi_j, x).
Vector empirical_operator(const StochasticProblem& problem, const SampleBatch& batch, const Vector& x);

/// r_t(x) = |P_X(x - t H(x)) - x|. Needs the exact mean.
double exact_residual(const StochasticProblem& problem, const Vector& x, double t);

/// |P_X(x - H_batch(x)) - x|, the stopping residual (step t = 1).
double empirical_residual(const StochasticProblem& problem, const SampleBatch& batch, const Vector& x);

struct OracleErrors {
    Vector eps1;  // H_xi(x_k) - H(x_k)
    Vector eps2;  // H_eta(y_half) - H(y_half)
    Vector eps3;  // H_xi(y_half) - H(y_half)
};

OracleErrors oracle_errors(const StochasticProblem& problem, const SampleBatch& batch_xi,
                           const SampleBatch& batch_eta, const Vector& x_k, const Vector& y_half);

}  // namespace svi
