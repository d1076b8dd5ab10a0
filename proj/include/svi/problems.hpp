#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "svi/problem.hpp"

namespace svi {

/// Stochastic complementarity problem on the nonnegative orthant:
///   T(xi, x) = D(xi, x) + (B + Y(xi)) x + q(xi),  D_i = d_i arctan(a_i x_i),
/// with d, a ~ U(0,1)^n, Y = diag(U(0,2)^n), q ~ U(-3,3)^n and a fixed skew B.
/// Sample payload: [d | a | diag(Y) | q], 4n entries.
class ScpProblem final : public StochasticProblem {
public:
    explicit ScpProblem(Matrix B);

    std::size_t n() const noexcept { return dim(); }
    const Matrix& B() const noexcept { return B_; }

    Sample draw(RngStream& stream) const override;
    Vector apply(const Sample& sample, const Vector& x) const override;
    Vector batch_mean(const SampleBatch& batch, const Vector& x) const override;

    /// H(x) = Dbar(x) + (B + I) x, Dbar_i(x) = E[d] E[arctan(a x_i)] by
    /// 64-point Gauss-Legendre quadrature over a ~ U(0,1).
    bool has_exact_mean() const override { return true; }
    Vector exact_mean(const Vector& x) const override;

    /// Per-sample Lipschitz bound |B + Y(xi)|_2 + max_i d_i a_i.
    double lipschitz_bound(const Sample& sample) const;

    std::string name() const override { return "example1"; }

private:
    Matrix B_;
};

/// Stochastic fractional quadratic problem on the box [0, 4]^n, with
///   f(xi, x) = 0.5 x'(0.025 U'U + 0.025 |U'U|_F / |V|_F V) x + 0.5 ((c + cbar)'x + 4n)^2,
///   g(x) = r'x + d + 4n,
/// and T(xi, x) the gradient of f(xi, x) / g(x).
/// Sample payload: [V row-major (n*n) | cbar (n)]; V ~ N(0,1), cbar ~ U(0,1).
class FractionalProblem final : public StochasticProblem {
public:
    FractionalProblem(Matrix U, Vector c, Vector r, double d);

    const Matrix& U() const noexcept { return U_; }
    const Vector& c() const noexcept { return c_; }
    const Vector& r() const noexcept { return r_; }
    double d() const noexcept { return d_; }

    Sample draw(RngStream& stream) const override;
    Vector apply(const Sample& sample, const Vector& x) const override;
    SampleBatch sample_batch(std::size_t size, RngStream& stream, SampleFamily family) const override;
    Vector batch_mean(const SampleBatch& batch, const Vector& x) const override;

    /// f(xi, x) / g(x) for one sample.
    double objective(const Sample& sample, const Vector& x) const;
    double denominator(const Vector& x) const;

    std::string name() const override { return "example2"; }

private:
    struct Summary;
    std::shared_ptr<const Summary> summarize(const SampleBatch& batch) const;
    Vector gradient_from(const Matrix& hess, const Matrix& c_outer, const Vector& c_mean, const Vector& x) const;

    Matrix U_;
    Vector c_;
    Vector r_;
    double d_;
    Matrix base_hessian_;  // 0.025 U'U
    double gram_norm_;     // |U'U|_F
};

std::shared_ptr<ScpProblem> gen_scp(std::size_t n, RngStream& stream);
std::shared_ptr<FractionalProblem> gen_fractional(std::size_t n, RngStream& stream);

/// LCP(q, M): x >= 0, Mx + q >= 0, x'(Mx + q) = 0.
struct LcpProblem {
    Matrix M;
    Vector q;

    std::size_t side() const noexcept { return static_cast<std::size_t>(q.size()); }
    void validate() const;
};

/// Per-draw (M, q) realization for a noisy LCP.
using LcpSampler = std::function<LcpProblem(RngStream&)>;

/// SVI on the orthant with T(xi, x) = M(xi) x + q(xi). Without a sampler the
/// problem is deterministic and exposes H(x) = M x + q as its exact mean.
class LcpSviProblem final : public StochasticProblem {
public:
    LcpSviProblem(LcpProblem lcp, LcpSampler noise = {});

    const LcpProblem& lcp() const noexcept { return lcp_; }

    Sample draw(RngStream& stream) const override;
    Vector apply(const Sample& sample, const Vector& x) const override;
    Vector batch_mean(const SampleBatch& batch, const Vector& x) const override;
    bool has_exact_mean() const override { return !noise_; }
    Vector exact_mean(const Vector& x) const override;

    std::string name() const override { return "lcp"; }

private:
    LcpProblem lcp_;
    LcpSampler noise_;
};

std::shared_ptr<LcpSviProblem> lcp_to_svi(LcpProblem lcp, LcpSampler noise = {});

struct LcpEnumeration {
    std::vector<Vector> solutions;
    std::size_t singular_bases = 0;
};

/// Enumerates all 2^m complementary bases (m <= 16). Keeps solutions with
/// x >= -1e-9 and Mx + q >= -1e-9, deduplicated within 1e-8.
LcpEnumeration enumerate_lcp(const LcpProblem& lcp);
std::vector<Vector> brute_force_lcp(const LcpProblem& lcp);

}  // namespace svi
