#include "svi/problems.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <string>

#include "svi/error.hpp"

namespace svi {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> as_matrix(const Vector& data, Eigen::Index offset, Eigen::Index rows,
                                           Eigen::Index cols) {
    return Eigen::Map<const RowMajorMatrix>(data.data() + offset, rows, cols);
}

void require_dim(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidDimension, "problem dimension must be >= 1");
}

void check_sample(const Sample& s, Eigen::Index expected, const char* what) {
    if (s.data.size() != expected)
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " sample payload has length " +
                                                      std::to_string(s.data.size()) + ", expected " +
                                                      std::to_string(expected));
}

}  // namespace

// ---------------------------------------------------------------------------
// Example 1: stochastic complementarity problem

ScpProblem::ScpProblem(Matrix B) : StochasticProblem(FeasibleSet::orthant(static_cast<std::size_t>(B.rows()))), B_(std::move(B)) {
    if (B_.rows() != B_.cols()) throw Error(ErrorCode::DimensionMismatch, "B must be square");
}

Sample ScpProblem::draw(RngStream& stream) const {
    const auto n = static_cast<Eigen::Index>(dim());
    Sample s{Vector(4 * n)};
    for (Eigen::Index i = 0; i < n; ++i) s.data[i] = stream.uniform(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) s.data[n + i] = stream.uniform(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) s.data[2 * n + i] = stream.uniform(0.0, 2.0);
    for (Eigen::Index i = 0; i < n; ++i) s.data[3 * n + i] = stream.uniform(-3.0, 3.0);
    return s;
}

Vector ScpProblem::apply(const Sample& sample, const Vector& x) const {
    check_dim(x);
    const auto n = static_cast<Eigen::Index>(dim());
    check_sample(sample, 4 * n, "example1");
    const auto d = sample.data.segment(0, n).array();
    const auto a = sample.data.segment(n, n).array();
    const auto y = sample.data.segment(2 * n, n).array();
    const auto q = sample.data.segment(3 * n, n).array();
    return (d * (a * x.array()).atan() + y * x.array() + q).matrix() + B_ * x;
}

Vector ScpProblem::batch_mean(const SampleBatch& batch, const Vector& x) const {
    check_dim(x);
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);
    for (const auto& s : batch.samples) {
        check_sample(s, 4 * n, "example1");
        const auto d = s.data.segment(0, n).array();
        const auto a = s.data.segment(n, n).array();
        const auto y = s.data.segment(2 * n, n).array();
        const auto q = s.data.segment(3 * n, n).array();
        acc += d * (a * x.array()).atan() + y * x.array() + q;
    }
    return (acc / static_cast<double>(batch.size())).matrix() + B_ * x;
}

Vector ScpProblem::exact_mean(const Vector& x) const {
    check_dim(x);
    using Quad = boost::math::quadrature::gauss<double, 64>;
    Vector dbar(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        // E[d] = 1/2, and a ~ U(0,1) so E[arctan(a x)] is the integral over [0,1].
        dbar[i] = 0.5 * Quad::integrate([xi](double a) { return std::atan(a * xi); }, 0.0, 1.0);
    }
    return dbar + B_ * x + x;
}

double ScpProblem::lipschitz_bound(const Sample& sample) const {
    const auto n = static_cast<Eigen::Index>(dim());
    check_sample(sample, 4 * n, "example1");
    Matrix Q = B_;
    Q.diagonal() += sample.data.segment(2 * n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q.transpose() * Q, Eigen::EigenvaluesOnly);
    const double spectral = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    const double arctan_part = (sample.data.segment(0, n).array() * sample.data.segment(n, n).array()).maxCoeff();
    return spectral + arctan_part;
}

std::shared_ptr<ScpProblem> gen_scp(std::size_t n, RngStream& stream) {
    require_dim(n);
    const auto m = static_cast<Eigen::Index>(n);
    // A skew matrix cannot have all entries in (0, 5); draw A that way and
    // keep its skew part, which preserves the scale.
    Matrix A(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) A(i, j) = stream.uniform(0.0, 5.0);
    Matrix B = 0.5 * (A - A.transpose());
    return std::make_shared<ScpProblem>(std::move(B));
}

// ---------------------------------------------------------------------------
// Example 2: stochastic fractional quadratic problem

struct FractionalProblem::Summary final : BatchSummary {
    Matrix hessian;  // 0.025 U'U + mean_j s_j sym(V_j)
    Matrix c_outer;  // mean_j (c + cbar_j)(c + cbar_j)'
    Vector c_mean;   // mean_j (c + cbar_j)
};

FractionalProblem::FractionalProblem(Matrix U, Vector c, Vector r, double d)
    : StochasticProblem(FeasibleSet::box(static_cast<std::size_t>(c.size()), 0.0, 4.0)), U_(std::move(U)),
      c_(std::move(c)), r_(std::move(r)), d_(d) {
    const auto n = c_.size();
    if (U_.rows() != n || U_.cols() != n || r_.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "U, c and r must agree in dimension");
    const Matrix gram = U_.transpose() * U_;
    base_hessian_ = 0.025 * gram;
    gram_norm_ = gram.norm();
}

double FractionalProblem::denominator(const Vector& x) const {
    const double g = r_.dot(x) + d_ + 4.0 * static_cast<double>(dim());
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidRange, "fractional denominator g(x) is not positive");
    return g;
}

Sample FractionalProblem::draw(RngStream& stream) const {
    const auto n = static_cast<Eigen::Index>(dim());
    Sample s{Vector(n * n + n)};
    for (Eigen::Index i = 0; i < n * n; ++i) s.data[i] = stream.normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) s.data[n * n + i] = stream.uniform(0.0, 1.0);
    return s;
}

double FractionalProblem::objective(const Sample& sample, const Vector& x) const {
    check_dim(x);
    const auto n = static_cast<Eigen::Index>(dim());
    check_sample(sample, n * n + n, "example2");
    const auto V = as_matrix(sample.data, 0, n, n);
    const double vnorm = V.norm();
    const double scale = vnorm > 0.0 ? 0.025 * gram_norm_ / vnorm : 0.0;
    const Vector cx = c_ + sample.data.segment(n * n, n);
    const double lin = cx.dot(x) + 4.0 * static_cast<double>(n);
    const double f = 0.5 * x.dot(base_hessian_ * x) + 0.5 * scale * x.dot(V * x) + 0.5 * lin * lin;
    return f / denominator(x);
}

Vector FractionalProblem::gradient_from(const Matrix& hess, const Matrix& c_outer, const Vector& c_mean,
                                        const Vector& x) const {
    const double four_n = 4.0 * static_cast<double>(dim());
    const double cx = c_mean.dot(x);
    const Vector c_outer_x = c_outer * x;
    const Vector hess_x = hess * x;
    // mean f and mean grad f, expanding ((c + cbar)'x + 4n)^2 over the batch.
    const double f = 0.5 * x.dot(hess_x) + 0.5 * (x.dot(c_outer_x) + 2.0 * four_n * cx + four_n * four_n);
    const Vector grad_f = hess_x + c_outer_x + four_n * c_mean;
    const double g = denominator(x);
    return (grad_f * g - f * r_) / (g * g);
}

Vector FractionalProblem::apply(const Sample& sample, const Vector& x) const {
    check_dim(x);
    const auto n = static_cast<Eigen::Index>(dim());
    check_sample(sample, n * n + n, "example2");
    const auto V = as_matrix(sample.data, 0, n, n);
    const double vnorm = V.norm();
    const double scale = vnorm > 0.0 ? 0.025 * gram_norm_ / vnorm : 0.0;
    const Matrix hess = base_hessian_ + (0.5 * scale) * (V + V.transpose());
    const Vector cx = c_ + sample.data.segment(n * n, n);
    return gradient_from(hess, cx * cx.transpose(), cx, x);
}

std::shared_ptr<const FractionalProblem::Summary> FractionalProblem::summarize(const SampleBatch& batch) const {
    const auto n = static_cast<Eigen::Index>(dim());
    auto sum = std::make_shared<Summary>();
    Matrix v_acc = Matrix::Zero(n, n);
    sum->c_outer = Matrix::Zero(n, n);
    sum->c_mean = Vector::Zero(n);
    for (const auto& s : batch.samples) {
        check_sample(s, n * n + n, "example2");
        const auto V = as_matrix(s.data, 0, n, n);
        const double vnorm = V.norm();
        if (vnorm > 0.0) v_acc += (0.025 * gram_norm_ / vnorm) * V;
        const Vector cx = c_ + s.data.segment(n * n, n);
        sum->c_outer.noalias() += cx * cx.transpose();
        sum->c_mean += cx;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    sum->hessian = base_hessian_ + (0.5 * inv) * (v_acc + v_acc.transpose());
    sum->c_outer *= inv;
    sum->c_mean *= inv;
    return sum;
}

SampleBatch FractionalProblem::sample_batch(std::size_t size, RngStream& stream, SampleFamily family) const {
    SampleBatch batch = StochasticProblem::sample_batch(size, stream, family);
    if (batch.size() > 0) batch.summary = summarize(batch);
    return batch;
}

Vector FractionalProblem::batch_mean(const SampleBatch& batch, const Vector& x) const {
    check_dim(x);
    auto sum = std::dynamic_pointer_cast<const Summary>(batch.summary);
    if (!sum) sum = summarize(batch);
    return gradient_from(sum->hessian, sum->c_outer, sum->c_mean, x);
}

std::shared_ptr<FractionalProblem> gen_fractional(std::size_t n, RngStream& stream) {
    require_dim(n);
    const auto m = static_cast<Eigen::Index>(n);
    Matrix U(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) U(i, j) = stream.normal(0.0, 1.0);
    Vector c(m), r(m);
    for (Eigen::Index i = 0; i < m; ++i) c[i] = stream.normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) r[i] = stream.uniform(0.0, 5.0);
    const double d = stream.uniform(0.0, 5.0);
    return std::make_shared<FractionalProblem>(std::move(U), std::move(c), std::move(r), d);
}

// ---------------------------------------------------------------------------
// LCP bridge

void LcpProblem::validate() const {
    if (q.size() == 0) throw Error(ErrorCode::InvalidDimension, "LCP must have at least one variable");
    if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "LCP matrix must be square");
    if (M.rows() != q.size()) throw Error(ErrorCode::DimensionMismatch, "LCP vector length must match the matrix");
}

LcpSviProblem::LcpSviProblem(LcpProblem lcp, LcpSampler noise)
    : StochasticProblem(FeasibleSet::orthant(lcp.side() == 0 ? 1 : lcp.side())), lcp_(std::move(lcp)),
      noise_(std::move(noise)) {
    lcp_.validate();
}

Sample LcpSviProblem::draw(RngStream& stream) const {
    if (!noise_) return {};
    const LcpProblem real = noise_(stream);
    real.validate();
    if (real.side() != lcp_.side()) throw Error(ErrorCode::DimensionMismatch, "sampled LCP has the wrong size");
    const auto m = static_cast<Eigen::Index>(real.side());
    Sample s{Vector(m * m + m)};
    Eigen::Map<RowMajorMatrix>(s.data.data(), m, m) = real.M;
    s.data.tail(m) = real.q;
    return s;
}

Vector LcpSviProblem::apply(const Sample& sample, const Vector& x) const {
    check_dim(x);
    if (sample.data.size() == 0) return lcp_.M * x + lcp_.q;
    const auto m = static_cast<Eigen::Index>(dim());
    check_sample(sample, m * m + m, "lcp");
    return as_matrix(sample.data, 0, m, m) * x + sample.data.tail(m);
}

Vector LcpSviProblem::batch_mean(const SampleBatch& batch, const Vector& x) const {
    if (!noise_) {
        check_dim(x);
        return lcp_.M * x + lcp_.q;
    }
    return StochasticProblem::batch_mean(batch, x);
}

Vector LcpSviProblem::exact_mean(const Vector& x) const {
    if (noise_) return StochasticProblem::exact_mean(x);
    check_dim(x);
    return lcp_.M * x + lcp_.q;
}

std::shared_ptr<LcpSviProblem> lcp_to_svi(LcpProblem lcp, LcpSampler noise) {
    return std::make_shared<LcpSviProblem>(std::move(lcp), std::move(noise));
}

LcpEnumeration enumerate_lcp(const LcpProblem& lcp) {
    lcp.validate();
    const std::size_t m = lcp.side();
    if (m > 16) throw Error(ErrorCode::TooLargeForEnumeration, "enumeration limited to 16 variables, got " + std::to_string(m));

    LcpEnumeration out;
    const auto side = static_cast<Eigen::Index>(m);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<Eigen::Index> basis;
        for (Eigen::Index i = 0; i < side; ++i)
            if (mask & (1u << i)) basis.push_back(i);

        Vector x = Vector::Zero(side);
        if (!basis.empty()) {
            const auto k = static_cast<Eigen::Index>(basis.size());
            Matrix sub(k, k);
            Vector rhs(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                rhs[a] = -lcp.q[basis[a]];
                for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = lcp.M(basis[a], basis[b]);
            }
            Eigen::FullPivLU<Matrix> lu(sub);
            if (!lu.isInvertible()) {
                ++out.singular_bases;
                continue;
            }
            const Vector sol = lu.solve(rhs);
            for (Eigen::Index a = 0; a < k; ++a) x[basis[a]] = sol[a];
        }
        const Vector w = lcp.M * x + lcp.q;
        if (x.minCoeff() < -1e-9 || w.minCoeff() < -1e-9) continue;

        bool seen = false;
        for (const auto& s : out.solutions) seen = seen || (s - x).norm() <= 1e-8;
        if (!seen) out.solutions.push_back(std::move(x));
    }
    return out;
}

std::vector<Vector> brute_force_lcp(const LcpProblem& lcp) { return enumerate_lcp(lcp).solutions; }

}  // namespace svi
