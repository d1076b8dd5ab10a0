#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "svi/portfolio.hpp"
#include "svi/problem.hpp"
#include "svi/problems.hpp"
#include "svi/rng.hpp"

namespace svi::test {

/// Deterministic T(xi, x) = scale * x on the given set.
inline std::shared_ptr<FunctionProblem> linear_toy(FeasibleSet set, double scale) {
    return std::make_shared<FunctionProblem>(
        std::move(set), [](RngStream&) { return Sample{}; },
        [scale](const Sample&, const Vector& x) -> Vector { return scale * x; },
        [scale](const Vector& x) -> Vector { return scale * x; });
}

/// T(xi, x) = x - target, deterministic.
inline std::shared_ptr<FunctionProblem> shifted_identity(FeasibleSet set, Vector target) {
    return std::make_shared<FunctionProblem>(
        std::move(set), [](RngStream&) { return Sample{}; },
        [target](const Sample&, const Vector& x) -> Vector { return x - target; },
        [target](const Vector& x) -> Vector { return x - target; });
}

inline SampleBatch constant_batch(std::size_t size) {
    SampleBatch b;
    b.samples.assign(size, Sample{});
    return b;
}

/// min 1/2 w'Sw - rho'w over {0 <= w <= a, e'w = 1} by enumerating every
/// face of the box: each coordinate is fixed at 0, fixed at a_i, or free.
/// Returns an empty vector when the set is empty.
inline Vector qp_active_set(const Matrix& sigma, const Vector& rho, const Vector& a) {
    const auto n = sigma.rows();
    Vector best;
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t faces = 1;
    for (Eigen::Index i = 0; i < n; ++i) faces *= 3;
    for (std::size_t code = 0; code < faces; ++code) {
        std::vector<int> state(static_cast<std::size_t>(n));
        std::size_t c = code;
        std::vector<Eigen::Index> free;
        Vector w = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
            c /= 3;
            if (state[static_cast<std::size_t>(i)] == 1) w[i] = a[i];
            if (state[static_cast<std::size_t>(i)] == 2) free.push_back(i);
        }
        if (free.empty()) {
            if (std::abs(w.sum() - 1.0) > 1e-12) continue;
        } else {
            const auto f = static_cast<Eigen::Index>(free.size());
            Matrix K = Matrix::Zero(f + 1, f + 1);
            Vector rhs(f + 1);
            for (Eigen::Index r = 0; r < f; ++r) {
                for (Eigen::Index s = 0; s < f; ++s) K(r, s) = sigma(free[r], free[s]);
                K(r, f) = -1.0;
                K(f, r) = 1.0;
                rhs[r] = rho[free[r]] - sigma.row(free[r]).dot(w);
            }
            rhs[f] = 1.0 - w.sum();
            Eigen::FullPivLU<Matrix> lu(K);
            if (!lu.isInvertible()) continue;
            const Vector sol = lu.solve(rhs);
            for (Eigen::Index r = 0; r < f; ++r) w[free[r]] = sol[r];
        }
        if ((w.array() < -1e-12).any() || ((w - a).array() > 1e-12).any()) continue;
        const double obj = 0.5 * w.dot(sigma * w) - rho.dot(w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
    }
    return best;
}

/// m x k matrix with orthonormal columns, each orthogonal to the ones vector.
inline Matrix centered_orthonormal(Eigen::Index m, Eigen::Index k, RngStream& s) {
    Matrix A(m, k + 1);
    A.col(0).setOnes();
    for (Eigen::Index j = 1; j <= k; ++j)
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = s.normal(0.0, 1.0);
    Eigen::HouseholderQR<Matrix> qr(A);
    const Matrix Q = qr.householderQ() * Matrix::Identity(m, k + 1);
    return Q.rightCols(k);
}

/// `m` rows whose sample mean is exactly `mean` and whose sample covariance
/// (divisor m - 1) is exactly `cov`.
inline Matrix rows_with_moments(Eigen::Index m, const Vector& mean, const Matrix& cov, RngStream& s) {
    const Eigen::LLT<Matrix> llt(cov);
    const Matrix L = llt.matrixL();
    const Matrix Q = centered_orthonormal(m, mean.size(), s);
    Matrix R = std::sqrt(static_cast<double>(m - 1)) * Q * L.transpose();
    R.rowwise() += mean.transpose();
    return R;
}

/// In-sample returns (2h rows) whose eta-window (rows 1..h) and full-length
/// xi-window (rows h..2h) both have mean `mean` and covariance `cov`; row h
/// is shared and equals the mean.
inline Matrix matched_window_returns(Eigen::Index h, const Vector& mean, const Matrix& cov, RngStream& s) {
    const auto n = mean.size();
    Matrix R(2 * h, n);
    // eta-window: h - 1 rows plus the mean row; scatter must be (h - 1) cov.
    // With the mean row adding nothing, the h - 1 rows need covariance
    // (h - 1)/(h - 2) cov at their own divisor.
    R.topRows(h - 1) = rows_with_moments(h - 1, mean, cov * (static_cast<double>(h - 1) / static_cast<double>(h - 2)), s);
    R.row(h - 1) = mean.transpose();
    // xi-window: mean row plus h rows; scatter must be h cov.
    R.bottomRows(h) = rows_with_moments(h, mean, cov * (static_cast<double>(h) / static_cast<double>(h - 1)), s);
    return R;
}

/// Prices whose log returns are exactly `returns` (up to rounding).
inline portfolio::PriceMatrix prices_from_returns(const Matrix& returns, portfolio::Frequency f) {
    portfolio::PriceMatrix p;
    p.frequency = f;
    p.prices.resize(returns.rows() + 1, returns.cols());
    p.prices.row(0).setOnes();
    for (Eigen::Index j = 0; j < returns.rows(); ++j)
        p.prices.row(j + 1) = (p.prices.row(j).array() * returns.row(j).array().exp()).matrix();
    for (Eigen::Index i = 0; i < returns.cols(); ++i) p.tickers.push_back("A" + std::to_string(i));
    return p;
}

/// A monotone LCP with M = A A' + (K - K'), q random.
inline LcpProblem random_monotone_lcp(Eigen::Index m, RngStream& s) {
    Matrix A(m, m), K(m, m);
    Vector q(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        q[i] = s.uniform(-2.0, 2.0);
        for (Eigen::Index j = 0; j < m; ++j) {
            A(i, j) = s.uniform(-1.0, 1.0);
            K(i, j) = s.uniform(-1.0, 1.0);
        }
    }
    return {A * A.transpose() + (K - K.transpose()), q};
}

}  // namespace svi::test
