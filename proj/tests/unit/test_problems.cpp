#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "../support.hpp"
#include "svi/error.hpp"
#include "svi/problems.hpp"

using namespace svi;

namespace {

// Closed form of the integral of arctan(a x) over a in [0, 1].
double mean_arctan(double x) { return x == 0.0 ? 0.0 : std::atan(x) - std::log1p(x * x) / (2.0 * x); }

Vector loop_mean(const StochasticProblem& p, const SampleBatch& b, const Vector& x) {
    Vector acc = Vector::Zero(x.size());
    for (const auto& s : b.samples) acc += p.apply(s, x);
    return acc / static_cast<double>(b.size());
}

}  // namespace

TEST_CASE("example 1 structure") {
    auto s = RngStream::root(1).split("instance");
    const auto p = gen_scp(8, s);
    CHECK((p->B() + p->B().transpose()).norm() <= 1e-12);
    CHECK(p->dim() == 8);
    CHECK_THROWS_AS(gen_scp(0, s), Error);

    auto d = RngStream::root(1).split("draw");
    const Sample xi = p->draw(d);
    CHECK(xi.data.size() == 32);
    // T(xi, 0) = q(xi)
    CHECK(p->apply(xi, Vector::Zero(8)) == xi.data.tail(8));
    CHECK(p->exact_mean(Vector::Zero(8)).isZero(0.0));
}

TEST_CASE("example 1 quadrature matches the closed form") {
    auto s = RngStream::root(2).split("instance");
    const auto p = gen_scp(5, s);
    const Vector x{{0.0, 0.3, 1.0, 4.0, 25.0}};
    const Vector expect = 0.5 * x.unaryExpr(&mean_arctan) + p->B() * x + x;
    CHECK((p->exact_mean(x) - expect).norm() <= 1e-12);
}

TEST_CASE("example 1 mean operator is monotone with PSD symmetric Jacobian") {
    auto s = RngStream::root(3).split("instance");
    const auto p = gen_scp(6, s);
    auto r = RngStream::root(3).split("points");
    auto point = [&] {
        Vector x(6);
        for (auto& v : x) v = r.uniform(0.0, 5.0);
        return x;
    };
    for (int i = 0; i < 100; ++i) {
        const Vector x = point(), y = point();
        CHECK((p->exact_mean(x) - p->exact_mean(y)).dot(x - y) >= -1e-8);
    }
    for (int i = 0; i < 10; ++i) {
        const Vector x = point();
        Matrix J(6, 6);
        const double h = 1e-6;
        for (Eigen::Index j = 0; j < 6; ++j) {
            Vector e = Vector::Zero(6);
            e[j] = h;
            J.col(j) = (p->exact_mean(x + e) - p->exact_mean(x - e)) / (2 * h);
        }
        const Matrix sym = 0.5 * (J + J.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("example 1 batch mean agrees with the sample loop and the expectation") {
    auto s = RngStream::root(4).split("instance");
    const auto p = gen_scp(4, s);
    auto b = RngStream::root(4).split("batch");
    const auto batch = sample_batch(*p, 20000, b);
    const Vector x{{0.2, 1.0, 0.0, 3.0}};
    CHECK((p->batch_mean(batch, x) - loop_mean(*p, batch, x)).norm() <= 1e-12);
    // q ~ U(-3,3) dominates the variance; 5 sigma with sigma <= 2 per entry.
    CHECK((empirical_operator(*p, batch, x) - p->exact_mean(x)).cwiseAbs().maxCoeff() <= 5.0 * 2.0 / std::sqrt(20000.0));
}

TEST_CASE("example 1 per-sample Lipschitz bound") {
    auto s = RngStream::root(5).split("instance");
    const auto p = gen_scp(5, s);
    auto r = RngStream::root(5).split("draws");
    for (int i = 0; i < 20; ++i) {
        const Sample xi = p->draw(r);
        const double L = p->lipschitz_bound(xi);
        Vector x(5), y(5);
        for (auto& v : x) v = r.uniform(0.0, 3.0);
        for (auto& v : y) v = r.uniform(0.0, 3.0);
        CHECK((p->apply(xi, x) - p->apply(xi, y)).norm() <= L * (x - y).norm() + 1e-12);
    }
}

TEST_CASE("example 2 gradient matches finite differences") {
    auto s = RngStream::root(6).split("instance");
    const auto p = gen_fractional(5, s);
    CHECK(p->denominator(Vector::Zero(5)) == doctest::Approx(p->d() + 20.0));
    CHECK(p->d() > 0.0);
    auto r = RngStream::root(6).split("draws");
    for (int i = 0; i < 5; ++i) {
        const Sample xi = p->draw(r);
        CHECK(xi.data.size() == 30);
        Vector x(5);
        for (auto& v : x) v = r.uniform(0.0, 4.0);
        const Vector T = p->apply(xi, x);
        Vector fd(5);
        const double h = 1e-5;
        for (Eigen::Index j = 0; j < 5; ++j) {
            Vector e = Vector::Zero(5);
            e[j] = h;
            fd[j] = (p->objective(xi, x + e) - p->objective(xi, x - e)) / (2 * h);
        }
        CHECK((T - fd).norm() <= 1e-5 * std::max(1.0, T.norm()));
    }
}

TEST_CASE("example 2 batch summary agrees with the sample loop") {
    auto s = RngStream::root(7).split("instance");
    const auto p = gen_fractional(6, s);
    auto b = RngStream::root(7).split("batch");
    const auto batch = sample_batch(*p, 50, b);
    REQUIRE(batch.summary);
    const Vector x = Vector::LinSpaced(6, 0.0, 4.0);
    CHECK((p->batch_mean(batch, x) - loop_mean(*p, batch, x)).norm() <= 1e-10 * std::max(1.0, x.norm()));
    CHECK_FALSE(p->has_exact_mean());
    // A batch without a summary takes the sample loop.
    SampleBatch plain{batch.samples, nullptr};
    CHECK((p->batch_mean(plain, x) - loop_mean(*p, batch, x)).norm() <= 1e-10);
}

TEST_CASE("example 2 Monte-Carlo standard error scales with the batch") {
    auto s = RngStream::root(8).split("instance");
    const auto p = gen_fractional(3, s);
    auto b = RngStream::root(8).split("draws");
    const Vector x{{1.0, 2.0, 3.0}};
    const int N = 10000;
    Vector sum = Vector::Zero(3), sum2 = Vector::Zero(3);
    Vector half = Vector::Zero(3);
    for (int j = 0; j < N; ++j) {
        const Vector t = p->apply(p->draw(b), x);
        sum += t;
        sum2 += t.cwiseProduct(t);
        if (j == N / 2 - 1) half = sum / (N / 2);
    }
    const Vector mean = sum / N;
    const Vector sd = (sum2 / N - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
    // first-half mean minus full mean has standard deviation sd / sqrt(N)
    CHECK(((half - mean).cwiseAbs().array() <= 5.0 * sd.array() / std::sqrt(double(N)) + 1e-12).all());
}

TEST_CASE("LCP bridge and brute force") {
    const LcpProblem id{Matrix::Identity(2, 2), Vector{{-1.0, 2.0}}};
    const auto sols = brute_force_lcp(id);
    REQUIRE(sols.size() == 1);
    CHECK((sols[0] - Vector{{1.0, 0.0}}).norm() <= 1e-12);

    const LcpProblem two{Matrix{{2.0, 1.0}, {1.0, 2.0}}, Vector{{-3.0, -3.0}}};
    const auto s2 = brute_force_lcp(two);
    REQUIRE(s2.size() == 1);
    CHECK((s2[0] - Vector{{1.0, 1.0}}).norm() <= 1e-12);

    const LcpProblem pos{Matrix{{0.0, 1.0}, {-1.0, 0.0}}, Vector{{0.5, 2.0}}};
    bool has_zero = false;
    for (const auto& x : brute_force_lcp(pos)) has_zero |= x.isZero(1e-12);
    CHECK(has_zero);

    const auto svi = lcp_to_svi(id);
    CHECK(svi->has_exact_mean());
    CHECK(exact_residual(*svi, Vector{{1.0, 0.0}}, 1.0) == 0.0);
    auto r = RngStream::root(1);
    const auto batch = sample_batch(*svi, 3, r);
    const Vector x{{0.4, 1.7}};
    CHECK(empirical_operator(*svi, batch, x) == svi->exact_mean(x));

    CHECK_THROWS_AS(enumerate_lcp({Matrix::Identity(17, 17), Vector::Zero(17)}), Error);
    CHECK_THROWS_AS((LcpProblem{Matrix::Identity(2, 3), Vector::Zero(2)}.validate()), Error);
}

TEST_CASE("brute force solutions are complementary") {
    auto s = RngStream::root(12).split("lcps");
    for (int i = 0; i < 20; ++i) {
        const auto lcp = test::random_monotone_lcp(1 + i % 6, s);
        const auto sols = brute_force_lcp(lcp);
        CHECK_FALSE(sols.empty());
        for (const auto& x : sols) {
            const Vector w = lcp.M * x + lcp.q;
            CHECK(x.minCoeff() >= -1e-9);
            CHECK(w.minCoeff() >= -1e-9);
            CHECK(std::abs(x.dot(w)) <= 1e-7);
        }
    }
}

TEST_CASE("noisy LCP has no exact mean") {
    const LcpProblem base{Matrix::Identity(2, 2), Vector{{-1.0, 1.0}}};
    const auto noisy = lcp_to_svi(base, [base](RngStream& s) {
        LcpProblem l = base;
        l.q[0] += s.uniform(-0.1, 0.1);
        return l;
    });
    CHECK_FALSE(noisy->has_exact_mean());
    auto r = RngStream::root(3);
    const Sample xi = noisy->draw(r);
    const Vector t = noisy->apply(xi, Vector{{1.0, 0.0}});
    CHECK(std::abs(t[0]) <= 0.1);
    CHECK(t[1] == 1.0);
}
