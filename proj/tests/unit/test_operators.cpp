#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "svi/error.hpp"
#include "svi/problem.hpp"

using namespace svi;

namespace {

// T(xi, x) = x + xi e with xi stored as a one-entry payload; H(x) = x.
std::shared_ptr<FunctionProblem> shifted(FeasibleSet set) {
    return std::make_shared<FunctionProblem>(
        std::move(set), [](RngStream& s) { return Sample{Vector::Constant(1, s.uniform(-1.0, 1.0))}; },
        [](const Sample& xi, const Vector& x) -> Vector { return (x.array() + xi.data[0]).matrix(); },
        [](const Vector& x) -> Vector { return x; });
}

SampleBatch batch_of(std::initializer_list<double> values) {
    SampleBatch b;
    for (double v : values) b.samples.push_back(Sample{Vector::Constant(1, v)});
    return b;
}

}  // namespace

TEST_CASE("sample_batch sizes and determinism") {
    const auto p = shifted(FeasibleSet::whole_space(1));
    auto s = RngStream::root(1);
    CHECK(sample_batch(*p, 1, s).size() == 1);
    CHECK_THROWS_AS(sample_batch(*p, 0, s), Error);
    auto a = RngStream::root(8), b = RngStream::root(8);
    const auto ba = sample_batch(*p, 5, a), bb = sample_batch(*p, 5, b);
    for (std::size_t j = 0; j < 5; ++j) CHECK(ba.samples[j].data == bb.samples[j].data);
}

TEST_CASE("empirical_operator averages the batch") {
    const auto p = shifted(FeasibleSet::whole_space(1));
    CHECK(empirical_operator(*p, batch_of({0.1, 0.3}), Vector{{1.0}})[0] == doctest::Approx(1.2).epsilon(1e-15));

    auto sign = std::make_shared<FunctionProblem>(
        FeasibleSet::whole_space(2), [](RngStream&) { return Sample{}; },
        [](const Sample& xi, const Vector& x) -> Vector { return xi.data[0] * x; });
    CHECK(empirical_operator(*sign, batch_of({-1.0, 1.0}), Vector{{3.0, -2.0}}).isZero(0.0));

    const auto same = batch_of({0.25, 0.25, 0.25});
    CHECK(empirical_operator(*p, same, Vector{{2.0}})[0] == p->apply(same.samples[0], Vector{{2.0}})[0]);
    CHECK_THROWS_AS(empirical_operator(*p, same, Vector::Zero(2)), Error);
}

TEST_CASE("exact_residual examples") {
    const Vector xs{{1.0, -2.0}};
    const auto p = test::shifted_identity(FeasibleSet::whole_space(2), xs);
    CHECK(exact_residual(*p, xs, 1.0) == 0.0);
    const Vector x{{4.0, 2.0}};
    CHECK(exact_residual(*p, x, 1.0) == doctest::Approx((x - xs).norm()));

    const auto id = test::linear_toy(FeasibleSet::orthant(1), 1.0);
    CHECK(exact_residual(*id, Vector{{2.0}}, 0.5) == 1.0);
    CHECK_THROWS_AS(exact_residual(*id, Vector{{2.0}}, 0.0), Error);

    auto no_mean = std::make_shared<FunctionProblem>(
        FeasibleSet::orthant(1), [](RngStream&) { return Sample{}; },
        [](const Sample&, const Vector& x) -> Vector { return x; });
    try {
        exact_residual(*no_mean, Vector{{1.0}}, 1.0);
        FAIL("expected MeanUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MeanUnavailable);
    }
}

TEST_CASE("empirical_residual examples") {
    const auto id = test::linear_toy(FeasibleSet::whole_space(1), 1.0);
    CHECK(empirical_residual(*id, test::constant_batch(3), Vector{{3.0}}) == 3.0);
    const auto p = test::shifted_identity(FeasibleSet::orthant(2), Vector{{1.0, 0.0}});
    CHECK(empirical_residual(*p, test::constant_batch(2), Vector{{1.0, 0.0}}) == 0.0);
    const Vector x{{0.3, 2.0}};
    CHECK(empirical_residual(*p, test::constant_batch(4), x) == exact_residual(*p, x, 1.0));
}

TEST_CASE("oracle_errors") {
    const auto p = shifted(FeasibleSet::whole_space(1));
    const auto e = oracle_errors(*p, batch_of({0.1, 0.3}), batch_of({-0.5, 0.5}), Vector{{1.0}}, Vector{{2.0}});
    CHECK(e.eps1[0] == doctest::Approx(0.2));
    CHECK(e.eps2[0] == doctest::Approx(0.0));
    CHECK(e.eps3[0] == doctest::Approx(0.2));

    const auto det = test::linear_toy(FeasibleSet::orthant(2), 2.0);
    const auto z = oracle_errors(*det, test::constant_batch(3), test::constant_batch(3), Vector{{1.0, 2.0}},
                                 Vector{{0.5, 0.5}});
    CHECK(z.eps1.isZero(0.0));
    CHECK(z.eps2.isZero(0.0));
    CHECK(z.eps3.isZero(0.0));
}

TEST_CASE("estimator consistency and zero-mean oracle error") {
    const auto p = shifted(FeasibleSet::whole_space(1));
    const Vector x{{0.7}};
    const double sigma = 1.0 / std::sqrt(3.0);
    for (std::size_t N : {100u, 10000u}) {
        auto s = RngStream::root(N).split("consistency");
        const auto b = sample_batch(*p, N, s);
        CHECK(std::abs(empirical_operator(*p, b, x)[0] - x[0]) <= 5.0 * sigma / std::sqrt(double(N)));
    }
    // mean of eps1 over many independent batches of size 10
    double total = 0.0;
    const int reps = 2000;
    auto root = RngStream::root(11);
    for (int r = 0; r < reps; ++r) {
        auto s = root.split("rep/" + std::to_string(r));
        total += empirical_operator(*p, sample_batch(*p, 10, s), x)[0] - x[0];
    }
    CHECK(std::abs(total / reps) <= 5.0 * sigma / std::sqrt(10.0 * reps));
}

TEST_CASE("residual step monotonicity on a nonlinear problem") {
    auto s = RngStream::root(4).split("instance");
    const auto p = gen_scp(6, s);
    auto r = RngStream::root(4).split("points");
    for (int i = 0; i < 30; ++i) {
        Vector x(6);
        for (auto& v : x) v = r.uniform(-1.0, 3.0);
        const double t2 = r.uniform(0.01, 2.0), t1 = t2 + r.uniform(0.0, 2.0);
        const double r1 = exact_residual(*p, x, t1), r2 = exact_residual(*p, x, t2);
        CHECK(r1 / t1 <= r2 / t2 + 1e-10);
        CHECK(r2 <= r1 + 1e-10);
    }
}
