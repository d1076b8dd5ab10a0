#include <doctest.h>

#include "svi/error.hpp"
#include "svi/feasible_set.hpp"
#include "svi/rng.hpp"

using namespace svi;

TEST_CASE("box projection clamps componentwise") {
    const auto X = FeasibleSet::box(3, 0.0, 4.0);
    const Vector p = project(X, Vector{{5.0, -1.0, 2.0}});
    CHECK(p == Vector{{4.0, 0.0, 2.0}});
}

TEST_CASE("orthant and whole space") {
    const Vector x{{0.0, 1.5, 3.0}};
    CHECK(project(FeasibleSet::orthant(3), x) == x);
    const Vector y{{-2.0, 1e300, -1e-300}};
    CHECK(project(FeasibleSet::whole_space(3), y) == y);
    CHECK(project(FeasibleSet::orthant(3), y) == Vector{{0.0, 1e300, 0.0}});
}

TEST_CASE("contains uses the projection distance") {
    CHECK(contains(FeasibleSet::orthant(2), Vector::Zero(2), 0.0));
    const auto box = FeasibleSet::box(1, 0.0, 4.0);
    CHECK_FALSE(contains(box, Vector{{4.000001}}, 1e-9));
    CHECK(contains(box, Vector{{4.000001}}, 1e-5));
}

TEST_CASE("dimension mismatch and invalid boxes") {
    const auto X = FeasibleSet::orthant(2);
    CHECK_THROWS_AS(project(X, Vector::Zero(3)), Error);
    CHECK_THROWS_AS(contains(X, Vector::Zero(1), 0.0), Error);
    CHECK_THROWS_AS(FeasibleSet::box(Vector{{1.0}}, Vector{{0.0}}), Error);
    CHECK_THROWS_AS(FeasibleSet::box(Vector{{0.0, 0.0}}, Vector{{1.0}}), Error);
    CHECK_THROWS_AS(FeasibleSet::orthant(0), Error);
}

TEST_CASE("projection properties on random pairs") {
    auto s = new_root(3).split("projection");
    const std::size_t n = 5;
    Vector lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = s.uniform(-2.0, 0.0);
        hi[i] = lo[i] + s.uniform(0.1, 3.0);
    }
    for (const auto& X : {FeasibleSet::orthant(n), FeasibleSet::box(lo, hi), FeasibleSet::whole_space(n)}) {
        for (int trial = 0; trial < 200; ++trial) {
            Vector x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = s.uniform(-5.0, 5.0);
                y[i] = s.uniform(-5.0, 5.0);
            }
            const Vector px = X.project(x), py = X.project(y);
            CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
            CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-12);
            CHECK((x - px).dot(py - px) <= 1e-12);
            CHECK(X.project(px) == px);
        }
    }
}
