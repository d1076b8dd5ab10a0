#include "svi/feasible_set.hpp"

#include <string>

#include "svi/error.hpp"

namespace svi {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

FeasibleSet FeasibleSet::orthant(std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidDimension, "orthant dimension must be >= 1");
    return FeasibleSet(NonnegativeOrthant{dim});
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
    if (lower.size() == 0) throw Error(ErrorCode::InvalidDimension, "box dimension must be >= 1");
    if (lower.size() != upper.size())
        throw Error(ErrorCode::DimensionMismatch, "box bounds have different lengths");
    if ((lower.array() > upper.array()).any())
        throw Error(ErrorCode::InvalidRange, "box requires lower <= upper componentwise");
    return FeasibleSet(Box{std::move(lower), std::move(upper)});
}

FeasibleSet FeasibleSet::box(std::size_t dim, double lower, double upper) {
    const auto n = static_cast<Eigen::Index>(dim);
    return box(Vector::Constant(n, lower), Vector::Constant(n, upper));
}

FeasibleSet FeasibleSet::whole_space(std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidDimension, "space dimension must be >= 1");
    return FeasibleSet(WholeSpace{dim});
}

std::size_t FeasibleSet::dim() const noexcept {
    return std::visit(overloaded{
                          [](const NonnegativeOrthant& o) { return o.dim; },
                          [](const Box& b) { return static_cast<std::size_t>(b.lower.size()); },
                          [](const WholeSpace& w) { return w.dim; },
                      },
                      kind_);
}

void FeasibleSet::check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "vector of length " + std::to_string(x.size()) + " for a set of dimension " +
                        std::to_string(dim()));
}

Vector FeasibleSet::project(const Vector& x) const {
    check_dim(x);
    return std::visit(overloaded{
                          [&](const NonnegativeOrthant&) -> Vector { return x.cwiseMax(0.0); },
                          [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
                          [&](const WholeSpace&) -> Vector { return x; },
                      },
                      kind_);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
    if (tol < 0.0) throw Error(ErrorCode::InvalidRange, "tolerance must be nonnegative");
    return (project(x) - x).norm() <= tol;
}

}  // namespace svi
