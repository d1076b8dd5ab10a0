#pragma once

#include <cstddef>
#include <variant>

#include "svi/types.hpp"

namespace svi {

/// Closed convex set with a closed-form Euclidean projection.
class FeasibleSet {
public:
    struct NonnegativeOrthant {
        std::size_t dim;
    };
    struct Box {
        Vector lower;
        Vector upper;
    };
    struct WholeSpace {
        std::size_t dim;
    };
    using Kind = std::variant<NonnegativeOrthant, Box, WholeSpace>;

    static FeasibleSet orthant(std::size_t dim);
    static FeasibleSet box(Vector lower, Vector upper);
    static FeasibleSet box(std::size_t dim, double lower, double upper);
    static FeasibleSet whole_space(std::size_t dim);

    std::size_t dim() const noexcept;
    const Kind& kind() const noexcept { return kind_; }

    /// argmin over y in X of |y - x|^2.
    Vector project(const Vector& x) const;

    /// dist(x, X) <= tol, measured through the projection.
    bool contains(const Vector& x, double tol) const;

private:
    explicit FeasibleSet(Kind kind) : kind_(std::move(kind)) {}
    void check_dim(const Vector& x) const;

    Kind kind_;
};

inline Vector project(const FeasibleSet& set, const Vector& x) { return set.project(x); }
inline bool contains(const FeasibleSet& set, const Vector& x, double tol) { return set.contains(x, tol); }

}  // namespace svi
