#pragma once

#include <Eigen/Dense>
#include <string>

#include "homogfc/errors.hpp"

namespace homogfc {

using Vec2 = Eigen::Vector2d;

/// Unit cell Y = [0,1]^2 split into a connected gas matrix and a solid
/// inclusion with interface Gamma. Supported inclusions: none, an interior
/// disk, or an axis-aligned solid stripe (a periodic layered medium).
struct CellGeometry {
    enum class Kind { none, disk, stripe };

    Kind kind = Kind::none;

    // disk
    Vec2 center{0.5, 0.5};
    double radius = 0.0;

    // stripe: solid band { y[axis] in [lo, hi] }, centered, width = fraction
    int axis = 0;
    double fraction = 0.0;

    bool has_solid() const { return kind != Kind::none; }

    double stripe_lo() const { return 0.5 * (1.0 - fraction); }
    double stripe_hi() const { return 0.5 * (1.0 + fraction); }

    /// Signed distance-like indicator: true if point lies strictly inside the
    /// solid inclusion.
    bool in_solid(const Vec2& p) const;
};

CellGeometry make_empty_cell();
CellGeometry make_disk_cell(const Vec2& center, double radius);
CellGeometry make_stripe_cell(int axis, double fraction);

/// Gas volume fraction theta = |Y_g| / |Y|, from the analytic shape.
double porosity(const CellGeometry& geom);

/// Analytic length of the gas-solid interface Gamma.
double interface_length(const CellGeometry& geom);

std::string describe(const CellGeometry& geom);

}  // namespace homogfc
