#include "homogfc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace homogfc {

bool CellGeometry::in_solid(const Vec2& p) const {
    switch (kind) {
        case Kind::none:
            return false;
        case Kind::disk:
            return (p - center).norm() < radius;
        case Kind::stripe:
            return p[axis] > stripe_lo() && p[axis] < stripe_hi();
    }
    return false;
}

CellGeometry make_empty_cell() { return CellGeometry{}; }

CellGeometry make_disk_cell(const Vec2& center, double radius) {
    if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
    const double dist_to_boundary =
        std::min({center.x(), 1.0 - center.x(), center.y(), 1.0 - center.y()});
    if (!(dist_to_boundary > radius))
        throw GeometryError(
            "disk inclusion touches the cell boundary: the interface must stay "
            "strictly interior (radius " +
            std::to_string(radius) + ", distance to boundary " +
            std::to_string(dist_to_boundary) + ")");
    CellGeometry g;
    g.kind = CellGeometry::Kind::disk;
    g.center = center;
    g.radius = radius;
    return g;
}

CellGeometry make_stripe_cell(int axis, double fraction) {
    if (axis != 0 && axis != 1) throw GeometryError("stripe axis must be 0 or 1");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw GeometryError("stripe fraction must lie in (0,1)");
    CellGeometry g;
    g.kind = CellGeometry::Kind::stripe;
    g.axis = axis;
    g.fraction = fraction;
    return g;
}

double porosity(const CellGeometry& geom) {
    switch (geom.kind) {
        case CellGeometry::Kind::none:
            return 1.0;
        case CellGeometry::Kind::disk:
            return 1.0 - std::numbers::pi * geom.radius * geom.radius;
        case CellGeometry::Kind::stripe:
            return 1.0 - geom.fraction;
    }
    return 1.0;
}

double interface_length(const CellGeometry& geom) {
    switch (geom.kind) {
        case CellGeometry::Kind::none:
            return 0.0;
        case CellGeometry::Kind::disk:
            return 2.0 * std::numbers::pi * geom.radius;
        case CellGeometry::Kind::stripe:
            return 2.0;
    }
    return 0.0;
}

std::string describe(const CellGeometry& geom) {
    std::ostringstream os;
    switch (geom.kind) {
        case CellGeometry::Kind::none:
            os << "empty cell";
            break;
        case CellGeometry::Kind::disk:
            os << "disk(center=(" << geom.center.x() << "," << geom.center.y()
               << "), r=" << geom.radius << ")";
            break;
        case CellGeometry::Kind::stripe:
            os << "stripe(axis=" << geom.axis << ", fraction=" << geom.fraction
               << ")";
            break;
    }
    return os.str();
}

}  // namespace homogfc
