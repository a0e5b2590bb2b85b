#include "geoloc/geo_grid.hpp"

#include "geoloc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace geoloc {

namespace {

std::string describe(double lat, double lon) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << lat << ", " << lon << ")";
    return os.str();
}

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

GeoPoint::GeoPoint(double latitude, double longitude) : lat_(latitude), lon_(longitude) {
    if (!(latitude >= -90.0 && latitude <= 90.0) || !(longitude >= -180.0 && longitude <= 180.0)) {
        throw InvalidCoordinateError("invalid coordinate " + describe(latitude, longitude));
    }
}

GeoBoundingBox::GeoBoundingBox(double lat_max, double lat_min, double lon_max, double lon_min)
    : lat_max_(lat_max), lat_min_(lat_min), lon_max_(lon_max), lon_min_(lon_min) {
    // Validates the corners as coordinates.
    GeoPoint{lat_max, lon_max};
    GeoPoint{lat_min, lon_min};
    if (!(lat_max > lat_min) || !(lon_max > lon_min)) {
        throw InvalidCoordinateError("degenerate bounding box: need lat_max > lat_min and lon_max > lon_min");
    }
}

GeoBoundingBox GeoBoundingBox::us_default() {
    return GeoBoundingBox(83.162102, 5.49955, -52.23304, -167.276413);
}

GeoPoint GeoBoundingBox::center() const {
    return GeoPoint((lat_max_ + lat_min_) / 2.0, (lon_max_ + lon_min_) / 2.0);
}

std::string to_string(GridLabel label) { return "G" + std::to_string(label.index); }

GridLabel parse_grid_label(const std::string& text) {
    std::string_view digits = text;
    if (!digits.empty() && (digits.front() == 'G' || digits.front() == 'g')) digits.remove_prefix(1);
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw InvalidLabelError("invalid grid label '" + text + "'");
    }
    GridLabel label{std::stoi(std::string(digits))};
    if (label.index < 1) throw InvalidLabelError("invalid grid label '" + text + "'");
    return label;
}

LatticeSpec::LatticeSpec(GeoBoundingBox bbox, int n) : bbox_(bbox), n_(n) {
    if (n < 1 || n > 46340) {  // n^2 must fit in int32
        throw std::invalid_argument("lattice size must be in [1, 46340], got " + std::to_string(n));
    }
}

GridLabel grid_index(const GeoPoint& p, const LatticeSpec& lattice) {
    const auto& box = lattice.bbox();
    if (!box.contains(p)) {
        throw OutOfBoundsError("point " + describe(p.latitude(), p.longitude()) + " lies outside the lattice bounding box");
    }
    const int n = lattice.n();
    const auto row = static_cast<int>(std::floor((box.lat_max() - p.latitude()) / lattice.cell_height()));
    const auto col = static_cast<int>(std::floor((p.longitude() - box.lon_min()) / lattice.cell_width()));
    return GridLabel{std::clamp(row, 0, n - 1) * n + std::clamp(col, 0, n - 1) + 1};
}

GeoBoundingBox grid_bounds(GridLabel label, const LatticeSpec& lattice) {
    if (!lattice.valid(label)) {
        throw InvalidLabelError("label " + to_string(label) + " outside [1, " + std::to_string(lattice.cell_count()) + "]");
    }
    const auto& box = lattice.bbox();
    const int n = lattice.n();
    const int row = (label.index - 1) / n;
    const int col = (label.index - 1) % n;
    // Outer edges come from the box itself so the cells tile it exactly.
    const double top = row == 0 ? box.lat_max() : box.lat_max() - row * lattice.cell_height();
    const double bottom = row == n - 1 ? box.lat_min() : box.lat_max() - (row + 1) * lattice.cell_height();
    const double west = col == 0 ? box.lon_min() : box.lon_min() + col * lattice.cell_width();
    const double east = col == n - 1 ? box.lon_max() : box.lon_min() + (col + 1) * lattice.cell_width();
    return GeoBoundingBox(top, bottom, east, west);
}

GeoPoint grid_centroid(GridLabel label, const LatticeSpec& lattice) {
    if (!lattice.valid(label)) {
        throw InvalidLabelError("label " + to_string(label) + " outside [1, " + std::to_string(lattice.cell_count()) + "]");
    }
    const auto& box = lattice.bbox();
    const int n = lattice.n();
    const int row = (label.index - 1) / n;
    const int col = (label.index - 1) % n;
    return GeoPoint(box.lat_max() - (row + 0.5) * lattice.cell_height(),
                    box.lon_min() + (col + 0.5) * lattice.cell_width());
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double lat1 = deg2rad(a.latitude());
    const double lat2 = deg2rad(b.latitude());
    const double dlat = lat2 - lat1;
    const double dlon = deg2rad(b.longitude() - a.longitude());
    const double s = std::sin(dlat / 2.0);
    const double t = std::sin(dlon / 2.0);
    const double h = std::min(1.0, s * s + std::cos(lat1) * std::cos(lat2) * t * t);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

LatticeRadius radius_for_lattice(int n, const GeoBoundingBox& bbox) {
    if (n < 1) throw std::invalid_argument("lattice size must be >= 1, got " + std::to_string(n));
    switch (n) {
        case 8: return {120.0, false};
        case 11: return {100.0, false};
        case 16: return {60.0, false};
        case 32: return {30.0, false};
        default: break;
    }
    const double km_per_degree = deg2rad(1.0) * kEarthRadiusKm;
    const double mid_lat = deg2rad((bbox.lat_max() + bbox.lat_min()) / 2.0);
    const double height_km = (bbox.lat_max() - bbox.lat_min()) / n * km_per_degree;
    const double width_km = (bbox.lon_max() - bbox.lon_min()) / n * km_per_degree * std::cos(mid_lat);
    return {km_to_miles(std::hypot(height_km, width_km) / 2.0), true};
}

double half_cell_diagonal_km(GridLabel label, const LatticeSpec& lattice) {
    const auto cell = grid_bounds(label, lattice);
    const auto c = grid_centroid(label, lattice);
    const std::array corners{GeoPoint(cell.lat_max(), cell.lon_min()), GeoPoint(cell.lat_max(), cell.lon_max()),
                             GeoPoint(cell.lat_min(), cell.lon_min()), GeoPoint(cell.lat_min(), cell.lon_max())};
    double worst = 0.0;
    for (const auto& corner : corners) worst = std::max(worst, haversine_km(c, corner));
    return worst;
}

double max_cell_diagonal_km(const LatticeSpec& lattice) {
    double worst = 0.0;
    // Cells in a row share their shape, so one column per row suffices.
    for (int row = 0; row < lattice.n(); ++row) {
        const auto cell = grid_bounds(GridLabel{row * lattice.n() + 1}, lattice);
        worst = std::max({worst,
                          haversine_km(GeoPoint(cell.lat_max(), cell.lon_min()), GeoPoint(cell.lat_min(), cell.lon_max())),
                          haversine_km(GeoPoint(cell.lat_min(), cell.lon_min()), GeoPoint(cell.lat_max(), cell.lon_max()))});
    }
    return worst;
}

}  // namespace geoloc
