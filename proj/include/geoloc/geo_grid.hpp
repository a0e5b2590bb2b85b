#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace geoloc {

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kKmPerMile = 1.609344;

/// A latitude/longitude pair in degrees. Construction validates the ranges,
/// so every GeoPoint in the program is a valid coordinate.
class GeoPoint {
public:
    GeoPoint(double latitude, double longitude);

    double latitude() const noexcept { return lat_; }
    double longitude() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_;
    double lon_;
};

/// Axis-aligned lat/lon rectangle. No antimeridian wrapping.
class GeoBoundingBox {
public:
    GeoBoundingBox(double lat_max, double lat_min, double lon_max, double lon_min);

    /// Tweet capture region for the continental United States.
    static GeoBoundingBox us_default();

    double lat_max() const noexcept { return lat_max_; }
    double lat_min() const noexcept { return lat_min_; }
    double lon_max() const noexcept { return lon_max_; }
    double lon_min() const noexcept { return lon_min_; }

    bool contains(const GeoPoint& p) const noexcept {
        return lat_min_ <= p.latitude() && p.latitude() <= lat_max_ &&
               lon_min_ <= p.longitude() && p.longitude() <= lon_max_;
    }

    GeoPoint center() const;

    friend bool operator==(const GeoBoundingBox&, const GeoBoundingBox&) = default;

private:
    double lat_max_;
    double lat_min_;
    double lon_max_;
    double lon_min_;
};

/// Row-major cell identifier, 1-based. G1 is the north-west cell.
struct GridLabel {
    std::int32_t index = 1;

    friend auto operator<=>(const GridLabel&, const GridLabel&) = default;
};

std::string to_string(GridLabel label);
/// Accepts "G17" or "17".
GridLabel parse_grid_label(const std::string& text);

/// n x n partition of a bounding box into equal lat/lon rectangles.
class LatticeSpec {
public:
    LatticeSpec(GeoBoundingBox bbox, int n);

    const GeoBoundingBox& bbox() const noexcept { return bbox_; }
    int n() const noexcept { return n_; }
    std::int32_t cell_count() const noexcept { return n_ * n_; }
    double cell_height() const noexcept { return (bbox_.lat_max() - bbox_.lat_min()) / n_; }
    double cell_width() const noexcept { return (bbox_.lon_max() - bbox_.lon_min()) / n_; }

    bool valid(GridLabel label) const noexcept {
        return label.index >= 1 && label.index <= cell_count();
    }

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;

private:
    GeoBoundingBox bbox_;
    int n_;
};

/// Cell containing p. Rows run north to south, columns west to east.
/// Interior gridlines belong to the cell south/east of them; the southern
/// and eastern bbox edges are clamped into the last row/column.
/// Throws OutOfBoundsError if p lies outside the lattice box.
GridLabel grid_index(const GeoPoint& p, const LatticeSpec& lattice);

/// Midpoint of the cell rectangle. Throws InvalidLabelError.
GeoPoint grid_centroid(GridLabel label, const LatticeSpec& lattice);

/// Cell rectangle. Throws InvalidLabelError.
GeoBoundingBox grid_bounds(GridLabel label, const LatticeSpec& lattice);

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

inline double km_to_miles(double km) noexcept { return km / kKmPerMile; }
inline double miles_to_km(double miles) noexcept { return miles * kKmPerMile; }

struct LatticeRadius {
    double miles = 0.0;
    bool computed = false;  // false when taken from the published table
};

/// Tabulated radius for n in {8, 11, 16, 32}; otherwise half the cell
/// diagonal (in miles) measured at the latitude midpoint of `bbox`.
/// Throws std::invalid_argument for n < 1.
LatticeRadius radius_for_lattice(int n, const GeoBoundingBox& bbox = GeoBoundingBox::us_default());

/// Distance from the cell centroid to its farthest corner, in km. Bounds the
/// error of a correct prediction realized at the centroid.
double half_cell_diagonal_km(GridLabel label, const LatticeSpec& lattice);

/// Largest corner-to-corner cell distance over all cells, in km.
double max_cell_diagonal_km(const LatticeSpec& lattice);

}  // namespace geoloc
