#pragma once

#include <Eigen/Core>

namespace instanton {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kWgs84A = 6378137.0;
inline constexpr double kWgs84F = 1.0 / 298.257223563;

struct Geodetic {
    double lat_rad = 0.0;
    double lon_rad = 0.0;
    double height_m = 0.0;
};

Vec3 geodetic_to_ecef(const Geodetic& g);
Geodetic ecef_to_geodetic(const Vec3& ecef);

// Rows are the east, north and up unit vectors at the given point.
Eigen::Matrix3d enu_basis(const Geodetic& g);

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace instanton
