#include "instanton/geodesy.hpp"

#include <cmath>

namespace instanton {
namespace {
constexpr double kE2 = kWgs84F * (2.0 - kWgs84F);
}

Vec3 geodetic_to_ecef(const Geodetic& g) {
    const double s = std::sin(g.lat_rad);
    const double c = std::cos(g.lat_rad);
    const double n = kWgs84A / std::sqrt(1.0 - kE2 * s * s);
    return {(n + g.height_m) * c * std::cos(g.lon_rad), (n + g.height_m) * c * std::sin(g.lon_rad),
            (n * (1.0 - kE2) + g.height_m) * s};
}

Geodetic ecef_to_geodetic(const Vec3& r) {
    const double p = std::hypot(r.x(), r.y());
    Geodetic g;
    g.lon_rad = std::atan2(r.y(), r.x());
    if (p < 1e-9) {
        g.lat_rad = r.z() >= 0 ? kPi / 2 : -kPi / 2;
        g.height_m = std::abs(r.z()) - kWgs84A * (1.0 - kWgs84F);
        return g;
    }
    double lat = std::atan2(r.z(), p * (1.0 - kE2));
    double h = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double s = std::sin(lat);
        const double n = kWgs84A / std::sqrt(1.0 - kE2 * s * s);
        h = p / std::cos(lat) - n;
        lat = std::atan2(r.z(), p * (1.0 - kE2 * n / (n + h)));
    }
    g.lat_rad = lat;
    g.height_m = h;
    return g;
}

Eigen::Matrix3d enu_basis(const Geodetic& g) {
    const double sl = std::sin(g.lat_rad), cl = std::cos(g.lat_rad);
    const double so = std::sin(g.lon_rad), co = std::cos(g.lon_rad);
    Eigen::Matrix3d m;
    m << -so, co, 0.0,
         -sl * co, -sl * so, cl,
         cl * co, cl * so, sl;
    return m;
}

}  // namespace instanton
