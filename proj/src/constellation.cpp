#include "instanton/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <Eigen/Geometry>

#include "instanton/errors.hpp"

namespace instanton {

double EphemerisRecord::mean_motion() const {
    return std::sqrt(kEarthMu / (orbit_radius_m * orbit_radius_m * orbit_radius_m));
}

double EphemerisRecord::period_s() const { return 2.0 * kPi / mean_motion(); }

bool EphemerisRecord::valid_at(double t) const { return std::abs(t - epoch_s) <= validity_s; }

void EphemerisRecord::validate() const {
    if (!(orbit_radius_m > kWgs84A)) throw ValidationError("orbit radius must exceed Earth radius");
    if (!(validity_s > 0.0)) throw ValidationError("ephemeris validity must be positive");
    if (sat_id < 1 || sat_id > 32) throw ValidationError("sat_id must be in 1..32");
}

SatState propagate(const EphemerisRecord& eph, double t) {
    if (!eph.valid_at(t))
        throw StaleEphemerisError("ephemeris for PRN " + std::to_string(eph.sat_id) +
                                  " is stale at t=" + std::to_string(t));
    const double n = eph.mean_motion();
    const double u = eph.phase_at_epoch_rad + n * (t - eph.epoch_s);
    const double r = eph.orbit_radius_m;

    const Eigen::Matrix3d rot =
        (Eigen::AngleAxisd(eph.raan_rad, Vec3::UnitZ()) * Eigen::AngleAxisd(eph.inclination_rad, Vec3::UnitX()))
            .toRotationMatrix();
    SatState s;
    s.position = rot * Vec3(r * std::cos(u), r * std::sin(u), 0.0);
    s.velocity = rot * Vec3(-r * n * std::sin(u), r * n * std::cos(u), 0.0);
    return s;
}

double geometric_range(const Vec3& sat_pos, const Vec3& user_pos) { return (sat_pos - user_pos).norm(); }

double propagation_delay(double range_m) { return range_m / kSpeedOfLight; }

double carrier_doppler(const SatState& sat, const Vec3& user_pos, const Vec3& user_vel) {
    const Vec3 los = sat.position - user_pos;
    const double range = los.norm();
    if (range == 0.0) return 0.0;
    const double range_rate = (sat.velocity - user_vel).dot(los) / range;
    return -range_rate / kSpeedOfLight * kL1CarrierHz;
}

double elevation_rad(const Vec3& sat_pos, const Vec3& user_pos) {
    const Vec3 enu = enu_basis(ecef_to_geodetic(user_pos)) * (sat_pos - user_pos);
    return std::atan2(enu.z(), std::hypot(enu.x(), enu.y()));
}

double transit_time(const EphemerisRecord& eph, const Vec3& user_pos, double t_receive) {
    double tau = 0.075;
    for (int i = 0; i < 8; ++i) {
        const double next = propagation_delay(geometric_range(propagate(eph, t_receive - tau).position, user_pos));
        if (next == tau) break;
        tau = next;
    }
    return tau;
}

std::vector<EphemerisRecord> default_constellation(const Vec3& user, double epoch_s, int count) {
    static constexpr double kElevationDeg[8] = {16.0, 64.0, 24.0, 80.0, 14.0, 43.0, 19.0, 55.0};
    const Geodetic g = ecef_to_geodetic(user);
    const Eigen::Matrix3d enu = enu_basis(g);
    const double r = kGpsOrbitRadiusM;

    std::vector<EphemerisRecord> out;
    for (int i = 0; i < count; ++i) {
        const double az = deg2rad(12.0 + 360.0 * i / count);
        const double el = deg2rad(kElevationDeg[i % 8]);
        const Vec3 d_enu(std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el));
        const Vec3 d = enu.transpose() * d_enu;
        const double ud = user.dot(d);
        const double s = -ud + std::sqrt(ud * ud - user.squaredNorm() + r * r);
        const Vec3 p_hat = (user + s * d).normalized();

        // Motion direction: the local northward tangent turned by a per-satellite heading.
        const Vec3 north = (Vec3::UnitZ() - Vec3::UnitZ().dot(p_hat) * p_hat).normalized();
        const double heading = deg2rad(25.0 + 47.0 * i);
        const Vec3 t = std::cos(heading) * north + std::sin(heading) * p_hat.cross(north);
        const Vec3 normal = p_hat.cross(t).normalized();

        EphemerisRecord e;
        e.sat_id = 2 + 3 * i;
        e.orbit_radius_m = r;
        e.inclination_rad = std::acos(std::clamp(normal.z(), -1.0, 1.0));
        e.raan_rad = std::atan2(normal.x(), -normal.y());
        const Vec3 node(std::cos(e.raan_rad), std::sin(e.raan_rad), 0.0);
        e.phase_at_epoch_rad = std::atan2(p_hat.dot(normal.cross(node)), p_hat.dot(node));
        e.epoch_s = epoch_s;
        out.push_back(e);
    }
    return out;
}

namespace {

void put_double(nav::Payload& p, int first, double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    p[first] = static_cast<std::uint32_t>(u >> 40) & 0xFFFFFFu;
    p[first + 1] = static_cast<std::uint32_t>(u >> 16) & 0xFFFFFFu;
    p[first + 2] = static_cast<std::uint32_t>(u & 0xFFFFu) << 8;
}

double get_double(const nav::Payload& p, int first) {
    const std::uint64_t u = (static_cast<std::uint64_t>(p[first]) << 40) |
                            (static_cast<std::uint64_t>(p[first + 1]) << 16) |
                            (static_cast<std::uint64_t>(p[first + 2]) >> 8);
    return std::bit_cast<double>(u);
}

}  // namespace

std::array<nav::Payload, 3> pack_ephemeris(const EphemerisRecord& eph) {
    std::array<nav::Payload, 3> out{};
    put_double(out[0], 0, eph.epoch_s);
    put_double(out[0], 3, eph.validity_s);
    put_double(out[1], 0, eph.orbit_radius_m);
    put_double(out[1], 3, eph.phase_at_epoch_rad);
    put_double(out[2], 0, eph.inclination_rad);
    put_double(out[2], 3, eph.raan_rad);
    return out;
}

EphemerisRecord unpack_ephemeris(int sat_id, std::span<const nav::Payload, 3> payloads) {
    EphemerisRecord e;
    e.sat_id = sat_id;
    e.epoch_s = get_double(payloads[0], 0);
    e.validity_s = get_double(payloads[0], 3);
    e.orbit_radius_m = get_double(payloads[1], 0);
    e.phase_at_epoch_rad = get_double(payloads[1], 3);
    e.inclination_rad = get_double(payloads[2], 0);
    e.raan_rad = get_double(payloads[2], 3);
    e.validate();
    return e;
}

}  // namespace instanton
