#pragma once

// Simulated satellite truth. Orbits are circular and expressed in a single
// Earth-fixed frame with no Earth rotation, so the frame is also the one in
// which signals travel in straight lines (no Sagnac term). Satellite clocks
// are perfect.

#include <array>
#include <span>
#include <vector>

#include "instanton/geodesy.hpp"
#include "instanton/nav_message.hpp"

namespace instanton {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kL1CarrierHz = 1575.42e6;
inline constexpr double kCodeRateHz = 1.023e6;
inline constexpr double kCodeLengthChips = 1023.0;
inline constexpr double kEarthMu = 3.986005e14;
inline constexpr double kGpsOrbitRadiusM = 26560000.0;
inline constexpr double kEphemerisValidityS = 4.0 * 3600.0;

struct EphemerisRecord {
    int sat_id = 1;
    double orbit_radius_m = kGpsOrbitRadiusM;
    double inclination_rad = 0.0;
    double raan_rad = 0.0;
    double phase_at_epoch_rad = 0.0;
    double epoch_s = 0.0;  // GPS seconds of week
    double validity_s = kEphemerisValidityS;

    double mean_motion() const;  // rad/s
    double period_s() const;
    bool valid_at(double t) const;
    // Throws ValidationError if the orbit sits inside the Earth or validity <= 0.
    void validate() const;

    friend bool operator==(const EphemerisRecord&, const EphemerisRecord&) = default;
};

struct SatState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

// Throws StaleEphemerisError when |t - epoch| > validity.
SatState propagate(const EphemerisRecord& eph, double t);

double geometric_range(const Vec3& sat_pos, const Vec3& user_pos);
double propagation_delay(double range_m);

// Positive when the satellite approaches the user.
double carrier_doppler(const SatState& sat, const Vec3& user_pos, const Vec3& user_vel);

// Elevation above the local (geodetic) horizon of the user.
double elevation_rad(const Vec3& sat_pos, const Vec3& user_pos);

// Signal transit time for a signal received at t_receive, solved by
// fixed-point iteration on the light-time equation.
double transit_time(const EphemerisRecord& eph, const Vec3& user_pos, double t_receive);

// Eight (or `count`) satellites placed at spread azimuths and elevations as
// seen from `user` at `epoch_s`.
std::vector<EphemerisRecord> default_constellation(const Vec3& user, double epoch_s, int count = 8);

// Ephemeris fields carried in the payloads of subframes 1..3, two IEEE
// doubles per subframe: {epoch, validity}, {radius, phase}, {inclination, raan}.
std::array<nav::Payload, 3> pack_ephemeris(const EphemerisRecord& eph);
EphemerisRecord unpack_ephemeris(int sat_id, std::span<const nav::Payload, 3> payloads);

}  // namespace instanton
