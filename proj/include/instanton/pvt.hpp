#pragma once

// Pseudorange formation and the four-unknown position/clock-bias solve.

#include <span>

#include <Eigen/Core>

#include "instanton/geodesy.hpp"
#include "instanton/rx_clock.hpp"

namespace instanton::pvt {

struct PseudorangeMeasurement {
    int sat_id = 0;
    double rho_m = 0.0;
    GpsTime t_transmit;
    GpsTime t_receive_rx;
};

struct PvtState {
    Vec3 position = Vec3::Zero();
    double clock_bias_m = 0.0;
};

struct PvtSolution {
    Vec3 position = Vec3::Zero();
    double clock_bias_m = 0.0;
    int iterations = 0;
    double residual_norm_m = 0.0;
    bool converged = false;

    PvtState state() const { return {position, clock_bias_m}; }
};

struct SolveOptions {
    int max_iterations = 20;
    double step_tolerance_m = 1e-4;
    double max_condition = 1e8;
    double residual_tolerance_m = 1e4;
};

// c * (t_receive - t_transmit). Throws CausalityError if negative.
double pseudorange(const GpsTime& t_receive, const GpsTime& t_transmit);
double pseudorange_from_delay(double delay_s);

// rho_i = |sat_i - user| + b_u
Eigen::VectorXd predicted_pseudoranges(const PvtState& state, std::span<const Vec3> sat_positions);

// Rows d rho_i / d(x, y, z, b) = ((user - sat_i) / |user - sat_i|, 1).
Eigen::MatrixXd design_matrix(const PvtState& state, std::span<const Vec3> sat_positions);

// Gauss-Newton on the pseudorange equations. Throws
// InsufficientSatellitesError (< 4) and GeometryError (rank deficient or
// condition number above options.max_condition). Non-convergence is
// reported through PvtSolution::converged with the last iterate.
PvtSolution solve(std::span<const double> rho_m, std::span<const Vec3> sat_positions, const PvtState& initial_guess,
                  const SolveOptions& options = {});
PvtSolution solve(std::span<const PseudorangeMeasurement> measurements, std::span<const Vec3> sat_positions,
                  const PvtState& initial_guess, const SolveOptions& options = {});

struct HorizontalError {
    double east_m = 0.0;
    double north_m = 0.0;
    double up_m = 0.0;
    double horizontal_m = 0.0;
};

// Error of `solution` in the local east/north/up frame at `truth`.
HorizontalError horizontal_error(const Vec3& solution, const Vec3& truth);

// Root mean square of a non-empty series. Throws ValidationError if empty.
double rms_2d(std::span<const double> horizontal_errors_m);

}  // namespace instanton::pvt
