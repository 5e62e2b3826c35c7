#include "instanton/pvt.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "instanton/constellation.hpp"
#include "instanton/errors.hpp"

namespace instanton::pvt {

double pseudorange(const GpsTime& t_receive, const GpsTime& t_transmit) {
    const double dt = t_receive.minus(t_transmit);
    if (dt < 0.0) throw CausalityError("receive time precedes transmit time");
    return pseudorange_from_delay(dt);
}

double pseudorange_from_delay(double delay_s) { return kSpeedOfLight * delay_s; }

Eigen::VectorXd predicted_pseudoranges(const PvtState& state, std::span<const Vec3> sats) {
    Eigen::VectorXd rho(static_cast<Eigen::Index>(sats.size()));
    for (std::size_t i = 0; i < sats.size(); ++i)
        rho(static_cast<Eigen::Index>(i)) = (sats[i] - state.position).norm() + state.clock_bias_m;
    return rho;
}

Eigen::MatrixXd design_matrix(const PvtState& state, std::span<const Vec3> sats) {
    Eigen::MatrixXd h(static_cast<Eigen::Index>(sats.size()), 4);
    for (std::size_t i = 0; i < sats.size(); ++i) {
        const Vec3 d = state.position - sats[i];
        const auto row = static_cast<Eigen::Index>(i);
        h.block<1, 3>(row, 0) = (d / d.norm()).transpose();
        h(row, 3) = 1.0;
    }
    return h;
}

PvtSolution solve(std::span<const double> rho_m, std::span<const Vec3> sats, const PvtState& initial_guess,
                  const SolveOptions& options) {
    if (rho_m.size() != sats.size()) throw ValidationError("one satellite position per pseudorange");
    if (sats.size() < 4) throw InsufficientSatellitesError("at least 4 satellites are required, got " +
                                                           std::to_string(sats.size()));
    const Eigen::Map<const Eigen::VectorXd> rho(rho_m.data(), static_cast<Eigen::Index>(rho_m.size()));

    PvtSolution sol;
    sol.position = initial_guess.position;
    sol.clock_bias_m = initial_guess.clock_bias_m;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const PvtState st = sol.state();
        const Eigen::MatrixXd h = design_matrix(st, sats);
        const Eigen::VectorXd resid = rho - predicted_pseudoranges(st, sats);

        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
        const auto& sv = svd.singularValues();
        if (sv(3) <= 0.0 || sv(0) / sv(3) > options.max_condition)
            throw GeometryError("satellite geometry is ill-conditioned");
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
        if (qr.rank() < 4) throw GeometryError("satellite geometry is rank deficient");
        const Eigen::Vector4d dx = qr.solve(resid);

        sol.position += dx.head<3>();
        sol.clock_bias_m += dx(3);
        sol.iterations = it;
        if (dx.head<3>().norm() < options.step_tolerance_m) {
            sol.converged = true;
            break;
        }
    }
    sol.residual_norm_m = (rho - predicted_pseudoranges(sol.state(), sats)).norm();
    if (sol.residual_norm_m > options.residual_tolerance_m) sol.converged = false;
    return sol;
}

PvtSolution solve(std::span<const PseudorangeMeasurement> measurements, std::span<const Vec3> sats,
                  const PvtState& initial_guess, const SolveOptions& options) {
    std::vector<double> rho;
    rho.reserve(measurements.size());
    for (const auto& m : measurements) {
        if (!(std::isfinite(m.rho_m) && m.rho_m >= 0.0)) throw ValidationError("pseudorange must be finite and >= 0");
        rho.push_back(m.rho_m);
    }
    return solve(rho, sats, initial_guess, options);
}

HorizontalError horizontal_error(const Vec3& solution, const Vec3& truth) {
    const Vec3 enu = enu_basis(ecef_to_geodetic(truth)) * (solution - truth);
    return {enu.x(), enu.y(), enu.z(), std::hypot(enu.x(), enu.y())};
}

double rms_2d(std::span<const double> e) {
    if (e.empty()) throw ValidationError("rms of an empty series");
    double sum = 0.0;
    for (double v : e) sum += v * v;
    return std::sqrt(sum / static_cast<double>(e.size()));
}

}  // namespace instanton::pvt
