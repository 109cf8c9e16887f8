// Core value types shared across the MagBB library: dense Eigen aliases,
// medium and coil descriptions, and the spherical location / orientation
// conventions used by the channel model.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace magbb {

template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using CVec3 = Eigen::Matrix<std::complex<Scalar>, 3, 1>;
template <typename Scalar> using CMat3 = Eigen::Matrix<std::complex<Scalar>, 3, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using CVec3d = CVec3<double>;
using CMat3d = CMat3<double>;
using Vec6d = Eigen::Matrix<double, 6, 1>;
using Mat6d = Eigen::Matrix<double, 6, 6>;
using Vec7d = Eigen::Matrix<double, 7, 1>;
using Mat7d = Eigen::Matrix<double, 7, 7>;

inline constexpr double pi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * (pi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / pi); }

/// Lossless propagation medium. All parameters strictly positive.
struct Medium {
    double permittivity_vacuum;     // F/m
    double relative_permittivity;   // dimensionless
    double permeability_vacuum;     // H/m
    double relative_permeability;   // dimensionless
    double frequency;               // Hz

    Medium(double eps0, double eps_r, double mu0, double mu_r, double f)
        : permittivity_vacuum(eps0),
          relative_permittivity(eps_r),
          permeability_vacuum(mu0),
          relative_permeability(mu_r),
          frequency(f) {
        if (!(eps0 > 0.0 && eps_r > 0.0 && mu0 > 0.0 && mu_r > 0.0 && f > 0.0))
            throw std::invalid_argument("Medium: all parameters must be strictly positive");
    }

    double angular_frequency() const { return 2.0 * pi * frequency; }

    /// HF air medium used by the reference charging scenario.
    static Medium air(double frequency_hz = 13.56e6) {
        return Medium(8.85e-12, 1.0006, 1.2566e-6, 1.0, frequency_hz);
    }
};

/// Circular multi-turn coil. A transmitter spec is shared by all three
/// coils of the tri-axis array (identical radius, turns and resistance).
struct CoilSpec {
    double radius;      // m
    int turns;          // >= 1
    double resistance;  // ohm

    CoilSpec(double radius_m, int n_turns, double resistance_ohm)
        : radius(radius_m), turns(n_turns), resistance(resistance_ohm) {
        if (!(radius > 0.0)) throw std::invalid_argument("CoilSpec: radius must be > 0");
        if (turns < 1) throw std::invalid_argument("CoilSpec: turns must be >= 1");
        if (!(resistance > 0.0)) throw std::invalid_argument("CoilSpec: resistance must be > 0");
    }
};

/// Observation point relative to the transmitter, spherical convention:
/// range r > 0, polar angle in [0, pi], azimuth wrapped into [0, 2*pi).
struct SphericalLocation {
    double range;    // m
    double polar;    // rad
    double azimuth;  // rad

    SphericalLocation(double range_m, double polar_rad, double azimuth_rad)
        : range(range_m), polar(polar_rad), azimuth(wrap_azimuth(azimuth_rad)) {
        if (!(range > 0.0)) throw std::domain_error("SphericalLocation: range must be > 0");
        // Allow one-ulp noise from degree conversion, then clamp.
        if (polar < -1e-9 || polar > pi + 1e-9)
            throw std::domain_error("SphericalLocation: polar angle outside [0, pi]");
        polar = std::clamp(polar, 0.0, pi);
    }

    static SphericalLocation from_degrees(double range_m, double polar_deg, double azimuth_deg) {
        return SphericalLocation(range_m, deg_to_rad(polar_deg), deg_to_rad(azimuth_deg));
    }

private:
    static double wrap_azimuth(double a) {
        const double two_pi = 2.0 * pi;
        double w = std::fmod(a, two_pi);
        if (w < 0.0) w += two_pi;
        return w;
    }
};

/// Receiver coil axis as a unit vector, parameterized by polar/azimuth angles.
struct Orientation {
    double polar;    // rad
    double azimuth;  // rad

    Orientation(double polar_rad, double azimuth_rad) : polar(polar_rad), azimuth(azimuth_rad) {}

    static Orientation from_degrees(double polar_deg, double azimuth_deg) {
        return Orientation(deg_to_rad(polar_deg), deg_to_rad(azimuth_deg));
    }

    /// Closest angle pair for an arbitrary direction (the vector need not be normalized).
    static Orientation from_vector(const Vec3d& v) {
        const double n = v.norm();
        if (!(n > 0.0)) throw std::domain_error("Orientation: zero direction vector");
        const double z = std::clamp(v.z() / n, -1.0, 1.0);
        double az = std::atan2(v.y(), v.x());
        if (az < 0.0) az += 2.0 * pi;
        return Orientation(std::acos(z), az);
    }

    Vec3d unit_vector() const {
        const double st = std::sin(polar), ct = std::cos(polar);
        const double sp = std::sin(azimuth), cp = std::cos(azimuth);
        return Vec3d(st * cp, st * sp, ct);
    }
};

/// Unconjugated complex dot product sum_k a_k * b_k with a real second factor.
inline std::complex<double> dot_unconjugated(const CVec3d& a, const Vec3d& b) {
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

}  // namespace magbb
