// Closed-form near-field magnetics of a tri-axis transmitter coil:
// medium wavenumber, scalar field coefficients, the spherical/Cartesian
// rotation pair, the 3x3 channel matrix and the receiver induced voltage.
//
// The kernels are templated on the real scalar type and accept a complex
// wavenumber so a lossy-medium extension stays a drop-in change; the
// double-typed wrappers below are the library's working API.
#pragma once

#include "magbb/types.hpp"

namespace magbb {

// ---------------------------------------------------------------------------
// Scalar-generic kernels
// ---------------------------------------------------------------------------

/// Rotation from the global Cartesian frame to the local spherical frame
/// (rows: radial, polar, azimuthal direction) at angles (polar, azimuth).
template <typename Scalar>
Mat3<Scalar> gamma_matrix(Scalar polar, Scalar azimuth) {
    using std::cos;
    using std::sin;
    const Scalar st = sin(polar), ct = cos(polar);
    const Scalar sp = sin(azimuth), cp = cos(azimuth);
    Mat3<Scalar> g;
    g << st * cp, st * sp, ct,
         ct * cp, ct * sp, -st,
         -sp,     cp,      Scalar(0);
    return g;
}

/// Inverse rotation (spherical to Cartesian). Equal to gamma^T exactly.
template <typename Scalar>
Mat3<Scalar> t_matrix(Scalar polar, Scalar azimuth) {
    return gamma_matrix(polar, azimuth).transpose();
}

/// Radial field coefficient of a circular loop treated as a magnetic dipole,
/// per unit current: j*k*a^2*N/(2 r^2) * (1 + 1/(j k r)) * exp(-j k r).
template <typename Scalar>
std::complex<Scalar> radial_coefficient(std::complex<Scalar> k, Scalar coil_radius,
                                        Scalar turns, Scalar range) {
    using C = std::complex<Scalar>;
    const C j(0, 1);
    const C kr = k * range;
    const C prefactor = j * k * coil_radius * coil_radius * turns / (Scalar(2) * range * range);
    return prefactor * (C(1) + C(1) / (j * kr)) * std::exp(-j * kr);
}

/// Tangential (polar/azimuthal) field coefficient per unit current:
/// k^2*a^2*N/(4 r) * (1 + 1/(j k r) - 1/(k r)^2) * exp(-j k r).
template <typename Scalar>
std::complex<Scalar> tangential_coefficient(std::complex<Scalar> k, Scalar coil_radius,
                                            Scalar turns, Scalar range) {
    using C = std::complex<Scalar>;
    const C j(0, 1);
    const C kr = k * range;
    const C prefactor = k * k * coil_radius * coil_radius * turns / (Scalar(4) * range);
    return prefactor * (C(1) + C(1) / (j * kr) - C(1) / (kr * kr)) * std::exp(-j * kr);
}

// ---------------------------------------------------------------------------
// Domain API
// ---------------------------------------------------------------------------

/// Propagation constant k = 2*pi*f*sqrt(mu0*mu_r*eps0*eps_r), real for the
/// lossless media this library models.
inline double wavenumber(const Medium& medium) {
    return medium.angular_frequency() *
           std::sqrt(medium.permeability_vacuum * medium.relative_permeability *
                     medium.permittivity_vacuum * medium.relative_permittivity);
}

/// Diagonal channel coefficients at a given range. c_theta and c_phi are the
/// same value by construction (bit-identical).
struct ScalarCoefficients {
    std::complex<double> c_r;
    std::complex<double> c_theta;
    std::complex<double> c_phi;
};

inline ScalarCoefficients scalar_coefficients(const CoilSpec& tx, const Medium& medium,
                                              double range) {
    if (!(range > 0.0)) throw std::domain_error("scalar_coefficients: range must be > 0");
    const std::complex<double> k(wavenumber(medium), 0.0);
    const double turns = static_cast<double>(tx.turns);
    const std::complex<double> c_r = radial_coefficient(k, tx.radius, turns, range);
    const std::complex<double> c_t = tangential_coefficient(k, tx.radius, turns, range);
    return ScalarCoefficients{c_r, c_t, c_t};
}

inline Mat3d gamma_matrix(const SphericalLocation& loc) {
    return gamma_matrix(loc.polar, loc.azimuth);
}

inline Mat3d t_matrix(const SphericalLocation& loc) { return t_matrix(loc.polar, loc.azimuth); }

/// Complex 3x3 map from tri-axis coil currents to the Cartesian magnetic
/// field at `location`: h = T * diag(c_r, c_theta, c_phi) * Gamma * i.
struct ChannelMatrix {
    CMat3d h_matrix;
    SphericalLocation location;
    Mat3d gamma;
    Mat3d t_mat;

    CVec3d field(const CVec3d& current) const { return h_matrix * current; }
};

inline ChannelMatrix channel_matrix(const CoilSpec& tx, const Medium& medium,
                                    const SphericalLocation& loc) {
    const ScalarCoefficients c = scalar_coefficients(tx, medium, loc.range);
    const Mat3d g = gamma_matrix(loc);
    const Mat3d t = g.transpose();
    const CVec3d diag(c.c_r, c.c_theta, c.c_phi);
    const CMat3d h = t.cast<std::complex<double>>() * diag.asDiagonal() *
                     g.cast<std::complex<double>>();
    return ChannelMatrix{h, loc, g, t};
}

/// Magnitude of the induced voltage per unit of field aligned with the coil
/// axis: omega * mu_r * mu0 * N_r * pi * a_r^2.
inline double voltage_coupling_factor(const CoilSpec& rx, const Medium& medium) {
    return medium.angular_frequency() * medium.relative_permeability *
           medium.permeability_vacuum * static_cast<double>(rx.turns) * pi * rx.radius *
           rx.radius;
}

/// Induced voltage phasor v = -omega*mu_r*mu0*N_r*pi*a_r^2 * (h . u).
/// Threshold logic downstream gates on |v|; the sign is a phase convention.
inline std::complex<double> induced_voltage(const CVec3d& h, const Orientation& orient,
                                            const CoilSpec& rx, const Medium& medium) {
    return -voltage_coupling_factor(rx, medium) * dot_unconjugated(h, orient.unit_vector());
}

/// Field-regime diagnostics at a range: the electrical distance kr, the
/// near-field flag (kr < 1) and |c_r| / (2|c_theta|), which tends to 1 deep
/// in the near field and decays in the far field.
struct RegimeReport {
    double kr;
    bool near_field;
    double radial_tangential_ratio;
};

inline RegimeReport field_regime(const Medium& medium, double range) {
    if (!(range > 0.0)) throw std::domain_error("field_regime: range must be > 0");
    const double kr = wavenumber(medium) * range;
    // The ratio is independent of coil radius and turns; evaluate it from the
    // coefficient kernels at a unit coil.
    const std::complex<double> k(wavenumber(medium), 0.0);
    const std::complex<double> c_r = radial_coefficient(k, 1.0, 1.0, range);
    const std::complex<double> c_t = tangential_coefficient(k, 1.0, 1.0, range);
    return RegimeReport{kr, kr < 1.0, std::abs(c_r) / (2.0 * std::abs(c_t))};
}

}  // namespace magbb
