// Current-vector design for the tri-axis transmitter: real decomposition of
// the complex channel, homogenized lifting with a slack norm variable,
// semidefinite relaxation, dominant-eigenvector extraction, and the
// current-set generation schemes (hemisphere grid, orthonormal triple,
// constant baseline).
#pragma once

#include "magbb/fieldcore.hpp"
#include "magbb/sdp.hpp"
#include "magbb/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace magbb::beamform {

/// Real embedding of the design inputs. A complex matrix H becomes
/// [[Re H, -Im H], [Im H, Re H]] so that the block product applied to
/// [Re i; Im i] reproduces [Re(H i); Im(H i)].
struct RealDecomposition {
    Vec6d u_real;       // [u; 0]; physical orientations are real
    Mat6d h_chan_real;  // block embedding of the 3x3 complex channel
    Mat6d r_real;       // block form of R = r_t * I
};

RealDecomposition decompose(const CMat3d& channel, const Orientation& target,
                            double tx_resistance);

Vec6d embed_current(const CVec3d& current);
CVec3d assemble_current(const Vec6d& stacked);

/// The lifted 7x7 design problem: quadratic objective [i; t]^T A [i; t] with
/// A = [[H~^T H~, -H~^T u~], [-u~^T H~, ||u~||^2]], plus the power bound
/// 2*P_max and the squared field threshold the voltage constraint needs.
struct HomogenizedProblem {
    Mat7d a_matrix;
    double power_bound;    // 2 * P_max, W
    double voltage_bound;  // v_th^2 / (omega * mu_r * mu0 * N_r * pi * a_r^2)^2
    double tx_resistance;  // ohm

    Mat6d h_gram() const { return a_matrix.topLeftCorner<6, 6>(); }
    Vec6d voltage_vector() const { return -a_matrix.topRightCorner<6, 1>(); }  // H~^T u~
};

HomogenizedProblem build_problem(const RealDecomposition& dec, double p_max, double v_th,
                                 const CoilSpec& rx, const Medium& medium);

enum class VoltageMode {
    automatic,  // enforce the voltage constraint, fall back when infeasible
    enforce,    // fail instead of falling back
    drop        // design for alignment only, at full power
};

struct DesignParams {
    Medium medium;
    CoilSpec tx;
    CoilSpec rx;
    double p_max;  // W
    double v_th;   // V
    VoltageMode voltage_mode = VoltageMode::automatic;
    /// Relative margin applied to the voltage bound (strict ">" handling).
    double voltage_margin = 0.0;
    sdp::SolveOptions solver;
};

struct Diagnostics {
    double alignment_error = 0.0;   // || u - h/||h|| ||
    double rank1_ratio = 0.0;       // lambda_max / sum(lambda)
    bool feasible_voltage = false;  // designed with the voltage constraint active
    double imag_current_norm = 0.0; // || Im i ||
};

struct CurrentVector {
    CVec3d i;  // A
    Orientation target_direction;
    Diagnostics diagnostics;
};

/// Designs the current vector for one target orientation against the channel
/// at the design location. When the voltage constraint cannot be met within
/// the power budget, the re-solve drops it, pins the power to the budget and
/// flags feasible_voltage = false.
CurrentVector design_current(const CMat3d& channel, const Orientation& target,
                             const DesignParams& params);

enum class Scheme { grid, orthonormal3, constant };

std::string to_string(Scheme scheme);

/// Target directions covering the upper hemisphere: an m x m product grid in
/// (polar, azimuth) with row-staggered azimuths when n_cv = m^2, otherwise a
/// sunflower-spiral sampling. Antipodes are redundant because the induced
/// voltage is gated on magnitude.
std::vector<Orientation> direction_grid(int n_cv);

/// Gram-Schmidt orthonormalization of three independent vectors.
/// Throws std::domain_error when a residual collapses below 1e-9 of the
/// input norm (linear dependence).
std::array<Vec3d, 3> orthonormal_triple(const Vec3d& v1, const Vec3d& v2, const Vec3d& v3);

/// Balanced maximum-power baseline i = sqrt(2*P_max/(3*r_t)) * [1,1,1]^T.
CurrentVector constant_current(double p_max, double tx_resistance);

struct CurrentSet {
    std::vector<CurrentVector> vectors;
    int n_cv = 0;
    SphericalLocation design_location{1.0, 0.0, 0.0};
    Scheme scheme = Scheme::grid;
    std::uint64_t seed = 0;
};

/// One designed CurrentVector per target direction, all against the channel
/// at `location`. The seed drives the orthonormal3 scheme's random vectors.
CurrentSet design_set(const SphericalLocation& location, int n_cv, Scheme scheme,
                      const DesignParams& params, std::uint64_t seed);

}  // namespace magbb::beamform
