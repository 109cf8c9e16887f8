#include "magbb/beamform.hpp"

#include "magbb/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace magbb::beamform {

namespace {

Mat7d blkdiag6(const Mat6d& block, double corner) {
    Mat7d m = Mat7d::Zero();
    m.topLeftCorner<6, 6>() = block;
    m(6, 6) = corner;
    return m;
}

}  // namespace

RealDecomposition decompose(const CMat3d& channel, const Orientation& target,
                            double tx_resistance) {
    RealDecomposition dec;
    const Vec3d u = target.unit_vector();
    dec.u_real << u, Vec3d::Zero();
    dec.h_chan_real.topLeftCorner<3, 3>() = channel.real();
    dec.h_chan_real.topRightCorner<3, 3>() = -channel.imag();
    dec.h_chan_real.bottomLeftCorner<3, 3>() = channel.imag();
    dec.h_chan_real.bottomRightCorner<3, 3>() = channel.real();
    dec.r_real = tx_resistance * Mat6d::Identity();
    return dec;
}

Vec6d embed_current(const CVec3d& current) {
    Vec6d stacked;
    stacked << current.real(), current.imag();
    return stacked;
}

CVec3d assemble_current(const Vec6d& stacked) {
    CVec3d current;
    for (int k = 0; k < 3; ++k) current(k) = {stacked(k), stacked(k + 3)};
    return current;
}

HomogenizedProblem build_problem(const RealDecomposition& dec, double p_max, double v_th,
                                 const CoilSpec& rx, const Medium& medium) {
    if (!(p_max > 0.0)) throw std::domain_error("build_problem: p_max must be > 0");
    if (v_th < 0.0) throw std::domain_error("build_problem: v_th must be >= 0");

    // Gram assembly of [H~, -u~] keeps a_matrix PSD to machine precision.
    Eigen::Matrix<double, 6, 7> g;
    g << dec.h_chan_real, -dec.u_real;
    HomogenizedProblem problem;
    problem.a_matrix = g.transpose() * g;
    problem.a_matrix = 0.5 * (problem.a_matrix + problem.a_matrix.transpose());
    problem.power_bound = 2.0 * p_max;
    const double coupling = voltage_coupling_factor(rx, medium);
    problem.voltage_bound = (v_th / coupling) * (v_th / coupling);
    problem.tx_resistance = dec.r_real(0, 0);
    return problem;
}

namespace {

/// Diagonal change of variables beta = D * beta' * D that puts the current
/// block (amperes, up to sqrt(2*P_max/r_t)) and the norm slack (field units,
/// smaller by the channel gain) on the same footing. Without it the
/// interior-point iteration crawls on weak channels.
Vec7d lifted_scaling(const HomogenizedProblem& problem) {
    const double i_scale = std::sqrt(problem.power_bound / problem.tx_resistance);
    const Eigen::SelfAdjointEigenSolver<Mat6d> eig(problem.h_gram(), Eigen::EigenvaluesOnly);
    const double channel_gain = std::sqrt(std::max(eig.eigenvalues()(5), 0.0));
    const double t_scale = std::max(i_scale * channel_gain, 1e-12);
    Vec7d d = Vec7d::Constant(i_scale);
    d(6) = t_scale;
    return d;
}

sdp::SdpProblem lift_to_sdp(const HomogenizedProblem& problem, bool with_voltage,
                            double voltage_margin, const Vec7d& scaling) {
    const auto scaled = [&](const Mat7d& m) -> Mat7d {
        return scaling.asDiagonal() * m * scaling.asDiagonal();
    };
    const auto normalized = [](Mat7d m, sdp::Relation rel, double rhs) -> sdp::Constraint {
        const double norm = std::max(m.norm(), 1e-300);
        return {m / norm, rel, rhs / norm};
    };

    std::vector<sdp::Constraint> constraints;
    const Mat6d r6 = problem.tx_resistance * Mat6d::Identity();
    // Dropping the voltage constraint leaves the problem scale-free (beta = 0
    // is optimal), so the re-solve pins the power budget with equality.
    constraints.push_back(normalized(scaled(blkdiag6(r6, 0.0)),
                                     with_voltage ? sdp::Relation::le : sdp::Relation::eq,
                                     problem.power_bound));
    constraints.push_back(
        normalized(scaled(blkdiag6(problem.h_gram(), -1.0)), sdp::Relation::eq, 0.0));
    if (with_voltage) {
        const Vec6d g = problem.voltage_vector();
        constraints.push_back(normalized(scaled(blkdiag6(g * g.transpose(), 0.0)),
                                         sdp::Relation::ge,
                                         problem.voltage_bound * (1.0 + voltage_margin)));
    }
    Mat7d objective = scaled(problem.a_matrix);
    objective /= std::max(objective.norm(), 1e-300);
    return sdp::SdpProblem(objective, std::move(constraints));
}

}  // namespace

CurrentVector design_current(const CMat3d& channel, const Orientation& target,
                             const DesignParams& params) {
    const RealDecomposition dec = decompose(channel, target, params.tx.resistance);
    const HomogenizedProblem problem =
        build_problem(dec, params.p_max, params.v_th, params.rx, params.medium);

    // The best squared voltage form reachable within the power budget is
    // (2*P_max/r_t) * ||H~^T u~||^2, attained by a rank-1 beta, so voltage
    // feasibility is decided exactly before the solver runs.
    const double best_voltage_form =
        (problem.power_bound / problem.tx_resistance) * problem.voltage_vector().squaredNorm();
    const double bound = problem.voltage_bound * (1.0 + params.voltage_margin);
    const bool reachable = best_voltage_form >= bound * (1.0 + 1e-9);

    bool with_voltage = false;
    switch (params.voltage_mode) {
        case VoltageMode::enforce:
            if (!reachable)
                throw std::runtime_error("design_current: voltage constraint infeasible");
            with_voltage = true;
            break;
        case VoltageMode::automatic: with_voltage = reachable; break;
        case VoltageMode::drop: with_voltage = false; break;
    }

    const Vec7d scaling = lifted_scaling(problem);
    sdp::SdpSolution solution = sdp::solve(
        lift_to_sdp(problem, with_voltage, params.voltage_margin, scaling), params.solver);
    if (solution.status != sdp::SolveStatus::optimal && with_voltage &&
        params.voltage_mode == VoltageMode::automatic) {
        with_voltage = false;
        solution = sdp::solve(lift_to_sdp(problem, false, 0.0, scaling), params.solver);
    }
    if (solution.status != sdp::SolveStatus::optimal)
        throw std::runtime_error("design_current: SDP solve failed with status " +
                                 sdp::to_string(solution.status));
    solution.x_matrix =
        (scaling.asDiagonal() * solution.x_matrix * scaling.asDiagonal()).eval();

    // Rank-1 extraction: i* = sqrt(lambda_max) * q, sign fixed so the slack
    // entry (t = ||h||) is nonnegative.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(solution.x_matrix);
    const int last = static_cast<int>(eig.eigenvalues().size()) - 1;
    const double lambda_max = std::max(eig.eigenvalues()(last), 0.0);
    Eigen::VectorXd q = eig.eigenvectors().col(last);
    if (q(6) < 0.0) q = -q;
    const Vec7d i_star = std::sqrt(lambda_max) * q;

    CurrentVector designed{assemble_current(i_star.head<6>()), target, {}};

    const double power = params.tx.resistance * designed.i.squaredNorm();
    if (!with_voltage || power > problem.power_bound * (1.0 + 1e-6)) {
        if (power > 0.0) designed.i *= std::sqrt(problem.power_bound / power);
    }

    const CVec3d h = channel * designed.i;
    const double h_norm = h.norm();
    const Vec3d u = target.unit_vector();
    if (h_norm > 0.0) {
        const CVec3d direction = h / h_norm;
        double err2 = 0.0;
        for (int k = 0; k < 3; ++k) err2 += std::norm(std::complex<double>(u(k)) - direction(k));
        designed.diagnostics.alignment_error = std::sqrt(err2);
    } else {
        designed.diagnostics.alignment_error = 1.0;
    }
    double positive_sum = 0.0;
    for (int k = 0; k <= last; ++k) positive_sum += std::max(eig.eigenvalues()(k), 0.0);
    designed.diagnostics.rank1_ratio = positive_sum > 0.0 ? lambda_max / positive_sum : 0.0;
    designed.diagnostics.feasible_voltage = with_voltage;
    designed.diagnostics.imag_current_norm = designed.i.imag().norm();
    return designed;
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::grid: return "grid";
        case Scheme::orthonormal3: return "orthonormal3";
        case Scheme::constant: return "constant";
    }
    return "unknown";
}

std::vector<Orientation> direction_grid(int n_cv) {
    if (n_cv < 1) throw std::domain_error("direction_grid: n_cv must be >= 1");
    std::vector<Orientation> directions;
    directions.reserve(static_cast<std::size_t>(n_cv));
    if (n_cv == 1) {
        directions.emplace_back(0.0, 0.0);
        return directions;
    }
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_cv))));
    if (m * m == n_cv) {
        // Product grid over the upper hemisphere, azimuth rows staggered so
        // small grids are not coplanar.
        for (int j = 0; j < m; ++j) {
            const double polar = (j + 0.5) * (pi / 2.0) / m;
            for (int k = 0; k < m; ++k) {
                const double azimuth = 2.0 * pi * (k + static_cast<double>(j) / m) / m;
                directions.emplace_back(polar, azimuth);
            }
        }
        return directions;
    }
    const double golden_angle = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_cv; ++i) {
        const double z = 1.0 - (i + 0.5) / n_cv;
        directions.emplace_back(std::acos(z), std::fmod(i * golden_angle, 2.0 * pi));
    }
    return directions;
}

std::array<Vec3d, 3> orthonormal_triple(const Vec3d& v1, const Vec3d& v2, const Vec3d& v3) {
    std::array<Vec3d, 3> basis;
    const std::array<const Vec3d*, 3> inputs{&v1, &v2, &v3};
    std::array<Vec3d, 3> residual;
    for (int idx = 0; idx < 3; ++idx) {
        Vec3d u = *inputs[idx];
        for (int k = 0; k < idx; ++k) {
            const Vec3d& uk = residual[k];
            u -= (inputs[idx]->dot(uk) / uk.squaredNorm()) * uk;
        }
        if (u.norm() < 1e-9 * inputs[idx]->norm())
            throw std::domain_error("orthonormal_triple: inputs are linearly dependent");
        residual[idx] = u;
        basis[idx] = u / u.norm();
    }
    return basis;
}

CurrentVector constant_current(double p_max, double tx_resistance) {
    if (!(p_max > 0.0)) throw std::domain_error("constant_current: p_max must be > 0");
    if (!(tx_resistance > 0.0))
        throw std::domain_error("constant_current: tx_resistance must be > 0");
    const double amplitude = std::sqrt(2.0 * p_max / (3.0 * tx_resistance));
    CurrentVector vec{CVec3d::Constant(std::complex<double>(amplitude, 0.0)),
                      Orientation(0.0, 0.0),
                      {}};
    vec.diagnostics.rank1_ratio = 1.0;
    return vec;
}

CurrentSet design_set(const SphericalLocation& location, int n_cv, Scheme scheme,
                      const DesignParams& params, std::uint64_t seed) {
    CurrentSet set;
    set.design_location = location;
    set.scheme = scheme;
    set.seed = seed;

    if (scheme == Scheme::constant) {
        set.vectors.push_back(constant_current(params.p_max, params.tx.resistance));
        set.n_cv = 1;
        return set;
    }

    std::vector<Orientation> targets;
    if (scheme == Scheme::orthonormal3) {
        RandomStream stream = RandomStream::for_sample(seed, 0);
        std::array<Vec3d, 3> raw;
        for (auto& v : raw)
            v = Vec3d(stream.next_normal(), stream.next_normal(), stream.next_normal());
        const auto basis = orthonormal_triple(raw[0], raw[1], raw[2]);
        for (const auto& e : basis) targets.push_back(Orientation::from_vector(e));
    } else {
        targets = direction_grid(n_cv);
    }

    const ChannelMatrix channel = channel_matrix(params.tx, params.medium, location);
    set.vectors.reserve(targets.size());
    for (const auto& target : targets)
        set.vectors.push_back(design_current(channel.h_matrix, target, params));
    set.n_cv = static_cast<int>(set.vectors.size());
    return set;
}

}  // namespace magbb::beamform
