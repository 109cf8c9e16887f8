// Current-design checks: block embedding identities, the lifted problem,
// SDR design quality against a random-search oracle, grids and bases.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magbb/beamform.hpp"
#include "magbb/fieldcore.hpp"
#include "magbb/sdp.hpp"

#include <random>

using namespace magbb;
using namespace magbb::beamform;

namespace {

const Medium kAir = Medium::air();
const CoilSpec kTx(0.1, 72, 1.0);
const CoilSpec kRx(0.01, 10, 0.2);
constexpr double kPmax = 50.0;
constexpr double kVth = 0.2;

// Frozen oracle value: (v_th / (omega*mu_r*mu0*N_r*pi*a_r^2))^2 with
// v_th = 0.2 V, a_r = 0.01 m, f = 13.56 MHz, N_r = 10.
constexpr double kVoltageBound = 0.35357945283004294;

DesignParams default_params() {
    return DesignParams{kAir, kTx, kRx, kPmax, kVth, VoltageMode::automatic, 0.0, {}};
}

CMat3d random_complex_channel(std::mt19937_64& gen, double scale = 1.0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    CMat3d h;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h(r, c) = scale * std::complex<double>(unit(gen), unit(gen));
    return h;
}

double alignment_of(const CMat3d& channel, const CVec3d& current, const Vec3d& u) {
    const CVec3d h = channel * current;
    const CVec3d direction = h / h.norm();
    double err2 = 0.0;
    for (int k = 0; k < 3; ++k) err2 += std::norm(std::complex<double>(u(k)) - direction(k));
    return std::sqrt(err2);
}

/// Best alignment error over `draws` random power-feasible complex currents.
/// Independent of the SDP path by construction.
double random_search_oracle(const CMat3d& channel, const Vec3d& u, double p_max,
                            double tx_resistance, int draws, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double i_max = std::sqrt(2.0 * p_max / tx_resistance);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < draws; ++k) {
        CVec3d current;
        for (int c = 0; c < 3; ++c) current(c) = {normal(gen), normal(gen)};
        current *= i_max / current.norm();
        best = std::min(best, alignment_of(channel, current, u));
    }
    return best;
}

}  // namespace

TEST_CASE("decompose: real channels embed block-diagonally") {
    CMat3d h = CMat3d::Zero();
    h(0, 0) = 2.0;
    h(1, 2) = -0.5;
    h(2, 1) = 1.5;
    const RealDecomposition dec = decompose(h, Orientation(0.0, 0.0), 1.0);
    CHECK((dec.h_chan_real.topLeftCorner<3, 3>() - h.real()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dec.h_chan_real.bottomRightCorner<3, 3>() - h.real()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dec.h_chan_real.topRightCorner<3, 3>().cwiseAbs().maxCoeff() == 0.0);
    CHECK(dec.h_chan_real.bottomLeftCorner<3, 3>().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decompose: block product reproduces the complex product") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const CMat3d h = random_complex_channel(gen);
        CVec3d current;
        for (int c = 0; c < 3; ++c) current(c) = {unit(gen), unit(gen)};
        const RealDecomposition dec = decompose(h, Orientation(1.0, 0.5), 1.0);
        const Vec6d stacked = dec.h_chan_real * embed_current(current);
        const CVec3d direct = h * current;
        Vec6d expected;
        expected << direct.real(), direct.imag();
        CHECK((stacked - expected).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((assemble_current(embed_current(current)) - current).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("decompose: axial orientation embeds with zero imaginary half") {
    const RealDecomposition dec =
        decompose(CMat3d::Identity(), Orientation(0.0, 0.0), 2.5);
    Vec6d expected;
    expected << 0, 0, 1, 0, 0, 0;
    CHECK((dec.u_real - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((dec.r_real - 2.5 * Mat6d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_problem: a_matrix is PSD by construction") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 50; ++trial) {
        const CMat3d h = random_complex_channel(gen, 0.1);
        const RealDecomposition dec = decompose(h, Orientation(0.7, 1.9), 1.0);
        const HomogenizedProblem problem = build_problem(dec, kPmax, kVth, kRx, kAir);
        const Eigen::SelfAdjointEigenSolver<Mat7d> eig(problem.a_matrix, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues()(0) >= -1e-10);
    }
}

TEST_CASE("build_problem: perfect alignment annihilates the quadratic form") {
    std::mt19937_64 gen(22);
    const CMat3d h = random_complex_channel(gen, 0.2);
    const Orientation target(1.1, 0.3);
    const RealDecomposition dec = decompose(h, target, 1.0);
    const HomogenizedProblem problem = build_problem(dec, kPmax, kVth, kRx, kAir);

    // Choose i with H i = t u exactly (H is invertible almost surely).
    const double t = 1.7;
    const Vec3d u = target.unit_vector();
    const CVec3d current = h.fullPivLu().solve(t * u.cast<std::complex<double>>());
    Vec7d lifted;
    lifted << embed_current(current), t;
    CHECK(std::abs(lifted.dot(problem.a_matrix * lifted)) < 1e-10);
}

TEST_CASE("build_problem: frozen voltage bound for the reference receiver") {
    const CMat3d h = CMat3d::Identity();
    const RealDecomposition dec = decompose(h, Orientation(0.0, 0.0), 1.0);
    const HomogenizedProblem problem = build_problem(dec, kPmax, kVth, kRx, kAir);
    CHECK(problem.voltage_bound == doctest::Approx(kVoltageBound).epsilon(1e-12));
    CHECK(problem.power_bound == 100.0);
    CHECK_THROWS_AS(build_problem(dec, 0.0, kVth, kRx, kAir), std::domain_error);
    CHECK_THROWS_AS(build_problem(dec, kPmax, -0.1, kRx, kAir), std::domain_error);
}

TEST_CASE("objective correctness: lifted form equals the direct residual") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const CMat3d h = random_complex_channel(gen, 0.5);
        const Orientation target(std::acos(unit(gen)), pi * (unit(gen) + 1.0));
        const RealDecomposition dec = decompose(h, target, 1.0);
        const HomogenizedProblem problem = build_problem(dec, kPmax, kVth, kRx, kAir);
        CVec3d current;
        for (int c = 0; c < 3; ++c) current(c) = {unit(gen), unit(gen)};
        const double t = 2.0 * unit(gen);
        Vec7d lifted;
        lifted << embed_current(current), t;
        const double quad = lifted.dot(problem.a_matrix * lifted);
        const double direct =
            (t * dec.u_real - dec.h_chan_real * embed_current(current)).squaredNorm();
        CHECK(quad == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("design_current beats a 20k random-search oracle on alignment") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(kTx, kAir, loc);
    DesignParams params = default_params();
    params.voltage_mode = VoltageMode::drop;

    std::mt19937_64 gen(808);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const Orientation target(std::acos(unit(gen)), pi * (unit(gen) + 1.0));
        const CurrentVector designed = design_current(channel.h_matrix, target, params);
        const double oracle =
            random_search_oracle(channel.h_matrix, target.unit_vector(), kPmax,
                                 kTx.resistance, 20000, 1000 + trial);
        CHECK(designed.diagnostics.alignment_error <= oracle * 1.05);
    }
}

TEST_CASE("designed vectors respect the power budget") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(kTx, kAir, loc);
    const DesignParams params = default_params();
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Orientation target(std::acos(unit(gen)), pi * (unit(gen) + 1.0));
        const CurrentVector designed = design_current(channel.h_matrix, target, params);
        const double power = kTx.resistance * designed.i.squaredNorm();
        CHECK(power <= 2.0 * kPmax * (1.0 + 1e-6));
    }
}

TEST_CASE("design feasibility at the reference location matches the weak-coil setup") {
    // A 20-turn transmitter with a 10-turn receiver can serve an axial target
    // at 1.2 m, but only marginally; the design must still be voltage-feasible.
    const CoilSpec tx20(0.1, 20, 1.0);
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(tx20, kAir, loc);
    DesignParams params{kAir, tx20, kRx, kPmax, kVth, VoltageMode::automatic, 0.0, {}};
    const CurrentVector designed =
        design_current(channel.h_matrix, Orientation::from_vector(Vec3d(0, 0, -1)), params);
    CHECK(designed.diagnostics.feasible_voltage);

    // Verify by direct field evaluation: the designed current must induce
    // more than v_th at its target orientation.
    const CVec3d h = channel.h_matrix * designed.i;
    const double v_abs = std::abs(
        induced_voltage(h, designed.target_direction, kRx, kAir));
    CHECK(v_abs > kVth);

    // A tangential target at this range is out of reach: fallback flags it.
    const CurrentVector fallback =
        design_current(channel.h_matrix, Orientation::from_vector(Vec3d(1, 0, 0)), params);
    CHECK_FALSE(fallback.diagnostics.feasible_voltage);
    CHECK(kTx.resistance * fallback.i.squaredNorm() ==
          doctest::Approx(2.0 * kPmax).epsilon(1e-9));
}

TEST_CASE("enforce mode raises on an unreachable voltage constraint") {
    const CoilSpec tx20(0.1, 20, 1.0);
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(tx20, kAir, loc);
    DesignParams params{kAir, tx20, kRx, kPmax, kVth, VoltageMode::enforce, 0.0, {}};
    CHECK_THROWS_AS(
        design_current(channel.h_matrix, Orientation::from_vector(Vec3d(1, 0, 0)), params),
        std::runtime_error);
}

TEST_CASE("rank-1 consistency of the extraction") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(kTx, kAir, loc);
    const DesignParams params = default_params();
    std::mt19937_64 gen(32);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const Orientation target(std::acos(unit(gen)), pi * (unit(gen) + 1.0));
        const CurrentVector designed = design_current(channel.h_matrix, target, params);
        CHECK(designed.diagnostics.rank1_ratio >= 0.999);
        CHECK(designed.diagnostics.alignment_error < 1e-4);
    }
}

TEST_CASE("extracted current reproduces the lifted objective when nearly rank-1") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(kTx, kAir, loc);
    const Orientation target = Orientation::from_vector(Vec3d(0.2, 0.6, 0.77));
    const RealDecomposition dec = decompose(channel.h_matrix, target, kTx.resistance);
    const HomogenizedProblem problem = build_problem(dec, kPmax, kVth, kRx, kAir);

    // Solve the lifted relaxation directly and extract as design_current does.
    const Mat6d r6 = kTx.resistance * Mat6d::Identity();
    const auto blk = [](const Mat6d& b, double c) {
        Mat7d m = Mat7d::Zero();
        m.topLeftCorner<6, 6>() = b;
        m(6, 6) = c;
        return m;
    };
    const Vec6d g = problem.voltage_vector();
    std::vector<sdp::Constraint> constraints{
        {blk(r6, 0.0), sdp::Relation::le, problem.power_bound},
        {blk(problem.h_gram(), -1.0), sdp::Relation::eq, 0.0},
        {blk((g * g.transpose()).eval(), 0.0), sdp::Relation::ge, problem.voltage_bound}};
    const sdp::SdpSolution sol =
        sdp::solve(sdp::SdpProblem(problem.a_matrix, std::move(constraints)));
    REQUIRE(sol.status == sdp::SolveStatus::optimal);

    const Eigen::VectorXd lambdas = sol.eigenvalues;  // ascending
    const double lambda_max = lambdas(6);
    REQUIRE(std::abs(lambdas(5)) / lambda_max <= 1e-6);  // nearly rank-1

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.x_matrix);
    Eigen::VectorXd q = eig.eigenvectors().col(6);
    if (q(6) < 0.0) q = -q;
    const Vec7d i_star = std::sqrt(lambda_max) * q;
    const double extracted_objective = i_star.dot(problem.a_matrix * i_star);
    const double lifted_objective = (problem.a_matrix.cwiseProduct(sol.x_matrix)).sum();
    CHECK(std::abs(extracted_objective - lifted_objective) <= 1e-4);
}

TEST_CASE("orientation argmax sits at the designed target") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const ChannelMatrix channel = channel_matrix(kTx, kAir, loc);
    const Orientation target = Orientation::from_vector(Vec3d(0.3, -0.4, 0.866));
    const CurrentVector designed = design_current(channel.h_matrix, target, default_params());
    REQUIRE(designed.diagnostics.feasible_voltage);
    REQUIRE(designed.diagnostics.alignment_error <= 0.05);

    // 1-degree scan over the sphere.
    double best = -1.0;
    Vec3d best_dir = Vec3d::Zero();
    const CVec3d h = channel.h_matrix * designed.i;
    for (int polar_deg = 0; polar_deg <= 180; ++polar_deg) {
        for (int azimuth_deg = 0; azimuth_deg < 360; ++azimuth_deg) {
            const Orientation probe = Orientation::from_degrees(polar_deg, azimuth_deg);
            const double v_abs = std::abs(induced_voltage(h, probe, kRx, kAir));
            if (v_abs > best) {
                best = v_abs;
                best_dir = probe.unit_vector();
            }
        }
    }
    // |v| is even in u, so compare against both the target and its antipode.
    const double cosine = std::abs(best_dir.dot(target.unit_vector()));
    CHECK(std::acos(std::clamp(cosine, -1.0, 1.0)) <= deg_to_rad(2.0));
}

TEST_CASE("direction_grid shapes") {
    CHECK(direction_grid(1).size() == 1);
    CHECK((direction_grid(1)[0].unit_vector() - Vec3d(0, 0, 1)).norm() == 0.0);

    const auto grid36 = direction_grid(36);
    REQUIRE(grid36.size() == 36);
    for (const auto& d : grid36) CHECK(d.unit_vector().z() >= 0.0);
    for (std::size_t a = 0; a < grid36.size(); ++a)
        for (std::size_t b = a + 1; b < grid36.size(); ++b)
            CHECK((grid36[a].unit_vector() - grid36[b].unit_vector()).norm() > 1e-6);

    const auto grid8 = direction_grid(8);  // non-square: sunflower
    REQUIRE(grid8.size() == 8);
    for (const auto& d : grid8) CHECK(d.unit_vector().z() > 0.0);

    CHECK_THROWS_AS(direction_grid(0), std::domain_error);
}

TEST_CASE("direction_grid n=4 has pairwise separation of at least 30 degrees") {
    const auto grid = direction_grid(4);
    REQUIRE(grid.size() == 4);
    double min_separation = pi;
    for (std::size_t a = 0; a < grid.size(); ++a) {
        for (std::size_t b = a + 1; b < grid.size(); ++b) {
            const double cosine =
                std::clamp(grid[a].unit_vector().dot(grid[b].unit_vector()), -1.0, 1.0);
            min_separation = std::min(min_separation, std::acos(cosine));
        }
    }
    CHECK(min_separation >= deg_to_rad(30.0));
    // Frozen for this scheme: the staggered 2x2 grid separates by 45 degrees.
    CHECK(min_separation == doctest::Approx(deg_to_rad(45.0)).epsilon(1e-12));
}

TEST_CASE("orthonormal_triple: textbook case gives the standard basis") {
    const auto basis =
        orthonormal_triple(Vec3d(1, 0, 0), Vec3d(1, 1, 0), Vec3d(1, 1, 1));
    CHECK((basis[0] - Vec3d(1, 0, 0)).norm() < 1e-12);
    CHECK((basis[1] - Vec3d(0, 1, 0)).norm() < 1e-12);
    CHECK((basis[2] - Vec3d(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("orthonormal_triple rejects collinear inputs") {
    CHECK_THROWS_AS(orthonormal_triple(Vec3d(1, 2, 3), Vec3d(2, 4, 6), Vec3d(0, 0, 1)),
                    std::domain_error);
}

TEST_CASE("orthonormal_triple properties on random inputs") {
    std::mt19937_64 gen(888);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3d v1(unit(gen), unit(gen), unit(gen));
        const Vec3d v2(unit(gen), unit(gen), unit(gen));
        const Vec3d v3(unit(gen), unit(gen), unit(gen));
        if (std::abs(v1.cross(v2).dot(v3)) < 1e-3) continue;
        const auto basis = orthonormal_triple(v1, v2, v3);
        for (int a = 0; a < 3; ++a) {
            CHECK(std::abs(basis[a].norm() - 1.0) <= 1e-12);
            for (int b = a + 1; b < 3; ++b) CHECK(std::abs(basis[a].dot(basis[b])) <= 1e-10);
        }
    }
}

TEST_CASE("constant_current matches the balanced full-power formula") {
    const CurrentVector vec = constant_current(kPmax, 1.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(vec.i(k).real() == doctest::Approx(5.773502691896258).epsilon(1e-12));
        CHECK(vec.i(k).imag() == 0.0);
    }
    const double power = 1.0 * vec.i.squaredNorm();
    CHECK(power == doctest::Approx(2.0 * kPmax).epsilon(1e-12));

    const CurrentVector quadrupled = constant_current(4.0 * kPmax, 1.0);
    CHECK(quadrupled.i(0).real() == doctest::Approx(2.0 * vec.i(0).real()).epsilon(1e-12));
    CHECK_THROWS_AS(constant_current(0.0, 1.0), std::domain_error);
}

TEST_CASE("design_set: constant scheme wraps the baseline") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const CurrentSet set = design_set(loc, 1, Scheme::constant, default_params(), 1);
    CHECK(set.n_cv == 1);
    CHECK(set.vectors.size() == 1);
    CHECK(set.scheme == Scheme::constant);
}

TEST_CASE("design_set: orthonormal3 gives pairwise-orthogonal targets") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const CurrentSet set = design_set(loc, 3, Scheme::orthonormal3, default_params(), 42);
    REQUIRE(set.n_cv == 3);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            CHECK(std::abs(set.vectors[a].target_direction.unit_vector().dot(
                      set.vectors[b].target_direction.unit_vector())) < 1e-9);
}

TEST_CASE("design_set: grid-36 at the reference location meets the power bound") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const CurrentSet set = design_set(loc, 36, Scheme::grid, default_params(), 1);
    REQUIRE(set.n_cv == 36);
    for (const auto& vec : set.vectors) {
        CHECK(kTx.resistance * vec.i.squaredNorm() <= 2.0 * kPmax * (1.0 + 1e-6));
        CHECK(vec.diagnostics.feasible_voltage);
    }
}

TEST_CASE("design_set determinism: identical inputs and seeds, identical sets") {
    const SphericalLocation loc = SphericalLocation::from_degrees(1.2, 180.0, 0.0);
    const CurrentSet a = design_set(loc, 3, Scheme::orthonormal3, default_params(), 7);
    const CurrentSet b = design_set(loc, 3, Scheme::orthonormal3, default_params(), 7);
    REQUIRE(a.vectors.size() == b.vectors.size());
    for (std::size_t k = 0; k < a.vectors.size(); ++k)
        CHECK((a.vectors[k].i - b.vectors[k].i).cwiseAbs().maxCoeff() == 0.0);
}
