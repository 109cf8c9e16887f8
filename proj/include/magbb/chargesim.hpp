// Charging-cycle simulation: threshold-gated energy harvesting over a
// rotating current set, random receiver sampling and Monte Carlo CDFs.
#pragma once

#include "magbb/beamform.hpp"
#include "magbb/fieldcore.hpp"
#include "magbb/rng.hpp"
#include "magbb/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace magbb::sim {

/// A current set cycled with equal dwell per vector over one charging cycle.
struct ChargingPolicy {
    beamform::CurrentSet current_set;
    double cycle_seconds = 60.0;

    double dwell_seconds() const { return cycle_seconds / current_set.n_cv; }
};

struct ReceiverSample {
    SphericalLocation location;
    Orientation orientation;
    CoilSpec rx_coil;
};

struct ChargingOutcome {
    std::vector<double> step_voltages;  // |v| per current vector, V
    double harvested_energy = 0.0;      // J
    int charged_steps = 0;              // steps with |v| > v_th
};

/// One cycle for one receiver. Steps with |v| > v_th deposit the matched-load
/// average power of a sinusoid with peak |v| over the dwell interval:
/// (|v|^2 / (8 r_r)) * dwell.
ChargingOutcome simulate_cycle(const ChargingPolicy& policy, const ReceiverSample& rx,
                               const CoilSpec& tx, const Medium& medium, double v_th);

/// Orientation uniform on the unit sphere.
Orientation sample_orientation(RandomStream& stream);

/// Location on the sphere of the given radius, direction uniform.
SphericalLocation sample_location(RandomStream& stream, double range);

struct McMode {
    enum class Kind { fixed_location, random_location };
    Kind kind = Kind::fixed_location;
    SphericalLocation location{1.0, 0.0, 0.0};
    double range = 1.0;

    static McMode fixed(const SphericalLocation& loc) {
        return McMode{Kind::fixed_location, loc, loc.range};
    }
    static McMode random(double range) {
        return McMode{Kind::random_location, SphericalLocation(range, 0.0, 0.0), range};
    }
};

/// Sorted harvested-energy samples plus zero-energy probability and
/// quantiles at 1%, 10%, 50% and 90% (linear interpolation between order
/// statistics).
struct EnergyCdf {
    std::vector<double> samples;
    double zero_probability = 0.0;
    std::map<double, double> quantiles;
};

EnergyCdf cdf_stats(std::vector<double> samples);

struct McParams {
    CoilSpec tx;
    CoilSpec rx;
    Medium medium;
    double v_th;
    int threads = 1;
};

/// n receivers drawn per mode, one cycle each. Per-sample RNG streams are
/// derived from (seed, index), so the result is independent of evaluation
/// order and thread count.
EnergyCdf monte_carlo(const ChargingPolicy& policy, int n, const McMode& mode,
                      std::uint64_t seed, const McParams& params);

struct TracePoint {
    double t;      // s, segment start
    double v_abs;  // V
};

/// Piecewise-constant |v| trace over one cycle, one segment per vector.
std::vector<TracePoint> voltage_trace(const ChargingPolicy& policy, const ReceiverSample& rx,
                                      const CoilSpec& tx, const Medium& medium);

}  // namespace magbb::sim
