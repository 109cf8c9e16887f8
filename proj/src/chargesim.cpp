#include "magbb/chargesim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace magbb::sim {

ChargingOutcome simulate_cycle(const ChargingPolicy& policy, const ReceiverSample& rx,
                               const CoilSpec& tx, const Medium& medium, double v_th) {
    const ChannelMatrix channel = channel_matrix(tx, medium, rx.location);
    const double dwell = policy.dwell_seconds();
    const double load = 8.0 * rx.rx_coil.resistance;

    ChargingOutcome outcome;
    outcome.step_voltages.reserve(policy.current_set.vectors.size());
    for (const auto& vec : policy.current_set.vectors) {
        const CVec3d h = channel.h_matrix * vec.i;
        const double v_abs = std::abs(induced_voltage(h, rx.orientation, rx.rx_coil, medium));
        outcome.step_voltages.push_back(v_abs);
        if (v_abs > v_th) {
            outcome.harvested_energy += (v_abs * v_abs / load) * dwell;
            ++outcome.charged_steps;
        }
    }
    return outcome;
}

Orientation sample_orientation(RandomStream& stream) {
    return Orientation::from_vector(stream.next_unit_vector3());
}

SphericalLocation sample_location(RandomStream& stream, double range) {
    if (!(range > 0.0)) throw std::domain_error("sample_location: range must be > 0");
    const Vec3d dir = stream.next_unit_vector3();
    const double z = std::clamp(dir.z(), -1.0, 1.0);
    double azimuth = std::atan2(dir.y(), dir.x());
    if (azimuth < 0.0) azimuth += 2.0 * pi;
    return SphericalLocation(range, std::acos(z), azimuth);
}

EnergyCdf cdf_stats(std::vector<double> samples) {
    if (samples.empty()) throw std::domain_error("cdf_stats: empty sample list");
    std::sort(samples.begin(), samples.end());

    EnergyCdf cdf;
    const auto n = samples.size();
    const auto zeros = static_cast<std::size_t>(
        std::count(samples.begin(), samples.end(), 0.0));
    cdf.zero_probability = static_cast<double>(zeros) / static_cast<double>(n);

    const auto quantile = [&](double q) {
        const double position = q * static_cast<double>(n - 1);
        const auto lower = static_cast<std::size_t>(position);
        const auto upper = std::min(lower + 1, n - 1);
        const double weight = position - static_cast<double>(lower);
        return samples[lower] + weight * (samples[upper] - samples[lower]);
    };
    for (const double q : {0.01, 0.10, 0.50, 0.90}) cdf.quantiles[q] = quantile(q);

    cdf.samples = std::move(samples);
    return cdf;
}

EnergyCdf monte_carlo(const ChargingPolicy& policy, int n, const McMode& mode,
                      std::uint64_t seed, const McParams& params) {
    if (n < 1) throw std::domain_error("monte_carlo: n must be >= 1");

    std::vector<double> energies(static_cast<std::size_t>(n));
    const bool fixed = mode.kind == McMode::Kind::fixed_location;

    const auto worker = [&](int begin, int end) {
        for (int idx = begin; idx < end; ++idx) {
            RandomStream stream = RandomStream::for_sample(seed, static_cast<std::uint64_t>(idx));
            ReceiverSample rx{fixed ? mode.location : sample_location(stream, mode.range),
                              sample_orientation(stream), params.rx};
            energies[static_cast<std::size_t>(idx)] =
                simulate_cycle(policy, rx, params.tx, params.medium, params.v_th)
                    .harvested_energy;
        }
    };

    const int threads = std::max(1, params.threads);
    if (threads == 1 || n < 2 * threads) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        const int chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    return cdf_stats(std::move(energies));
}

std::vector<TracePoint> voltage_trace(const ChargingPolicy& policy, const ReceiverSample& rx,
                                      const CoilSpec& tx, const Medium& medium) {
    const ChannelMatrix channel = channel_matrix(tx, medium, rx.location);
    const double dwell = policy.dwell_seconds();

    std::vector<TracePoint> trace;
    trace.reserve(policy.current_set.vectors.size());
    double t = 0.0;
    for (const auto& vec : policy.current_set.vectors) {
        const CVec3d h = channel.h_matrix * vec.i;
        trace.push_back({t, std::abs(induced_voltage(h, rx.orientation, rx.rx_coil, medium))});
        t += dwell;
    }
    return trace;
}

}  // namespace magbb::sim
