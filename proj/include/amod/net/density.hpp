#pragma once

#include <cmath>
#include <vector>

#include "amod/common/error.hpp"
#include "amod/common/rng.hpp"
#include "amod/net/partition.hpp"
#include "amod/net/shortest_paths.hpp"

namespace amod::net {

// Node-level demand weights. Globally normalized to 1; the per-region slice
// sums equal the regional origin marginals used to build it.
class DemandDensity {
  public:
    DemandDensity() = default;

    DemandDensity(std::vector<double> phi, const RegionPartition& partition) : phi_(std::move(phi)) {
        double total = 0.0;
        for (double w : phi_) {
            if (w < 0.0) throw ConfigError("demand density weights must be nonnegative");
            total += w;
        }
        if (!(total > 0.0)) throw ConfigError("demand density has zero total mass");
        for (double& w : phi_) w /= total;
        build_cache(partition);
    }

    // Per-region hotspot mixture: regional mass spread as a Gaussian kernel of
    // graph distance around a hotspot node, with a small floor on every node.
    static DemandDensity hotspot_mixture(const RoadGraph& g, const RegionPartition& partition,
                                         const DistanceMatrix& dist, const std::vector<double>& regional_mass,
                                         const std::vector<int>& hotspot_nodes, double bandwidth_km,
                                         double floor_weight = 1e-6) {
        if (static_cast<int>(regional_mass.size()) != partition.region_count ||
            static_cast<int>(hotspot_nodes.size()) != partition.region_count)
            throw ConfigError("hotspot mixture needs one mass and one hotspot per region");
        if (!(bandwidth_km > 0.0)) throw ConfigError("hotspot bandwidth must be positive");
        double mass_total = 0.0;
        for (double m : regional_mass) {
            if (m < 0.0) throw ConfigError("regional masses must be nonnegative");
            mass_total += m;
        }
        if (std::abs(mass_total - 1.0) > 1e-6) throw ConfigError("regional masses must sum to 1");

        std::vector<double> phi(g.node_count(), 0.0);
        for (int r = 0; r < partition.region_count; ++r) {
            const int h = hotspot_nodes[r];
            if (h < 0 || h >= g.node_count()) throw ConfigError("hotspot node out of range");
            double region_total = 0.0;
            for (int q : partition.members[r]) {
                const double d = dist.dist(h, q);
                phi[q] = std::exp(-d * d / (2.0 * bandwidth_km * bandwidth_km)) + floor_weight;
                region_total += phi[q];
            }
            for (int q : partition.members[r]) phi[q] *= regional_mass[r] / region_total;
        }
        return DemandDensity(std::move(phi), partition);
    }

    double phi(int node) const { return phi_[static_cast<std::size_t>(node)]; }
    const std::vector<double>& values() const { return phi_; }
    double region_sum(int region) const { return region_sum_[static_cast<std::size_t>(region)]; }

    // node within region, weighted by phi restricted to the region
    int sample_node_in_region(int region, Rng& rng) const {
        const auto& nodes = region_nodes_[static_cast<std::size_t>(region)];
        const auto& cum = region_cum_[static_cast<std::size_t>(region)];
        if (cum.empty() || !(cum.back() > 0.0))
            throw ConfigError("cannot sample from region " + std::to_string(region) + ": zero demand mass");
        const double t = rng.uniform01() * cum.back();
        std::size_t lo = 0, hi = cum.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cum[mid] <= t)
                lo = mid + 1;
            else
                hi = mid;
        }
        return nodes[lo];
    }

  private:
    void build_cache(const RegionPartition& partition) {
        const int R = partition.region_count;
        region_nodes_.assign(R, {});
        region_cum_.assign(R, {});
        region_sum_.assign(R, 0.0);
        for (std::size_t i = 0; i < phi_.size(); ++i) {
            const int r = partition.assignment[i];
            region_nodes_[r].push_back(static_cast<int>(i));
            region_sum_[r] += phi_[i];
        }
        for (int r = 0; r < R; ++r) {
            double acc = 0.0;
            region_cum_[r].reserve(region_nodes_[r].size());
            for (int q : region_nodes_[r]) {
                acc += phi_[static_cast<std::size_t>(q)];
                region_cum_[r].push_back(acc);
            }
        }
    }

    std::vector<double> phi_;
    std::vector<std::vector<int>> region_nodes_;
    std::vector<std::vector<double>> region_cum_;
    std::vector<double> region_sum_;
};

inline std::vector<double> regional_marginals(const DemandDensity& density, const RegionPartition& partition) {
    std::vector<double> out(partition.region_count, 0.0);
    for (std::size_t i = 0; i < density.values().size(); ++i) out[partition.assignment[i]] += density.values()[i];
    return out;
}

}  // namespace amod::net
