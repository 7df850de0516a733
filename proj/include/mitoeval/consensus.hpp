#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mitoeval/errors.hpp"
#include "mitoeval/types.hpp"

namespace mitoeval {

struct ConsensusConfig {
    double radius_um = 7.5;
    int min_raters = 6;
    LabelFilter label_filter;
};

struct Cluster {
    int cluster_id = 0;
    std::string image_id;
    double sum_x = 0.0; // member coordinate sums; centroid = sum / n
    double sum_y = 0.0;
    std::vector<PointAnnotation> members;
    std::vector<double> join_distances_um; // distance to centroid at the moment each member joined

    double center_x() const { return sum_x / static_cast<double>(members.size()); }
    double center_y() const { return sum_y / static_cast<double>(members.size()); }

    std::set<std::string> distinct_raters() const {
        std::set<std::string> r;
        for (const auto& m : members) r.insert(m.rater_id);
        return r;
    }
};

struct ConsensusEntry {
    std::string image_id;
    double x_px = 0.0;
    double y_px = 0.0;
    int n_raters = 0;
};

struct ConsensusSet {
    ConsensusConfig config;
    std::vector<ConsensusEntry> entries;
    std::set<std::string> source_raters;
};

// Sequential nearest-centroid assignment. Each annotation, in the order
// given, joins the nearest same-image cluster whose centroid lies within
// radius_um (ties broken by lowest cluster_id) and shifts that centroid to
// the running mean; otherwise it seeds a new cluster. Callers pass
// canonically sorted annotations; the function itself does not re-sort, so
// order-sensitivity stays visible to tests.
inline std::vector<Cluster> cluster_annotations(const std::vector<PointAnnotation>& annotations,
                                                double radius_um, const ImageIndex& index) {
    if (radius_um <= 0.0) throw ConfigError("radius_um must be positive");
    std::vector<Cluster> clusters;
    std::map<std::string, std::vector<std::size_t>> per_image; // image_id -> cluster indices

    for (const auto& a : annotations) {
        const double mpp = index.require(a.image_id).mpp;
        auto& image_clusters = per_image[a.image_id];

        // Compare squared pixel distances: same ordering, no sqrt per cluster.
        const double radius_px = radius_um / mpp;
        const double radius_px2 = radius_px * radius_px;
        std::size_t best = SIZE_MAX;
        double best_d2 = 0.0;
        for (std::size_t ci : image_clusters) {
            const Cluster& c = clusters[ci];
            const double dx = a.x_px - c.center_x();
            const double dy = a.y_px - c.center_y();
            const double d2 = dx * dx + dy * dy;
            if (d2 > radius_px2) continue;
            if (best == SIZE_MAX || d2 < best_d2) { // strict <: equal distance keeps the lower cluster_id
                best = ci;
                best_d2 = d2;
            }
        }

        if (best == SIZE_MAX) {
            Cluster c;
            c.cluster_id = static_cast<int>(clusters.size());
            c.image_id = a.image_id;
            c.sum_x = a.x_px;
            c.sum_y = a.y_px;
            c.members.push_back(a);
            c.join_distances_um.push_back(0.0);
            image_clusters.push_back(clusters.size());
            clusters.push_back(std::move(c));
        } else {
            Cluster& c = clusters[best];
            c.sum_x += a.x_px;
            c.sum_y += a.y_px;
            c.members.push_back(a);
            c.join_distances_um.push_back(mpp * std::sqrt(best_d2));
        }
    }
    return clusters;
}

inline ConsensusSet consensus(const std::vector<Cluster>& clusters, const ConsensusConfig& config) {
    if (config.min_raters < 1) throw ConfigError("min_raters must be at least 1");
    ConsensusSet out;
    out.config = config;
    for (const auto& c : clusters) {
        for (const auto& m : c.members) out.source_raters.insert(m.rater_id);
        if (static_cast<int>(c.distinct_raters().size()) < config.min_raters) continue;
        out.entries.push_back({c.image_id, c.center_x(), c.center_y(),
                               static_cast<int>(c.distinct_raters().size())});
    }
    return out;
}

inline ConsensusSet build_consensus(const std::vector<PointAnnotation>& annotations,
                                    const ConsensusConfig& config, const ImageIndex& index) {
    const auto filtered = filter_labels(annotations, config.label_filter);
    return consensus(cluster_annotations(filtered, config.radius_um, index), config);
}

// Consensus of every rater except one. The study's rater set defaults to the
// raters present in `annotations`; pass it explicitly when the excluded rater
// may legitimately have zero annotations.
inline ConsensusSet leave_one_out_consensus(const std::vector<PointAnnotation>& annotations,
                                            const std::string& excluded_rater,
                                            const ConsensusConfig& config, const ImageIndex& index,
                                            const std::set<std::string>* study_raters = nullptr) {
    bool known = false;
    if (study_raters) {
        known = study_raters->count(excluded_rater) != 0;
    } else {
        for (const auto& a : annotations)
            if (a.rater_id == excluded_rater) { known = true; break; }
    }
    if (!known) throw UnknownRaterError("rater not in study: " + excluded_rater);

    std::vector<PointAnnotation> rest;
    rest.reserve(annotations.size());
    for (const auto& a : annotations)
        if (a.rater_id != excluded_rater) rest.push_back(a);
    return build_consensus(rest, config, index);
}

} // namespace mitoeval
