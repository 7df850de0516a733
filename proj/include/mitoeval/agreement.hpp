#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mitoeval/consensus.hpp"
#include "mitoeval/errors.hpp"
#include "mitoeval/types.hpp"

namespace mitoeval {

struct MatchPair {
    std::size_t left_idx = 0;
    std::size_t right_idx = 0;
    double distance_um = 0.0;
};

struct Matching {
    std::vector<MatchPair> pairs; // sorted by distance ascending
    std::vector<std::size_t> unmatched_left;
    std::vector<std::size_t> unmatched_right;
};

// Greedy one-to-one matching: all same-image cross pairs within radius_um,
// sorted by (distance, left index, right index); a pair is accepted iff both
// endpoints are still free.
template <PointLike L, PointLike R>
Matching match_points(const std::vector<L>& left, const std::vector<R>& right, double radius_um,
                      const ImageIndex& index) {
    if (radius_um <= 0.0) throw ConfigError("radius_um must be positive");

    std::vector<MatchPair> candidates;
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (left[i].image_id != right[j].image_id) continue;
            const double d = distance_um(left[i], right[j], index);
            if (d <= radius_um) candidates.push_back({i, j, d});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
        return std::tie(a.distance_um, a.left_idx, a.right_idx) <
               std::tie(b.distance_um, b.left_idx, b.right_idx);
    });

    Matching m;
    std::vector<bool> left_used(left.size(), false), right_used(right.size(), false);
    for (const auto& c : candidates) {
        if (left_used[c.left_idx] || right_used[c.right_idx]) continue;
        left_used[c.left_idx] = true;
        right_used[c.right_idx] = true;
        m.pairs.push_back(c);
    }
    for (std::size_t i = 0; i < left.size(); ++i)
        if (!left_used[i]) m.unmatched_left.push_back(i);
    for (std::size_t j = 0; j < right.size(); ++j)
        if (!right_used[j]) m.unmatched_right.push_back(j);
    return m;
}

struct PRF {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
};

// Empty-side conventions: P = 1 with no predictions, R = 1 with no ground
// truth, F1 = 0 when P + R = 0. Degenerate images then do not poison averages.
inline PRF make_prf(long tp, long fp, long fn) {
    PRF r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = (tp + fp == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = (r.precision + r.recall == 0.0)
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

// One rater's annotations against a consensus built without that rater.
// Counts are pooled over all images before the ratios are taken.
inline PRF rater_prf(const std::vector<PointAnnotation>& rater_annotations,
                     const ConsensusSet& consensus, double radius_um, const ImageIndex& index) {
    const Matching m = match_points(rater_annotations, consensus.entries, radius_um, index);
    return make_prf(static_cast<long>(m.pairs.size()),
                    static_cast<long>(m.unmatched_left.size()),
                    static_cast<long>(m.unmatched_right.size()));
}

struct CountMatrix {
    std::vector<std::string> image_ids; // rows
    std::vector<std::string> rater_ids; // columns
    std::vector<std::vector<long>> counts;

    std::size_t n_images() const { return image_ids.size(); }
    std::size_t n_raters() const { return rater_ids.size(); }
};

// Rows cover every image in the index, columns every rater present in the
// annotations (or the supplied study rater set), both in sorted order.
inline CountMatrix mitotic_count_matrix(const std::vector<PointAnnotation>& annotations,
                                        const LabelFilter& filter, const ImageIndex& index,
                                        const std::set<std::string>* study_raters = nullptr) {
    CountMatrix m;
    for (const auto& im : index.sorted()) m.image_ids.push_back(im.image_id);
    if (study_raters) {
        m.rater_ids.assign(study_raters->begin(), study_raters->end());
    } else {
        m.rater_ids = distinct_raters(annotations);
    }

    std::map<std::string, std::size_t> row, col;
    for (std::size_t i = 0; i < m.image_ids.size(); ++i) row[m.image_ids[i]] = i;
    for (std::size_t j = 0; j < m.rater_ids.size(); ++j) col[m.rater_ids[j]] = j;

    m.counts.assign(m.n_images(), std::vector<long>(m.n_raters(), 0));
    for (const auto& a : annotations) {
        if (!filter.contains(a.label)) continue;
        auto it = row.find(a.image_id);
        if (it == row.end()) throw ReferenceError("unknown image_id: " + a.image_id);
        auto jt = col.find(a.rater_id);
        if (jt == col.end()) throw ReferenceError("rater not in study: " + a.rater_id);
        ++m.counts[it->second][jt->second];
    }
    return m;
}

struct IccResult {
    std::size_t n_images = 0;
    std::size_t k_raters = 0;
    double icc_2_1 = 0.0;
    double ms_r = 0.0; // between-image mean square
    double ms_c = 0.0; // between-rater mean square
    double ms_e = 0.0; // residual mean square
};

// ICC(2,1): two-way random effects, absolute agreement, single rater.
inline IccResult icc(const CountMatrix& matrix) {
    const std::size_t n = matrix.n_images();
    const std::size_t k = matrix.n_raters();
    if (n < 2 || k < 2) throw ConfigError("ICC needs at least 2 images and 2 raters");

    double grand = 0.0;
    for (const auto& rw : matrix.counts)
        for (long v : rw) grand += static_cast<double>(v);
    grand /= static_cast<double>(n * k);

    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += static_cast<double>(matrix.counts[i][j]);
            col_mean[j] += static_cast<double>(matrix.counts[i][j]);
        }
    }
    for (auto& v : row_mean) v /= static_cast<double>(k);
    for (auto& v : col_mean) v /= static_cast<double>(n);

    double ss_rows = 0.0, ss_cols = 0.0, ss_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
    ss_rows *= static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
    ss_cols *= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double resid =
                static_cast<double>(matrix.counts[i][j]) - row_mean[i] - col_mean[j] + grand;
            ss_err += resid * resid;
        }
    }

    IccResult r;
    r.n_images = n;
    r.k_raters = k;
    r.ms_r = ss_rows / static_cast<double>(n - 1);
    r.ms_c = ss_cols / static_cast<double>(k - 1);
    r.ms_e = ss_err / static_cast<double>((n - 1) * (k - 1));

    const double den = r.ms_r + static_cast<double>(k - 1) * r.ms_e +
                       static_cast<double>(k) / static_cast<double>(n) * (r.ms_c - r.ms_e);
    if (den == 0.0) throw DegenerateError("ICC denominator is zero (no variance anywhere)");
    r.icc_2_1 = (r.ms_r - r.ms_e) / den;
    return r;
}

struct SweepRow {
    int threshold = 0;
    std::string rater_id;
    PRF prf;
};

namespace detail {

inline std::vector<SweepRow> loo_prf_rows(const std::vector<PointAnnotation>& annotations,
                                          const ConsensusConfig& base, const ImageIndex& index,
                                          int t_min, int t_max) {
    const auto filtered = filter_labels(annotations, base.label_filter);
    const auto raters = distinct_raters(filtered);
    const std::set<std::string> rater_set(raters.begin(), raters.end());

    // Per-rater annotation lists in canonical order.
    std::map<std::string, std::vector<PointAnnotation>> by_rater;
    for (const auto& a : filtered) by_rater[a.rater_id].push_back(a);

    std::vector<SweepRow> rows;
    for (const auto& rater : raters) {
        // The clustering does not depend on min_raters, so cluster once per
        // excluded rater and re-threshold per t.
        std::vector<PointAnnotation> rest;
        rest.reserve(filtered.size());
        for (const auto& a : filtered)
            if (a.rater_id != rater) rest.push_back(a);
        const auto clusters = cluster_annotations(rest, base.radius_um, index);

        for (int t = t_min; t <= t_max; ++t) {
            ConsensusConfig cfg = base;
            cfg.min_raters = t;
            const ConsensusSet cs = consensus(clusters, cfg);
            rows.push_back({t, rater, rater_prf(by_rater[rater], cs, base.radius_um, index)});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.threshold, a.rater_id) < std::tie(b.threshold, b.rater_id);
    });
    return rows;
}

} // namespace detail

// Leave-one-out PRF for every rater at every threshold in [t_min, t_max].
inline std::vector<SweepRow> threshold_sweep(const std::vector<PointAnnotation>& annotations,
                                             const ConsensusConfig& base, const ImageIndex& index,
                                             int t_min = 2, int t_max = 7) {
    if (t_min < 1) throw ConfigError("t_min must be at least 1");
    if (t_max < t_min) throw ConfigError("t_max must be at least t_min");
    const auto raters = distinct_raters(filter_labels(annotations, base.label_filter));
    if (t_max > static_cast<int>(raters.size()) - 1)
        throw ConfigError("t_max exceeds rater count - 1 (leave-one-out)");
    return detail::loo_prf_rows(annotations, base, index, t_min, t_max);
}

// Single-threshold agreement table (one row per rater at base.min_raters).
inline std::vector<SweepRow> agreement_table(const std::vector<PointAnnotation>& annotations,
                                             const ConsensusConfig& base, const ImageIndex& index) {
    if (base.min_raters < 1) throw ConfigError("min_raters must be at least 1");
    return detail::loo_prf_rows(annotations, base, index, base.min_raters, base.min_raters);
}

} // namespace mitoeval
