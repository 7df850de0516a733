#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "mitoeval/agreement.hpp"
#include "mitoeval/consensus.hpp"
#include "mitoeval/io.hpp"
#include "mitoeval/random.hpp"
#include "oracles.hpp"

using namespace mitoeval;

namespace {

PointAnnotation anno(const std::string& id, const std::string& rater, const std::string& image,
                     double x, double y, Label label = Label::HE_AND_PHH3) {
    PointAnnotation a;
    a.annotation_id = id;
    a.rater_id = rater;
    a.image_id = image;
    a.x_px = x;
    a.y_px = y;
    a.label = label;
    return a;
}

const ImageIndex kIndex({{"img", 10000, 10000, 1.0}}); // mpp 1: pixels are micrometers

oracles::Partition as_partition(const std::vector<Cluster>& clusters,
                                const std::vector<PointAnnotation>& annotations) {
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < annotations.size(); ++i) by_id[annotations[i].annotation_id] = i;
    oracles::Partition p;
    for (const auto& c : clusters) {
        std::set<std::size_t> members;
        for (const auto& m : c.members) members.insert(by_id.at(m.annotation_id));
        p.insert(std::move(members));
    }
    return p;
}

TEST(Clustering, TwoCloseAnnotationsMerge) {
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 0.0, 0.0),
                                                anno("b", "B", "img", 5.0, 0.0)};
    const auto clusters = cluster_annotations(annos, 7.5, kIndex);
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].distinct_raters().size(), 2u);
    EXPECT_DOUBLE_EQ(clusters[0].center_x(), 2.5);
}

TEST(Clustering, FarAnnotationsStaySeparate) {
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 0.0, 0.0),
                                                anno("b", "B", "img", 20.0, 0.0)};
    const auto clusters = cluster_annotations(annos, 7.5, kIndex);
    EXPECT_EQ(clusters.size(), 2u);
}

TEST(Clustering, CentroidDriftSplitsChain) {
    // 0, 6, 12 um on a line: after {0, 6} the centroid sits at 3, so the
    // point at 12 is 9 um away and opens its own cluster.
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 0.0, 0.0),
                                                anno("b", "B", "img", 6.0, 0.0),
                                                anno("c", "C", "img", 12.0, 0.0)};
    const auto clusters = cluster_annotations(annos, 7.5, kIndex);
    ASSERT_EQ(clusters.size(), 2u);
    EXPECT_EQ(clusters[0].members.size(), 2u);
    EXPECT_DOUBLE_EQ(clusters[0].center_x(), 3.0);
    EXPECT_EQ(clusters[1].members.size(), 1u);
    EXPECT_DOUBLE_EQ(clusters[1].center_x(), 12.0);

    const auto trace = oracles::trace_sequential(annos, 7.5, kIndex);
    ASSERT_EQ(trace.size(), 2u);
    EXPECT_EQ(trace[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(trace[1], (std::vector<std::size_t>{2}));
}

TEST(Clustering, EqualDistanceTieGoesToLowestClusterId) {
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 0.0, 0.0),
                                                anno("b", "B", "img", 10.0, 0.0),
                                                anno("c", "C", "img", 5.0, 0.0)};
    const auto clusters = cluster_annotations(annos, 7.5, kIndex);
    ASSERT_EQ(clusters.size(), 2u);
    EXPECT_EQ(clusters[0].members.size(), 2u); // c joined cluster 0
    EXPECT_EQ(clusters[0].members[1].annotation_id, "c");
}

TEST(Clustering, PartitionAndRadiusSoundness) {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PointAnnotation> annos;
        const int n = 2 + static_cast<int>(rng.below(30));
        for (int i = 0; i < n; ++i)
            annos.push_back(anno("a" + std::to_string(i), "r" + std::to_string(i % 5), "img",
                                 rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)));
        const auto clusters = cluster_annotations(annos, 7.5, kIndex);

        std::size_t total = 0;
        for (const auto& c : clusters) {
            total += c.members.size();
            ASSERT_EQ(c.members.size(), c.join_distances_um.size());
            for (double d : c.join_distances_um) ASSERT_LE(d, 7.5);
        }
        ASSERT_EQ(total, annos.size());
    }
}

TEST(Clustering, OrderRobustOnSeparatedGroups) {
    // Groups with intra-distance <= radius/2 and inter-distance >= 3*radius
    // cluster the same way under any processing order.
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<PointAnnotation> annos;
        const int n_groups = 1 + static_cast<int>(rng.below(4));
        std::vector<std::pair<double, double>> centers;
        while (static_cast<int>(centers.size()) < n_groups) {
            const double cx = rng.uniform(50.0, 950.0);
            const double cy = rng.uniform(50.0, 950.0);
            bool ok = true;
            for (const auto& [ox, oy] : centers) {
                const double d = std::hypot(cx - ox, cy - oy);
                if (d < 3.5 * 7.5) { ok = false; break; }
            }
            if (ok) centers.emplace_back(cx, cy);
        }
        int id = 0;
        for (const auto& [cx, cy] : centers) {
            const int sz = 1 + static_cast<int>(rng.below(4));
            for (int i = 0; i < sz; ++i) {
                const double ang = rng.uniform(0.0, 6.283185307179586);
                const double rad = rng.uniform(0.0, 7.5 / 4.0);
                annos.push_back(anno("a" + std::to_string(id), "r" + std::to_string(id), "img",
                                     cx + rad * std::cos(ang), cy + rad * std::sin(ang)));
                ++id;
            }
        }

        const auto expected = oracles::connected_components(annos, 7.5, kIndex);
        for (int perm = 0; perm < 5; ++perm) {
            auto shuffled = annos;
            rng.shuffle(shuffled);
            EXPECT_EQ(as_partition(cluster_annotations(shuffled, 7.5, kIndex), annos), expected);
        }
    }
}

TEST(Clustering, MatchesStepTraceOnDenseData) {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PointAnnotation> annos;
        const int n = 2 + static_cast<int>(rng.below(20));
        for (int i = 0; i < n; ++i)
            annos.push_back(anno("a" + std::to_string(i), "r" + std::to_string(i % 4), "img",
                                 rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0)));
        const auto clusters = cluster_annotations(annos, 7.5, kIndex);
        const auto trace = oracles::trace_sequential(annos, 7.5, kIndex);
        ASSERT_EQ(clusters.size(), trace.size());
        for (std::size_t c = 0; c < trace.size(); ++c) {
            ASSERT_EQ(clusters[c].members.size(), trace[c].size());
            for (std::size_t m = 0; m < trace[c].size(); ++m)
                EXPECT_EQ(clusters[c].members[m].annotation_id,
                          annos[trace[c][m]].annotation_id);
        }
    }
}

TEST(Consensus, DistinctRaterThreshold) {
    std::vector<PointAnnotation> annos;
    for (int r = 0; r < 6; ++r)
        annos.push_back(anno("a" + std::to_string(r), "r" + std::to_string(r), "img",
                             100.0 + 0.1 * r, 100.0));
    // a second cluster: two annotations, same rater
    annos.push_back(anno("b0", "r0", "img", 500.0, 500.0));
    annos.push_back(anno("b1", "r0", "img", 501.0, 500.0));

    ConsensusConfig config;
    config.min_raters = 6;
    const auto cs = consensus(cluster_annotations(annos, 7.5, kIndex), config);
    ASSERT_EQ(cs.entries.size(), 1u);
    EXPECT_EQ(cs.entries[0].n_raters, 6);

    config.min_raters = 2;
    const auto cs2 = consensus(cluster_annotations(annos, 7.5, kIndex), config);
    EXPECT_EQ(cs2.entries.size(), 1u); // the same-rater pair still counts 1 distinct rater

    config.min_raters = 0;
    EXPECT_THROW(consensus(cluster_annotations(annos, 7.5, kIndex), config), ConfigError);
}

TEST(Consensus, CardinalityMonotoneInThreshold) {
    Rng rng(5);
    std::vector<PointAnnotation> annos;
    for (int i = 0; i < 200; ++i)
        annos.push_back(anno("a" + std::to_string(i), "r" + std::to_string(rng.below(13)), "img",
                             rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0)));
    canonical_sort(annos);
    const auto clusters = cluster_annotations(annos, 7.5, kIndex);
    std::size_t prev = SIZE_MAX;
    for (int t = 1; t <= 13; ++t) {
        ConsensusConfig config;
        config.min_raters = t;
        const auto cs = consensus(clusters, config);
        ASSERT_LE(cs.entries.size(), prev);
        prev = cs.entries.size();
    }
}

TEST(Consensus, DeterministicBitForBit) {
    Rng rng(17);
    std::vector<PointAnnotation> annos;
    for (int i = 0; i < 60; ++i)
        annos.push_back(anno("a" + std::to_string(i), "r" + std::to_string(i % 7), "img",
                             rng.uniform(0.0, 80.0), rng.uniform(0.0, 80.0)));
    const auto c1 = cluster_annotations(annos, 7.5, kIndex);
    const auto c2 = cluster_annotations(annos, 7.5, kIndex);
    ASSERT_EQ(c1.size(), c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        EXPECT_EQ(c1[i].cluster_id, c2[i].cluster_id);
        EXPECT_EQ(c1[i].center_x(), c2[i].center_x());
        EXPECT_EQ(c1[i].center_y(), c2[i].center_y());
    }
}

TEST(LeaveOneOut, ExcludesExactlyOneRater) {
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 0.0, 0.0),
                                                anno("b", "B", "img", 100.0, 0.0)};
    ConsensusConfig config;
    config.min_raters = 1;
    const auto cs = leave_one_out_consensus(annos, "A", config, kIndex);
    ASSERT_EQ(cs.entries.size(), 1u);
    EXPECT_DOUBLE_EQ(cs.entries[0].x_px, 100.0);

    EXPECT_THROW(leave_one_out_consensus(annos, "nobody", config, kIndex), UnknownRaterError);

    // a rater known to the study but absent from the annotations is a no-op
    const std::set<std::string> study = {"A", "B", "C"};
    const auto cs_noop = leave_one_out_consensus(annos, "C", config, kIndex, &study);
    const auto cs_full = build_consensus(annos, config, kIndex);
    EXPECT_EQ(cs_noop.entries.size(), cs_full.entries.size());
}

TEST(Matching, IdenticalSetsMatchPerfectly) {
    std::vector<Point> pts;
    Rng rng(3);
    for (int i = 0; i < 20; ++i)
        pts.push_back({"img", rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
    const auto m = match_points(pts, pts, 7.5, kIndex);
    ASSERT_EQ(m.pairs.size(), 20u);
    EXPECT_TRUE(m.unmatched_left.empty());
    EXPECT_TRUE(m.unmatched_right.empty());
    for (const auto& p : m.pairs) EXPECT_DOUBLE_EQ(p.distance_um, 0.0);
}

TEST(Matching, EmptyRightLeavesLeftUnmatched) {
    const std::vector<Point> left = {{"img", 1.0, 1.0}};
    const std::vector<Point> right;
    const auto m = match_points(left, right, 7.5, kIndex);
    EXPECT_TRUE(m.pairs.empty());
    ASSERT_EQ(m.unmatched_left.size(), 1u);
}

TEST(Matching, GreedyPicksClosestFirstOnCross) {
    // L1 is 3 um from R1 and 6 um from R2; L2 is 5 um from R1 and 7 um from
    // R2. Greedy takes (L1,R1) then (L2,R2); exhaustive search agrees that
    // two pairs is optimal.
    const double l2x = 57.0 / 18.0;
    const double l2y = std::sqrt(25.0 - l2x * l2x);
    const std::vector<Point> left = {{"img", 3.0, 0.0}, {"img", l2x, l2y}};
    const std::vector<Point> right = {{"img", 0.0, 0.0}, {"img", 9.0, 0.0}};
    EXPECT_NEAR(distance_um(left[0], right[0], kIndex), 3.0, 1e-9);
    EXPECT_NEAR(distance_um(left[0], right[1], kIndex), 6.0, 1e-9);
    EXPECT_NEAR(distance_um(left[1], right[0], kIndex), 5.0, 1e-9);
    EXPECT_NEAR(distance_um(left[1], right[1], kIndex), 7.0, 1e-9);

    const auto m = match_points(left, right, 7.5, kIndex);
    ASSERT_EQ(m.pairs.size(), 2u);
    EXPECT_EQ(m.pairs[0].left_idx, 0u);
    EXPECT_EQ(m.pairs[0].right_idx, 0u);
    EXPECT_NEAR(m.pairs[0].distance_um, 3.0, 1e-9);
    EXPECT_EQ(m.pairs[1].left_idx, 1u);
    EXPECT_EQ(m.pairs[1].right_idx, 1u);

    std::vector<std::vector<bool>> compat = {{true, true}, {true, true}};
    EXPECT_EQ(oracles::max_matching_tp(compat), 2);
}

TEST(Matching, GreedyMatchesOptimalOnUniqueCandidates) {
    // When every point has at most one candidate within radius and distances
    // are distinct, greedy equals the optimum exactly.
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Point> left, right;
        const int n = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < n; ++i) {
            const double x = 100.0 * i;
            const double y = rng.uniform(0.0, 10.0);
            left.push_back({"img", x, y});
            if (rng.uniform() < 0.7)
                right.push_back({"img", x + rng.uniform(-5.0, 5.0), y + rng.uniform(-3.0, 3.0)});
        }
        const auto m = match_points(left, right, 7.5, kIndex);
        std::vector<std::vector<bool>> compat(left.size(), std::vector<bool>(right.size(), false));
        for (std::size_t i = 0; i < left.size(); ++i)
            for (std::size_t j = 0; j < right.size(); ++j)
                compat[i][j] = distance_um(left[i], right[j], kIndex) <= 7.5;
        EXPECT_EQ(static_cast<int>(m.pairs.size()), oracles::max_matching_tp(compat));
    }
}

TEST(Matching, MaximalUnderGreedyOrder) {
    Rng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Point> left, right;
        for (int i = 0; i < 8; ++i) {
            left.push_back({"img", rng.uniform(0.0, 30.0), rng.uniform(0.0, 30.0)});
            right.push_back({"img", rng.uniform(0.0, 30.0), rng.uniform(0.0, 30.0)});
        }
        const auto m = match_points(left, right, 7.5, kIndex);
        // no acceptable pair remains with both endpoints free
        for (std::size_t i : m.unmatched_left)
            for (std::size_t j : m.unmatched_right)
                EXPECT_GT(distance_um(left[i], right[j], kIndex), 7.5);
        // pairs are reported in ascending distance order
        for (std::size_t p = 1; p < m.pairs.size(); ++p)
            EXPECT_LE(m.pairs[p - 1].distance_um, m.pairs[p].distance_um);
    }
}

TEST(Prf, ConventionsAndCountIdentities) {
    const PRF r = make_prf(8, 2, 2);
    EXPECT_DOUBLE_EQ(r.precision, 0.8);
    EXPECT_DOUBLE_EQ(r.recall, 0.8);
    EXPECT_DOUBLE_EQ(r.f1, 0.8);

    const PRF empty_pred = make_prf(0, 0, 5);
    EXPECT_DOUBLE_EQ(empty_pred.precision, 1.0);
    EXPECT_DOUBLE_EQ(empty_pred.recall, 0.0);
    EXPECT_DOUBLE_EQ(empty_pred.f1, 0.0);

    const PRF empty_gt = make_prf(0, 3, 0);
    EXPECT_DOUBLE_EQ(empty_gt.precision, 0.0);
    EXPECT_DOUBLE_EQ(empty_gt.recall, 1.0);

    const PRF both_empty = make_prf(0, 0, 0);
    EXPECT_DOUBLE_EQ(both_empty.precision, 1.0);
    EXPECT_DOUBLE_EQ(both_empty.recall, 1.0);
    EXPECT_DOUBLE_EQ(both_empty.f1, 1.0);
}

TEST(Prf, RaterAgainstLooConsensus) {
    // consensus of 10 points; rater hits 8 of them and adds 2 strays
    std::vector<PointAnnotation> rater;
    ConsensusSet cs;
    for (int i = 0; i < 10; ++i)
        cs.entries.push_back({"img", 50.0 * i, 0.0, 6});
    for (int i = 0; i < 8; ++i)
        rater.push_back(anno("m" + std::to_string(i), "R", "img", 50.0 * i + 1.0, 1.0));
    rater.push_back(anno("s1", "R", "img", 2000.0, 500.0));
    rater.push_back(anno("s2", "R", "img", 3000.0, 500.0));

    const PRF r = rater_prf(rater, cs, 7.5, kIndex);
    EXPECT_EQ(r.tp, 8);
    EXPECT_EQ(r.fp, 2);
    EXPECT_EQ(r.fn, 2);
    EXPECT_DOUBLE_EQ(r.f1, 0.8);
    EXPECT_EQ(r.tp + r.fn, static_cast<long>(cs.entries.size()));
    EXPECT_EQ(r.tp + r.fp, static_cast<long>(rater.size()));

    const PRF silent = rater_prf({}, cs, 7.5, kIndex);
    EXPECT_DOUBLE_EQ(silent.precision, 1.0);
    EXPECT_DOUBLE_EQ(silent.recall, 0.0);
    EXPECT_DOUBLE_EQ(silent.f1, 0.0);
}

TEST(CountMatrix, FixtureCounts) {
    const auto doc = load_annotations(std::string(MITOEVAL_DEMO_DIR) + "/annotations_small.json");
    const ImageIndex index(doc.images);
    const LabelFilter filter({Label::HE_AND_PHH3, Label::HE_ONLY});
    const CountMatrix m = mitotic_count_matrix(doc.annotations, filter, index);
    ASSERT_EQ(m.image_ids, (std::vector<std::string>{"img_a", "img_b"}));
    ASSERT_EQ(m.rater_ids, (std::vector<std::string>{"r1", "r2", "r3"}));
    EXPECT_EQ(m.counts[0], (std::vector<long>{2, 2, 1}));
    EXPECT_EQ(m.counts[1], (std::vector<long>{1, 2, 2}));

    // column sums equal per-rater totals after filtering
    const auto filtered = filter_labels(doc.annotations, filter);
    for (std::size_t j = 0; j < m.rater_ids.size(); ++j) {
        long col = 0;
        for (std::size_t i = 0; i < m.image_ids.size(); ++i) col += m.counts[i][j];
        long expected = 0;
        for (const auto& a : filtered)
            if (a.rater_id == m.rater_ids[j]) ++expected;
        EXPECT_EQ(col, expected);
    }

    const CountMatrix zero = mitotic_count_matrix({}, filter, index, nullptr);
    EXPECT_TRUE(zero.rater_ids.empty());
}

TEST(Icc, PerfectAgreementIsOne) {
    CountMatrix m;
    m.image_ids = {"i1", "i2", "i3"};
    m.rater_ids = {"r1", "r2", "r3"};
    m.counts = {{10, 10, 10}, {20, 20, 20}, {30, 30, 30}};
    const IccResult r = icc(m);
    EXPECT_DOUBLE_EQ(r.icc_2_1, 1.0);
    EXPECT_EQ(r.n_images, 3u);
    EXPECT_EQ(r.k_raters, 3u);
}

TEST(Icc, AllConstantIsDegenerate) {
    CountMatrix m;
    m.image_ids = {"i1", "i2"};
    m.rater_ids = {"r1", "r2"};
    m.counts = {{5, 5}, {5, 5}};
    EXPECT_THROW(icc(m), DegenerateError);
}

TEST(Icc, MatchesAnovaOracle) {
    Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        CountMatrix m;
        const std::size_t n = 2 + rng.below(8);
        const std::size_t k = 2 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) m.image_ids.push_back("i" + std::to_string(i));
        for (std::size_t j = 0; j < k; ++j) m.rater_ids.push_back("r" + std::to_string(j));
        m.counts.assign(n, std::vector<long>(k, 0));
        for (auto& row : m.counts)
            for (long& v : row) v = static_cast<long>(rng.below(40));

        const auto oracle = oracles::anova_icc(m.counts);
        if (oracle.degenerate) {
            EXPECT_THROW(icc(m), DegenerateError);
            continue;
        }
        const IccResult r = icc(m);
        EXPECT_NEAR(r.icc_2_1, oracle.icc, 1e-9);
        EXPECT_NEAR(r.ms_r, oracle.ms_r, 1e-9);
        EXPECT_NEAR(r.ms_c, oracle.ms_c, 1e-9);
        EXPECT_NEAR(r.ms_e, oracle.ms_e, 1e-9);
    }
}

TEST(Icc, InvariantUnderShiftAndRowPermutation) {
    CountMatrix m;
    m.image_ids = {"i1", "i2", "i3", "i4"};
    m.rater_ids = {"r1", "r2", "r3"};
    m.counts = {{3, 5, 4}, {10, 9, 12}, {1, 2, 1}, {7, 6, 8}};
    const double base = icc(m).icc_2_1;

    CountMatrix shifted = m;
    for (auto& row : shifted.counts)
        for (long& v : row) v += 11;
    EXPECT_NEAR(icc(shifted).icc_2_1, base, 1e-12);

    CountMatrix permuted = m;
    std::swap(permuted.counts[0], permuted.counts[2]);
    std::swap(permuted.counts[1], permuted.counts[3]);
    EXPECT_NEAR(icc(permuted).icc_2_1, base, 1e-12);
}

TEST(Sweep, RowCountAndValidation) {
    std::vector<PointAnnotation> annos;
    Rng rng(9);
    for (int r = 0; r < 5; ++r)
        for (int i = 0; i < 10; ++i)
            annos.push_back(anno("a" + std::to_string(r) + "_" + std::to_string(i),
                                 "r" + std::to_string(r), "img", rng.uniform(0.0, 400.0),
                                 rng.uniform(0.0, 400.0)));
    canonical_sort(annos);

    ConsensusConfig config;
    const auto rows = threshold_sweep(annos, config, kIndex, 2, 4);
    EXPECT_EQ(rows.size(), 5u * 3u);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LE(std::tie(rows[i - 1].threshold, rows[i - 1].rater_id),
                  std::tie(rows[i].threshold, rows[i].rater_id));

    EXPECT_THROW(threshold_sweep(annos, config, kIndex, 0, 4), ConfigError);
    EXPECT_THROW(threshold_sweep(annos, config, kIndex, 3, 2), ConfigError);
    EXPECT_THROW(threshold_sweep(annos, config, kIndex, 2, 5), ConfigError); // t_max > raters-1
}

TEST(Sweep, SingleOtherRaterAtThresholdOne) {
    const std::vector<PointAnnotation> annos = {anno("a", "A", "img", 10.0, 10.0),
                                                anno("b", "B", "img", 11.0, 10.0)};
    ConsensusConfig config;
    const auto rows = threshold_sweep(annos, config, kIndex, 1, 1);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) {
        EXPECT_EQ(row.prf.tp, 1);
        EXPECT_DOUBLE_EQ(row.prf.f1, 1.0);
    }
}

TEST(Sweep, AgreementTableUsesConfiguredThreshold) {
    std::vector<PointAnnotation> annos;
    for (int r = 0; r < 3; ++r)
        annos.push_back(anno("a" + std::to_string(r), "r" + std::to_string(r), "img",
                             100.0 + 0.01 * r, 100.0));
    ConsensusConfig config;
    config.min_raters = 2;
    const auto rows = agreement_table(annos, config, kIndex);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& row : rows) {
        EXPECT_EQ(row.threshold, 2);
        EXPECT_EQ(row.prf.tp, 1); // each rater hits the consensus of the other two
    }
}

} // namespace
