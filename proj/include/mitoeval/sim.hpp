#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mitoeval/errors.hpp"
#include "mitoeval/random.hpp"
#include "mitoeval/types.hpp"

namespace mitoeval {

struct RaterProfile {
    std::string rater_id;
    double sensitivity = 1.0;       // probability of annotating a true MF
    double fp_rate_per_mm2 = 0.0;   // expected false annotations per mm²
    double jitter_sigma_um = 0.0;   // per-axis Gaussian localization noise
};

struct StudyPreset {
    std::string name;
    int n_raters = 13;
    std::vector<RaterProfile> raters; // resolved per-rater profiles
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string zero_pad(long value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*ld", width, value);
    return buf;
}

} // namespace detail

// Uniform points over the image, Poisson count with mean density · area,
// minimum pairwise separation enforced by rejection. The separation (three
// clustering radii by default) keeps downstream clustering unambiguous.
inline std::vector<Point> generate_ground_truth(const ImageMeta& image, double mf_density_per_mm2,
                                                std::uint64_t seed,
                                                double min_separation_um = 22.5) {
    if (mf_density_per_mm2 < 0.0) throw ConfigError("density must be non-negative");
    Rng rng(seed);
    const long count = rng.poisson(mf_density_per_mm2 * image.area_mm2());

    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(count));
    const double sep_px = min_separation_um / image.mpp;
    const long max_attempts = 1000 * std::max(count, 1L);
    long attempts = 0;
    while (static_cast<long>(points.size()) < count) {
        if (++attempts > max_attempts)
            throw SaturationError("cannot place " + std::to_string(count) +
                                  " points with the requested separation");
        Point p;
        p.image_id = image.image_id;
        p.x_px = rng.uniform(0.0, static_cast<double>(image.width_px));
        p.y_px = rng.uniform(0.0, static_cast<double>(image.height_px));
        bool ok = true;
        for (const auto& q : points) {
            const double dx = p.x_px - q.x_px;
            const double dy = p.y_px - q.y_px;
            if (std::sqrt(dx * dx + dy * dy) < sep_px) { ok = false; break; }
        }
        if (ok) points.push_back(std::move(p));
    }
    return points;
}

// One rater's view of a ground truth: each true point kept with probability
// sensitivity and jittered per axis; false positives placed uniformly but at
// least min_separation from every true point.
inline std::vector<PointAnnotation> simulate_rater(const std::vector<Point>& gt,
                                                   const RaterProfile& profile,
                                                   const ImageMeta& image, std::uint64_t seed,
                                                   double min_separation_um = 22.5) {
    if (profile.sensitivity < 0.0 || profile.sensitivity > 1.0)
        throw ConfigError("sensitivity must lie in [0, 1]");
    if (profile.fp_rate_per_mm2 < 0.0) throw ConfigError("fp_rate_per_mm2 must be non-negative");
    if (profile.jitter_sigma_um < 0.0) throw ConfigError("jitter_sigma_um must be non-negative");

    Rng rng(seed);
    std::vector<PointAnnotation> out;
    const double jitter_px = profile.jitter_sigma_um / image.mpp;
    long serial = 0;

    const auto clamp_x = [&](double v) {
        return std::clamp(v, 0.0, static_cast<double>(image.width_px));
    };
    const auto clamp_y = [&](double v) {
        return std::clamp(v, 0.0, static_cast<double>(image.height_px));
    };
    const auto push = [&](double x, double y) {
        PointAnnotation a;
        a.annotation_id = profile.rater_id + "-" + image.image_id + "-" + detail::zero_pad(serial++, 5);
        a.rater_id = profile.rater_id;
        a.image_id = image.image_id;
        a.x_px = clamp_x(x);
        a.y_px = clamp_y(y);
        a.label = Label::HE_AND_PHH3;
        out.push_back(std::move(a));
    };

    for (const auto& p : gt) {
        if (rng.uniform() >= profile.sensitivity) continue;
        push(p.x_px + jitter_px * rng.normal(0.0, 1.0), p.y_px + jitter_px * rng.normal(0.0, 1.0));
    }

    const long n_fp = rng.poisson(profile.fp_rate_per_mm2 * image.area_mm2());
    const double sep_px = min_separation_um / image.mpp;
    const long max_attempts = 1000 * std::max(n_fp, 1L);
    long attempts = 0;
    for (long placed = 0; placed < n_fp;) {
        if (++attempts > max_attempts)
            throw SaturationError("cannot place false positives with the requested separation");
        const double x = rng.uniform(0.0, static_cast<double>(image.width_px));
        const double y = rng.uniform(0.0, static_cast<double>(image.height_px));
        bool clear = true;
        for (const auto& p : gt) {
            const double dx = x - p.x_px;
            const double dy = y - p.y_px;
            if (std::sqrt(dx * dx + dy * dy) < sep_px) { clear = false; break; }
        }
        if (!clear) continue;
        push(x, y);
        ++placed;
    }
    return out;
}

// Calibration presets. Sensitivity and precision centers follow the two
// annotation phases they emulate; precision maps to a false-positive rate by
// moment matching: fp_rate = sensitivity · density · (1 − precision)/precision.
struct PresetParams {
    double sens_mean, sens_sd;
    double prec_mean, prec_sd;
    double jitter_um;
};

inline PresetParams preset_params(const std::string& name) {
    if (name == "P1") return {0.67, 0.10, 0.53, 0.15, 1.5};
    if (name == "P2") return {0.77, 0.07, 0.78, 0.10, 1.0};
    throw ConfigError("unknown preset: " + name + " (expected P1 or P2)");
}

inline StudyPreset make_preset(const std::string& name, int n_raters, std::uint64_t seed,
                               double mf_density_per_mm2) {
    if (n_raters < 2) throw ConfigError("a study needs at least 2 raters");
    const PresetParams pp = preset_params(name);
    StudyPreset preset;
    preset.name = name;
    preset.n_raters = n_raters;
    preset.seed = seed;
    for (int i = 1; i <= n_raters; ++i) {
        RaterProfile r;
        r.rater_id = "r" + detail::zero_pad(i, 2);
        Rng rng(derive_seed(seed, name + "/profile/" + r.rater_id));
        const double sens = std::clamp(rng.normal(pp.sens_mean, pp.sens_sd), 0.05, 0.98);
        const double prec = std::clamp(rng.normal(pp.prec_mean, pp.prec_sd), 0.10, 0.99);
        r.sensitivity = sens;
        r.fp_rate_per_mm2 = sens * mf_density_per_mm2 * (1.0 - prec) / prec;
        r.jitter_sigma_um = pp.jitter_um;
        preset.raters.push_back(std::move(r));
    }
    return preset;
}

struct SimulatedStudy {
    std::vector<ImageMeta> images;
    std::vector<Point> ground_truth;
    std::vector<PointAnnotation> annotations; // canonical order
};

// Synthetic images match the physical area the real studies standardize on:
// 6320 × 6000 px at 0.25 µm/px is exactly 2.37 mm².
inline std::vector<ImageMeta> synthetic_images(int n_images) {
    if (n_images < 1) throw ConfigError("need at least one image");
    std::vector<ImageMeta> images;
    for (int i = 1; i <= n_images; ++i)
        images.push_back({"img" + detail::zero_pad(i, 3), 6320, 6000, 0.25});
    return images;
}

// Ground-truth seeds mix the study seed with the image id only, so presets
// sharing a seed annotate the same underlying truth.
inline SimulatedStudy simulate_study(const StudyPreset& preset,
                                     const std::vector<ImageMeta>& images,
                                     double mf_density_per_mm2,
                                     double per_image_density_spread = 0.0) {
    SimulatedStudy study;
    study.images = images;

    for (const auto& image : images) {
        double density = mf_density_per_mm2;
        if (per_image_density_spread > 0.0) {
            Rng drng(derive_seed(preset.seed, "gt-density/" + image.image_id));
            const double lo = mf_density_per_mm2 * (1.0 - per_image_density_spread);
            const double hi = mf_density_per_mm2 * (1.0 + per_image_density_spread);
            density = drng.uniform(lo, hi);
        }
        auto gt = generate_ground_truth(image, density, derive_seed(preset.seed, "gt/" + image.image_id));
        for (const auto& p : gt) study.ground_truth.push_back(p);

        for (const auto& profile : preset.raters) {
            auto annos = simulate_rater(
                gt, profile, image,
                derive_seed(preset.seed, preset.name + "/rater/" + profile.rater_id + "/" + image.image_id));
            for (auto& a : annos) study.annotations.push_back(std::move(a));
        }
    }
    canonical_sort(study.annotations);
    return study;
}

struct SplitPlan {
    int fold_id = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

// Monte Carlo cross-validation: each fold is an independent shuffled
// partition (folds are not disjoint across folds).
inline std::vector<SplitPlan> monte_carlo_splits(std::vector<std::string> case_ids,
                                                 const SplitRatios& ratios, int folds,
                                                 std::uint64_t seed) {
    if (case_ids.size() < 3) throw ConfigError("need at least 3 cases to split");
    if (folds < 1) throw ConfigError("need at least 1 fold");
    if (ratios.train <= 0.0 || ratios.val <= 0.0 || ratios.test <= 0.0)
        throw ConfigError("split ratios must be positive");
    if (std::fabs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");

    std::sort(case_ids.begin(), case_ids.end());
    const auto n = static_cast<double>(case_ids.size());
    // the 1e-9 nudge keeps exact products like 0.70·n from landing below the
    // integer they represent
    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 1e-9));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= case_ids.size())
        throw ConfigError("split ratios leave an empty subset");

    std::vector<SplitPlan> plans;
    for (int f = 1; f <= folds; ++f) {
        std::vector<std::string> ids = case_ids;
        Rng rng(derive_seed(seed, "fold/" + std::to_string(f)));
        rng.shuffle(ids);
        SplitPlan plan;
        plan.fold_id = f;
        plan.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
        plan.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        plan.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

struct PatchRect {
    std::string image_id;
    long x0 = 0;
    long y0 = 0;
    long size = 0;
    bool has_mf = false;

    bool contains(double px, double py) const {
        return px >= static_cast<double>(x0) && px <= static_cast<double>(x0 + size) &&
               py >= static_cast<double>(y0) && py <= static_cast<double>(y0 + size);
    }
};

// Plans n_patches square crops per the training recipe: at least
// ceil(mf_fraction · n) of them contain a ground-truth point (placed by
// choosing a random point and a uniform in-bounds offset around it), the
// rest are uniform.
inline std::vector<PatchRect> patch_sampling_plan(const std::vector<ImageMeta>& images,
                                                  const std::vector<Point>& gt_points,
                                                  long patch_size_px, double mf_fraction,
                                                  long n_patches, std::uint64_t seed) {
    if (patch_size_px < 1) throw ConfigError("patch size must be positive");
    if (mf_fraction < 0.0 || mf_fraction > 1.0) throw ConfigError("mf_fraction must lie in [0, 1]");
    if (n_patches < 0) throw ConfigError("n_patches must be non-negative");
    ImageIndex index(images);
    for (const auto& im : images)
        if (im.width_px < patch_size_px || im.height_px < patch_size_px)
            throw ConfigError("image " + im.image_id + " is smaller than the patch size");
    const long n_mf = static_cast<long>(std::ceil(mf_fraction * static_cast<double>(n_patches)));
    if (n_mf > 0 && gt_points.empty())
        throw InfeasibleError("mf_fraction > 0 but there are no ground-truth points");

    Rng rng(derive_seed(seed, "patches"));
    std::vector<PatchRect> patches;
    patches.reserve(static_cast<std::size_t>(n_patches));

    const auto contains_point = [&](const PatchRect& r) {
        for (const auto& p : gt_points)
            if (p.image_id == r.image_id && r.contains(p.x_px, p.y_px)) return true;
        return false;
    };

    for (long i = 0; i < n_mf; ++i) {
        const Point& p = gt_points[rng.below(gt_points.size())];
        const ImageMeta& im = index.require(p.image_id);
        // x0 ranges over every in-bounds offset whose closed rect contains p
        const long lo_x = std::max(0L, static_cast<long>(std::ceil(p.x_px)) - patch_size_px);
        const long hi_x = std::min(im.width_px - patch_size_px, static_cast<long>(std::floor(p.x_px)));
        const long lo_y = std::max(0L, static_cast<long>(std::ceil(p.y_px)) - patch_size_px);
        const long hi_y = std::min(im.height_px - patch_size_px, static_cast<long>(std::floor(p.y_px)));
        PatchRect r;
        r.image_id = p.image_id;
        r.x0 = lo_x + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi_x - lo_x + 1)));
        r.y0 = lo_y + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi_y - lo_y + 1)));
        r.size = patch_size_px;
        r.has_mf = true;
        patches.push_back(std::move(r));
    }

    if (n_patches > n_mf) {
        std::vector<ImageMeta> sorted_images = images;
        std::sort(sorted_images.begin(), sorted_images.end(),
                  [](const ImageMeta& a, const ImageMeta& b) { return a.image_id < b.image_id; });
        for (long i = n_mf; i < n_patches; ++i) {
            const ImageMeta& im = sorted_images[rng.below(sorted_images.size())];
            PatchRect r;
            r.image_id = im.image_id;
            r.x0 = static_cast<long>(rng.below(static_cast<std::uint64_t>(im.width_px - patch_size_px + 1)));
            r.y0 = static_cast<long>(rng.below(static_cast<std::uint64_t>(im.height_px - patch_size_px + 1)));
            r.size = patch_size_px;
            r.has_mf = contains_point(r);
            patches.push_back(std::move(r));
        }
    }
    return patches;
}

} // namespace mitoeval
