#include <cctype>
#include <cstdint>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mitoeval/mitoeval.hpp"

namespace {

using namespace mitoeval;

LabelFilter parse_label_flag(const std::string& csv) {
    std::set<Label> labels;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        std::string upper = token;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        try {
            labels.insert(label_from_string(upper));
        } catch (const SchemaError&) {
            throw ConfigError("unknown label '" + token +
                              "' (expected he_and_phh3, he_only, phh3_only)");
        }
    }
    if (labels.empty()) throw ConfigError("label list must not be empty");
    return LabelFilter(labels);
}

json label_filter_json(const LabelFilter& f) {
    json out = json::array();
    for (const Label l : f.included) out.push_back(to_string(l));
    return out;
}

struct ConsensusArgs {
    std::string annotations;
    double radius_um = 7.5;
    int min_raters = 6;
    std::string labels = "he_and_phh3,he_only";
    std::string out;
};

int run_consensus(const ConsensusArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "consensus";
    manifest.add_input(args.annotations);

    const AnnotationDocument doc = load_annotations(args.annotations);
    const ImageIndex index(doc.images);
    ConsensusConfig config;
    config.radius_um = args.radius_um;
    config.min_raters = args.min_raters;
    config.label_filter = parse_label_flag(args.labels);
    if (config.radius_um <= 0.0) throw ConfigError("--radius-um must be positive");
    if (config.min_raters < 1) throw ConfigError("--min-raters must be at least 1");

    const ConsensusSet cs = build_consensus(doc.annotations, config, index);
    manifest.config = {{"radius_um", config.radius_um},
                       {"min_raters", config.min_raters},
                       {"labels", label_filter_json(config.label_filter)}};
    manifest.write_output(args.out, serialize_consensus(cs));
    manifest.save(args.out);
    std::cerr << "consensus: " << cs.entries.size() << " entries from "
              << cs.source_raters.size() << " raters\n";
    return 0;
}

struct AgreementArgs {
    std::string annotations;
    double radius_um = 7.5;
    int min_raters = 6;
    std::string labels = "he_and_phh3,he_only";
    std::string phase_tag = "study";
    std::string out;
};

int run_agreement(const AgreementArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "agreement";
    manifest.add_input(args.annotations);

    const AnnotationDocument doc = load_annotations(args.annotations);
    const ImageIndex index(doc.images);
    ConsensusConfig config;
    config.radius_um = args.radius_um;
    config.min_raters = args.min_raters;
    config.label_filter = parse_label_flag(args.labels);
    if (config.radius_um <= 0.0) throw ConfigError("--radius-um must be positive");
    if (config.min_raters < 1) throw ConfigError("--min-raters must be at least 1");

    const auto rows = agreement_table(doc.annotations, config, index);
    manifest.config = {{"radius_um", config.radius_um},
                       {"min_raters", config.min_raters},
                       {"labels", label_filter_json(config.label_filter)},
                       {"phase_tag", args.phase_tag},
                       {"pooling", "counts pooled over images per rater"}};
    manifest.write_output(args.out, serialize_agreement_csv(rows, args.phase_tag));
    manifest.save(args.out);
    return 0;
}

struct SweepArgs {
    std::string annotations;
    double radius_um = 7.5;
    int t_min = 2;
    int t_max = 7;
    std::string labels = "he_and_phh3,he_only";
    std::string phase_tag = "study";
    std::string out;
};

int run_sweep(const SweepArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "sweep";
    manifest.add_input(args.annotations);

    const AnnotationDocument doc = load_annotations(args.annotations);
    const ImageIndex index(doc.images);
    ConsensusConfig config;
    config.radius_um = args.radius_um;
    config.label_filter = parse_label_flag(args.labels);
    if (config.radius_um <= 0.0) throw ConfigError("--radius-um must be positive");

    const auto rows = threshold_sweep(doc.annotations, config, index, args.t_min, args.t_max);
    manifest.config = {{"radius_um", config.radius_um},
                       {"t_min", args.t_min},
                       {"t_max", args.t_max},
                       {"labels", label_filter_json(config.label_filter)},
                       {"phase_tag", args.phase_tag},
                       {"pooling", "counts pooled over images per rater"}};
    manifest.write_output(args.out, serialize_agreement_csv(rows, args.phase_tag));
    manifest.save(args.out);
    return 0;
}

struct IccArgs {
    std::string annotations;
    std::string labels = "he_and_phh3,he_only";
    std::string out;
};

int run_icc(const IccArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "icc";
    manifest.add_input(args.annotations);

    const AnnotationDocument doc = load_annotations(args.annotations);
    const ImageIndex index(doc.images);
    const LabelFilter filter = parse_label_flag(args.labels);
    const CountMatrix matrix = mitotic_count_matrix(doc.annotations, filter, index);
    const IccResult result = icc(matrix);

    manifest.config = {{"labels", label_filter_json(filter)}, {"variant", "ICC(2,1)"}};
    manifest.write_output(args.out, serialize_icc_report(result));
    manifest.save(args.out);
    std::cerr << "icc: " << result.icc_2_1 << " over " << result.n_images << " images x "
              << result.k_raters << " raters\n";
    return 0;
}

struct EvalArgs {
    std::string detections;
    std::string images;
    std::vector<std::string> gt_specs; // name=path
    double radius_um = 7.5;
    double min_confidence = 0.0;
    std::string out;
};

int run_eval(const EvalArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "eval";
    manifest.add_input(args.detections);
    manifest.add_input(args.images);

    const std::vector<Detection> detections = load_detections(args.detections);
    const AnnotationDocument image_doc = load_annotations(args.images);
    const ImageIndex index(image_doc.images);

    std::map<std::string, std::vector<Point>> ground_truths;
    for (const auto& spec : args.gt_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw ConfigError("--gt expects NAME=PATH, got '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);
        if (ground_truths.count(name)) throw ConfigError("duplicate ground-truth name: " + name);
        manifest.add_input(path);
        ground_truths[name] = load_gt_points(path);
        for (const auto& p : ground_truths[name]) index.require(p.image_id);
    }
    if (ground_truths.empty()) throw ConfigError("at least one --gt NAME=PATH is required");

    EvalConfig config;
    config.radius_um = args.radius_um;
    config.min_confidence = args.min_confidence;
    if (config.radius_um <= 0.0) throw ConfigError("--radius-um must be positive");

    const auto results = cross_label_eval(detections, ground_truths, config, index);
    manifest.config = {{"radius_um", config.radius_um}, {"min_confidence", config.min_confidence}};
    manifest.write_output(args.out, serialize_eval_report(results));
    manifest.save(args.out);
    for (const auto& [name, r] : results)
        std::cerr << "eval " << name << ": ap=" << r.ap << " best_f1=" << r.best_f1 << "\n";
    return 0;
}

struct SimulateArgs {
    std::string preset_name = "P1";
    std::string preset_file;
    int n_raters = 13;
    int n_images = 20;
    double density = 10.0;
    double density_spread = 0.8;
    std::uint64_t seed = 1;
    std::string out;
    std::string gt_out;
    std::string preset_out;
};

int run_simulate(const SimulateArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "simulate";
    manifest.seed = args.seed;

    StudyPreset preset;
    if (!args.preset_file.empty()) {
        manifest.add_input(args.preset_file);
        preset = load_preset(args.preset_file);
        preset.seed = args.seed;
    } else {
        preset = make_preset(args.preset_name, args.n_raters, args.seed, args.density);
    }

    const auto images = synthetic_images(args.n_images);
    const SimulatedStudy study = simulate_study(preset, images, args.density, args.density_spread);

    AnnotationDocument doc;
    doc.images = study.images;
    doc.annotations = study.annotations;

    manifest.config = {{"preset", preset.name},
                       {"n_raters", preset.n_raters},
                       {"n_images", args.n_images},
                       {"density_per_mm2", args.density},
                       {"density_spread", args.density_spread}};
    manifest.write_output(args.out, serialize_annotations(doc));
    if (!args.gt_out.empty()) manifest.write_output(args.gt_out, serialize_points(study.ground_truth));
    if (!args.preset_out.empty()) manifest.write_output(args.preset_out, serialize_preset(preset));
    manifest.save(args.out);
    std::cerr << "simulate: " << study.annotations.size() << " annotations, "
              << study.ground_truth.size() << " true MFs\n";
    return 0;
}

struct SplitsArgs {
    std::string cases_file;
    int n_cases = 0;
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
    int folds = 5;
    std::uint64_t seed = 1;
    std::string out;
};

int run_splits(const SplitsArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "splits";
    manifest.seed = args.seed;

    std::vector<std::string> case_ids;
    if (!args.cases_file.empty()) {
        manifest.add_input(args.cases_file);
        const json doc = detail::parse_json(read_file(args.cases_file), "case file");
        detail::check_keys(doc, {"case_ids"}, {}, "case file");
        if (!doc["case_ids"].is_array()) throw SchemaError("case file: 'case_ids' must be an array");
        for (const auto& c : doc["case_ids"]) {
            if (!c.is_string()) throw SchemaError("case file: case ids must be strings");
            case_ids.push_back(c.get<std::string>());
        }
    } else if (args.n_cases > 0) {
        for (int i = 1; i <= args.n_cases; ++i)
            case_ids.push_back("case" + detail::zero_pad(i, 3));
    } else {
        throw ConfigError("either --cases or --n-cases is required");
    }

    const SplitRatios ratios{args.train, args.val, args.test};
    const auto plans = monte_carlo_splits(case_ids, ratios, args.folds, args.seed);
    manifest.config = {{"train", ratios.train}, {"val", ratios.val},   {"test", ratios.test},
                       {"folds", args.folds},   {"n_cases", case_ids.size()}};
    manifest.write_output(args.out, serialize_split_plans(plans, ratios, args.seed));
    manifest.save(args.out);
    return 0;
}

struct PatchesArgs {
    std::string images;
    std::string gt;
    long patch_size = 512;
    double mf_fraction = 0.5;
    long n_patches = 100;
    std::uint64_t seed = 1;
    std::string out;
};

int run_patches(const PatchesArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "patches";
    manifest.seed = args.seed;
    manifest.add_input(args.images);
    manifest.add_input(args.gt);

    const AnnotationDocument image_doc = load_annotations(args.images);
    const std::vector<Point> gt = load_gt_points(args.gt);
    const auto patches = patch_sampling_plan(image_doc.images, gt, args.patch_size,
                                             args.mf_fraction, args.n_patches, args.seed);

    manifest.config = {{"patch_size_px", args.patch_size},
                       {"mf_fraction", args.mf_fraction},
                       {"n_patches", args.n_patches}};
    manifest.write_output(args.out, serialize_patch_plan_csv(patches));
    manifest.save(args.out);
    return 0;
}

struct FuseCheckArgs {
    std::string weights;
    std::string features;
    double step = 1e-6;
    double tolerance = 1e-6;
    std::uint64_t grad_seed = 1;
    std::string out;
};

int run_fuse_check(const FuseCheckArgs& args) {
    RunManifest manifest;
    manifest.subcommand = "fuse-check";
    manifest.add_input(args.weights);
    manifest.add_input(args.features);

    const FusionWeights weights = load_fusion_weights(args.weights);
    const auto [he, phh3] = load_feature_pair(args.features);
    if (args.step <= 0.0) throw ConfigError("--step must be positive");
    if (args.tolerance <= 0.0) throw ConfigError("--tolerance must be positive");

    const FeatureMap fused = fuse_forward(he, phh3, weights);

    // random upstream gradient so the check exercises every output path
    Rng rng(derive_seed(args.grad_seed, "fuse-check/upstream"));
    FeatureMap upstream(fused.c, fused.h, fused.w);
    for (double& v : upstream.data) v = rng.uniform(-1.0, 1.0);

    const GradientCheckReport report = gradient_check(he, phh3, weights, upstream, args.step);
    const bool ok = report.max_rel_error < args.tolerance;

    json summary = {{"c", weights.c},
                    {"h", he.h},
                    {"w", he.w},
                    {"n_components", report.n_components},
                    {"max_rel_error", report.max_rel_error},
                    {"tolerance", args.tolerance},
                    {"pass", ok}};
    manifest.config = {{"step", args.step}, {"tolerance", args.tolerance}};
    manifest.seed = args.grad_seed;
    if (!args.out.empty()) {
        manifest.write_output(args.out, summary.dump(2) + "\n");
        manifest.save(args.out);
    }
    std::cerr << "fuse-check: max relative error " << report.max_rel_error << " over "
              << report.n_components << " components ("
              << (ok ? "within" : "EXCEEDS") << " tolerance " << args.tolerance << ")\n";
    return ok ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mitoeval: multi-rater consensus, agreement, and detector evaluation toolkit"};
    app.set_version_flag("--version", mitoeval::kToolVersion);
    app.require_subcommand(1);

    ConsensusArgs consensus_args;
    auto* cmd_consensus = app.add_subcommand("consensus", "Build a consensus ground truth");
    cmd_consensus->add_option("--annotations", consensus_args.annotations, "Annotation file (JSON)")
        ->required();
    cmd_consensus->add_option("--radius-um", consensus_args.radius_um,
                              "Clustering radius in micrometers")
        ->capture_default_str();
    cmd_consensus->add_option("--min-raters", consensus_args.min_raters,
                              "Distinct raters required per consensus entry")
        ->capture_default_str();
    cmd_consensus->add_option("--labels", consensus_args.labels, "Included labels, comma-separated")
        ->capture_default_str();
    cmd_consensus->add_option("--out", consensus_args.out, "Output consensus file")->required();

    AgreementArgs agreement_args;
    auto* cmd_agreement =
        app.add_subcommand("agreement", "Leave-one-out precision/recall/F1 per rater");
    cmd_agreement->add_option("--annotations", agreement_args.annotations, "Annotation file (JSON)")
        ->required();
    cmd_agreement->add_option("--radius-um", agreement_args.radius_um,
                              "Clustering and matching radius in micrometers")
        ->capture_default_str();
    cmd_agreement->add_option("--min-raters", agreement_args.min_raters,
                              "Consensus threshold")
        ->capture_default_str();
    cmd_agreement->add_option("--labels", agreement_args.labels, "Included labels")
        ->capture_default_str();
    cmd_agreement->add_option("--phase-tag", agreement_args.phase_tag, "Tag written to the CSV")
        ->capture_default_str();
    cmd_agreement->add_option("--out", agreement_args.out, "Output CSV")->required();

    SweepArgs sweep_args;
    auto* cmd_sweep = app.add_subcommand("sweep", "Agreement across consensus thresholds");
    cmd_sweep->add_option("--annotations", sweep_args.annotations, "Annotation file (JSON)")
        ->required();
    cmd_sweep->add_option("--radius-um", sweep_args.radius_um, "Radius in micrometers")
        ->capture_default_str();
    cmd_sweep->add_option("--t-min", sweep_args.t_min, "Lowest consensus threshold")
        ->capture_default_str();
    cmd_sweep->add_option("--t-max", sweep_args.t_max, "Highest consensus threshold")
        ->capture_default_str();
    cmd_sweep->add_option("--labels", sweep_args.labels, "Included labels")->capture_default_str();
    cmd_sweep->add_option("--phase-tag", sweep_args.phase_tag, "Tag written to the CSV")
        ->capture_default_str();
    cmd_sweep->add_option("--out", sweep_args.out, "Output CSV")->required();

    IccArgs icc_args;
    auto* cmd_icc = app.add_subcommand("icc", "Mitotic-count reliability, ICC(2,1)");
    cmd_icc->add_option("--annotations", icc_args.annotations, "Annotation file (JSON)")->required();
    cmd_icc->add_option("--labels", icc_args.labels, "Included labels")->capture_default_str();
    cmd_icc->add_option("--out", icc_args.out, "Output JSON report")->required();

    EvalArgs eval_args;
    auto* cmd_eval = app.add_subcommand("eval", "Score detections against ground-truth definitions");
    cmd_eval->add_option("--detections", eval_args.detections, "Detection file (JSON)")->required();
    cmd_eval->add_option("--images", eval_args.images,
                         "Annotation file providing image metadata")
        ->required();
    cmd_eval->add_option("--gt", eval_args.gt_specs,
                         "Ground truth as NAME=PATH (repeatable)")
        ->required();
    cmd_eval->add_option("--radius-um", eval_args.radius_um, "Matching radius in micrometers")
        ->capture_default_str();
    cmd_eval->add_option("--min-confidence", eval_args.min_confidence,
                         "Discard detections below this confidence")
        ->capture_default_str();
    cmd_eval->add_option("--out", eval_args.out, "Output JSON report")->required();

    SimulateArgs sim_args;
    auto* cmd_simulate = app.add_subcommand("simulate", "Generate a synthetic rater study");
    cmd_simulate->add_option("--preset", sim_args.preset_name, "Built-in preset name (P1 or P2)")
        ->capture_default_str();
    cmd_simulate->add_option("--preset-file", sim_args.preset_file,
                             "Explicit rater profiles (overrides --preset)");
    cmd_simulate->add_option("--n-raters", sim_args.n_raters, "Number of simulated raters")
        ->capture_default_str();
    cmd_simulate->add_option("--n-images", sim_args.n_images, "Number of synthetic images")
        ->capture_default_str();
    cmd_simulate->add_option("--density", sim_args.density, "Mean true MFs per mm2")
        ->capture_default_str();
    cmd_simulate->add_option("--density-spread", sim_args.density_spread,
                             "Relative per-image density spread in [0,1)")
        ->capture_default_str();
    cmd_simulate->add_option("--seed", sim_args.seed, "Study seed")->capture_default_str();
    cmd_simulate->add_option("--out", sim_args.out, "Output annotation file")->required();
    cmd_simulate->add_option("--gt-out", sim_args.gt_out, "Also write the true MF points here");
    cmd_simulate->add_option("--preset-out", sim_args.preset_out,
                             "Also write the resolved rater profiles here");

    SplitsArgs splits_args;
    auto* cmd_splits = app.add_subcommand("splits", "Monte Carlo train/val/test split plans");
    cmd_splits->add_option("--cases", splits_args.cases_file, "JSON file with case_ids");
    cmd_splits->add_option("--n-cases", splits_args.n_cases,
                           "Generate this many case ids instead of --cases");
    cmd_splits->add_option("--train", splits_args.train, "Training ratio")->capture_default_str();
    cmd_splits->add_option("--val", splits_args.val, "Validation ratio")->capture_default_str();
    cmd_splits->add_option("--test", splits_args.test, "Test ratio")->capture_default_str();
    cmd_splits->add_option("--folds", splits_args.folds, "Number of folds")->capture_default_str();
    cmd_splits->add_option("--seed", splits_args.seed, "Split seed")->capture_default_str();
    cmd_splits->add_option("--out", splits_args.out, "Output JSON")->required();

    PatchesArgs patches_args;
    auto* cmd_patches = app.add_subcommand("patches", "Plan training patches over ground truth");
    cmd_patches->add_option("--images", patches_args.images,
                            "Annotation file providing image metadata")
        ->required();
    cmd_patches->add_option("--gt", patches_args.gt, "Ground-truth points file")->required();
    cmd_patches->add_option("--patch-size", patches_args.patch_size, "Patch edge in pixels")
        ->capture_default_str();
    cmd_patches->add_option("--mf-fraction", patches_args.mf_fraction,
                            "Minimum fraction of patches containing an MF")
        ->capture_default_str();
    cmd_patches->add_option("--n-patches", patches_args.n_patches, "Total patches to plan")
        ->capture_default_str();
    cmd_patches->add_option("--seed", patches_args.seed, "Sampling seed")->capture_default_str();
    cmd_patches->add_option("--out", patches_args.out, "Output CSV")->required();

    FuseCheckArgs fuse_args;
    auto* cmd_fuse = app.add_subcommand(
        "fuse-check", "Run the fusion block forward/backward and verify against finite differences");
    cmd_fuse->add_option("--weights", fuse_args.weights, "Fusion weight file (JSON)")->required();
    cmd_fuse->add_option("--features", fuse_args.features, "Feature-map pair file (JSON)")
        ->required();
    cmd_fuse->add_option("--step", fuse_args.step, "Finite-difference step")->capture_default_str();
    cmd_fuse->add_option("--tolerance", fuse_args.tolerance, "Maximum allowed relative error")
        ->capture_default_str();
    cmd_fuse->add_option("--grad-seed", fuse_args.grad_seed, "Seed for the upstream gradient")
        ->capture_default_str();
    cmd_fuse->add_option("--out", fuse_args.out, "Optional JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (cmd_consensus->parsed()) return run_consensus(consensus_args);
        if (cmd_agreement->parsed()) return run_agreement(agreement_args);
        if (cmd_sweep->parsed()) return run_sweep(sweep_args);
        if (cmd_icc->parsed()) return run_icc(icc_args);
        if (cmd_eval->parsed()) return run_eval(eval_args);
        if (cmd_simulate->parsed()) return run_simulate(sim_args);
        if (cmd_splits->parsed()) return run_splits(splits_args);
        if (cmd_patches->parsed()) return run_patches(patches_args);
        if (cmd_fuse->parsed()) return run_fuse_check(fuse_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const SaturationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
