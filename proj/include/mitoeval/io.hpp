#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mitoeval/agreement.hpp"
#include "mitoeval/consensus.hpp"
#include "mitoeval/detection.hpp"
#include "mitoeval/errors.hpp"
#include "mitoeval/fusion.hpp"
#include "mitoeval/sim.hpp"
#include "mitoeval/types.hpp"

namespace mitoeval {

using nlohmann::json;

namespace detail {

inline json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError(what + ": not valid JSON");
    return j;
}

inline void check_keys(const json& obj, const std::set<std::string>& required,
                       const std::set<std::string>& optional, const std::string& what) {
    if (!obj.is_object()) throw SchemaError(what + ": expected an object");
    for (const auto& key : required)
        if (!obj.contains(key)) throw SchemaError(what + ": missing field '" + key + "'");
    for (const auto& [key, value] : obj.items())
        if (!required.count(key) && !optional.count(key))
            throw SchemaError(what + ": unexpected field '" + key + "'");
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& what) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw SchemaError(what + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

inline double get_number(const json& obj, const std::string& key, const std::string& what) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(what + ": field '" + key + "' must be a number");
    return v.get<double>();
}

inline long get_integer(const json& obj, const std::string& key, const std::string& what) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw SchemaError(what + ": field '" + key + "' must be an integer");
    return v.get<long>();
}

// Shortest decimal form that round-trips, via the JSON serializer.
inline std::string format_number(double v) { return json(v).dump(); }

} // namespace detail

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

// --- annotation documents ---------------------------------------------------

inline AnnotationDocument parse_annotations(const std::string& text) {
    const json doc = detail::parse_json(text, "annotation file");
    detail::check_keys(doc, {"images", "annotations"}, {}, "annotation file");
    if (!doc["images"].is_array()) throw SchemaError("annotation file: 'images' must be an array");
    if (!doc["annotations"].is_array())
        throw SchemaError("annotation file: 'annotations' must be an array");

    AnnotationDocument out;
    for (const auto& jim : doc["images"]) {
        detail::check_keys(jim, {"image_id", "width_px", "height_px", "mpp_um_per_px"}, {}, "image");
        ImageMeta im;
        im.image_id = detail::get_string(jim, "image_id", "image");
        im.width_px = detail::get_integer(jim, "width_px", "image");
        im.height_px = detail::get_integer(jim, "height_px", "image");
        im.mpp = detail::get_number(jim, "mpp_um_per_px", "image");
        if (im.width_px < 1 || im.height_px < 1)
            throw RangeError("image " + im.image_id + ": dimensions must be at least 1 px");
        if (!(im.mpp > 0.0)) throw RangeError("image " + im.image_id + ": mpp must be positive");
        out.images.push_back(std::move(im));
    }
    const ImageIndex index(out.images); // rejects duplicate image ids

    std::set<std::string> seen_ids;
    for (const auto& ja : doc["annotations"]) {
        detail::check_keys(ja, {"annotation_id", "rater_id", "image_id", "x_px", "y_px", "label"},
                           {}, "annotation");
        PointAnnotation a;
        a.annotation_id = detail::get_string(ja, "annotation_id", "annotation");
        a.rater_id = detail::get_string(ja, "rater_id", "annotation");
        a.image_id = detail::get_string(ja, "image_id", "annotation");
        a.x_px = detail::get_number(ja, "x_px", "annotation");
        a.y_px = detail::get_number(ja, "y_px", "annotation");
        a.label = label_from_string(detail::get_string(ja, "label", "annotation"));
        if (!seen_ids.insert(a.annotation_id).second)
            throw SchemaError("duplicate annotation_id: " + a.annotation_id);
        const ImageMeta& im = index.require(a.image_id);
        if (a.x_px < 0.0 || a.x_px > static_cast<double>(im.width_px) || a.y_px < 0.0 ||
            a.y_px > static_cast<double>(im.height_px))
            throw RangeError("annotation " + a.annotation_id + ": coordinates outside image " +
                             im.image_id);
        out.annotations.push_back(std::move(a));
    }

    std::sort(out.images.begin(), out.images.end(),
              [](const ImageMeta& a, const ImageMeta& b) { return a.image_id < b.image_id; });
    canonical_sort(out.annotations);
    return out;
}

inline AnnotationDocument load_annotations(const std::string& path) {
    return parse_annotations(read_file(path));
}

inline std::string serialize_annotations(const AnnotationDocument& doc) {
    json out;
    out["images"] = json::array();
    for (const auto& im : doc.images) {
        out["images"].push_back({{"image_id", im.image_id},
                                 {"width_px", im.width_px},
                                 {"height_px", im.height_px},
                                 {"mpp_um_per_px", im.mpp}});
    }
    out["annotations"] = json::array();
    for (const auto& a : doc.annotations) {
        out["annotations"].push_back({{"annotation_id", a.annotation_id},
                                      {"rater_id", a.rater_id},
                                      {"image_id", a.image_id},
                                      {"x_px", a.x_px},
                                      {"y_px", a.y_px},
                                      {"label", to_string(a.label)}});
    }
    return out.dump(2) + "\n";
}

// --- detection documents -----------------------------------------------------

inline std::vector<Detection> parse_detections(const std::string& text) {
    const json doc = detail::parse_json(text, "detection file");
    detail::check_keys(doc, {"detections"}, {}, "detection file");
    if (!doc["detections"].is_array())
        throw SchemaError("detection file: 'detections' must be an array");

    std::vector<Detection> out;
    for (const auto& jd : doc["detections"]) {
        detail::check_keys(jd, {"image_id", "x_px", "y_px", "confidence"}, {"box"}, "detection");
        Detection d;
        d.image_id = detail::get_string(jd, "image_id", "detection");
        d.x_px = detail::get_number(jd, "x_px", "detection");
        d.y_px = detail::get_number(jd, "y_px", "detection");
        d.confidence = detail::get_number(jd, "confidence", "detection");
        if (d.confidence < 0.0 || d.confidence > 1.0)
            throw RangeError("detection confidence must lie in [0, 1]");
        if (jd.contains("box")) {
            const auto& jb = jd["box"];
            if (!jb.is_array() || jb.size() != 4)
                throw SchemaError("detection box must be [x0, y0, x1, y1]");
            for (const auto& v : jb)
                if (!v.is_number()) throw SchemaError("detection box entries must be numbers");
            Box b{jb[0].get<double>(), jb[1].get<double>(), jb[2].get<double>(), jb[3].get<double>()};
            if (!(b.x0 < b.x1) || !(b.y0 < b.y1))
                throw RangeError("detection box must satisfy x0 < x1 and y0 < y1");
            if (std::fabs((b.x0 + b.x1) / 2.0 - d.x_px) > 1e-6 ||
                std::fabs((b.y0 + b.y1) / 2.0 - d.y_px) > 1e-6)
                throw RangeError("detection center must be the box midpoint");
            d.box = b;
        }
        out.push_back(std::move(d)); // input order preserved: it breaks confidence ties
    }
    return out;
}

inline std::vector<Detection> load_detections(const std::string& path) {
    return parse_detections(read_file(path));
}

inline std::string serialize_detections(const std::vector<Detection>& detections) {
    json out;
    out["detections"] = json::array();
    for (const auto& d : detections) {
        json jd = {{"image_id", d.image_id},
                   {"x_px", d.x_px},
                   {"y_px", d.y_px},
                   {"confidence", d.confidence}};
        if (d.box) jd["box"] = {d.box->x0, d.box->y0, d.box->x1, d.box->y1};
        out["detections"].push_back(std::move(jd));
    }
    return out.dump(2) + "\n";
}

// --- consensus documents ------------------------------------------------------

inline std::string serialize_consensus(const ConsensusSet& cs) {
    json labels = json::array();
    for (const Label l : cs.config.label_filter.included) labels.push_back(to_string(l));
    json out;
    out["config"] = {{"radius_um", cs.config.radius_um},
                     {"min_raters", cs.config.min_raters},
                     {"labels", std::move(labels)}};
    out["entries"] = json::array();
    for (const auto& e : cs.entries) {
        out["entries"].push_back({{"image_id", e.image_id},
                                  {"x_px", e.x_px},
                                  {"y_px", e.y_px},
                                  {"n_raters", e.n_raters}});
    }
    return out.dump(2) + "\n";
}

inline ConsensusSet parse_consensus(const std::string& text) {
    const json doc = detail::parse_json(text, "consensus file");
    detail::check_keys(doc, {"config", "entries"}, {}, "consensus file");
    const json& jc = doc["config"];
    detail::check_keys(jc, {"radius_um", "min_raters", "labels"}, {}, "consensus config");

    ConsensusSet cs;
    cs.config.radius_um = detail::get_number(jc, "radius_um", "consensus config");
    cs.config.min_raters = static_cast<int>(detail::get_integer(jc, "min_raters", "consensus config"));
    if (!jc["labels"].is_array()) throw SchemaError("consensus config: 'labels' must be an array");
    std::set<Label> labels;
    for (const auto& jl : jc["labels"]) {
        if (!jl.is_string()) throw SchemaError("consensus config: labels must be strings");
        labels.insert(label_from_string(jl.get<std::string>()));
    }
    cs.config.label_filter = LabelFilter(labels);

    if (!doc["entries"].is_array()) throw SchemaError("consensus file: 'entries' must be an array");
    for (const auto& je : doc["entries"]) {
        detail::check_keys(je, {"image_id", "x_px", "y_px", "n_raters"}, {}, "consensus entry");
        ConsensusEntry e;
        e.image_id = detail::get_string(je, "image_id", "consensus entry");
        e.x_px = detail::get_number(je, "x_px", "consensus entry");
        e.y_px = detail::get_number(je, "y_px", "consensus entry");
        e.n_raters = static_cast<int>(detail::get_integer(je, "n_raters", "consensus entry"));
        cs.entries.push_back(std::move(e));
    }
    return cs;
}

// --- ground truth for evaluation ----------------------------------------------

// Accepts a consensus file ("entries"), a bare point list ("points"), or a
// full annotation document; every carried point becomes a ground-truth point.
inline std::vector<Point> parse_gt_points(const std::string& text, const std::string& what) {
    const json doc = detail::parse_json(text, what);
    if (!doc.is_object()) throw SchemaError(what + ": expected an object");

    std::vector<Point> out;
    if (doc.contains("entries")) {
        for (const auto& e : parse_consensus(text).entries) out.push_back({e.image_id, e.x_px, e.y_px});
        return out;
    }
    if (doc.contains("points")) {
        detail::check_keys(doc, {"points"}, {}, what);
        if (!doc["points"].is_array()) throw SchemaError(what + ": 'points' must be an array");
        for (const auto& jp : doc["points"]) {
            detail::check_keys(jp, {"image_id", "x_px", "y_px"}, {}, what + " point");
            out.push_back({detail::get_string(jp, "image_id", what),
                           detail::get_number(jp, "x_px", what),
                           detail::get_number(jp, "y_px", what)});
        }
        return out;
    }
    if (doc.contains("annotations")) {
        for (const auto& a : parse_annotations(text).annotations)
            out.push_back({a.image_id, a.x_px, a.y_px});
        return out;
    }
    throw SchemaError(what + ": expected 'entries', 'points', or 'annotations'");
}

inline std::vector<Point> load_gt_points(const std::string& path) {
    return parse_gt_points(read_file(path), "ground-truth file " + path);
}

inline std::string serialize_points(const std::vector<Point>& points) {
    json out;
    out["points"] = json::array();
    for (const auto& p : points)
        out["points"].push_back({{"image_id", p.image_id}, {"x_px", p.x_px}, {"y_px", p.y_px}});
    return out.dump(2) + "\n";
}

// --- reports -------------------------------------------------------------------

// Agreement / sweep CSV. phase_tag labels the run (e.g. a preset name).
inline std::string serialize_agreement_csv(const std::vector<SweepRow>& rows,
                                           const std::string& phase_tag) {
    std::ostringstream out;
    out << "phase_tag,rater_id,threshold,tp,fp,fn,precision,recall,f1\n";
    for (const auto& r : rows) {
        out << phase_tag << ',' << r.rater_id << ',' << r.threshold << ',' << r.prf.tp << ','
            << r.prf.fp << ',' << r.prf.fn << ',' << detail::format_number(r.prf.precision) << ','
            << detail::format_number(r.prf.recall) << ',' << detail::format_number(r.prf.f1)
            << '\n';
    }
    return out.str();
}

inline std::string serialize_icc_report(const IccResult& r) {
    json out = {{"n_images", r.n_images}, {"k_raters", r.k_raters}, {"icc_2_1", r.icc_2_1},
                {"ms_r", r.ms_r},         {"ms_c", r.ms_c},         {"ms_e", r.ms_e}};
    return out.dump(2) + "\n";
}

inline std::string serialize_eval_report(const std::map<std::string, GtEvalResult>& results) {
    json out = json::object();
    for (const auto& [name, r] : results) {
        json curve = json::array();
        for (const auto& pt : r.curve.points)
            curve.push_back({pt.recall, pt.precision, pt.confidence});
        json jr = {{"ap", r.ap},     {"best_f1", r.best_f1}, {"n_gt", r.n_gt},
                   {"n_det", r.n_det}, {"pr_curve", std::move(curve)}};
        if (r.best_f1_confidence)
            jr["best_f1_confidence"] = *r.best_f1_confidence;
        else
            jr["best_f1_confidence"] = nullptr;
        out[name] = std::move(jr);
    }
    return out.dump(2) + "\n";
}

inline std::string serialize_split_plans(const std::vector<SplitPlan>& plans,
                                         const SplitRatios& ratios, std::uint64_t seed) {
    json out;
    out["ratios"] = {{"train", ratios.train}, {"val", ratios.val}, {"test", ratios.test}};
    out["seed"] = seed;
    out["folds"] = json::array();
    for (const auto& p : plans) {
        out["folds"].push_back(
            {{"fold_id", p.fold_id}, {"train", p.train}, {"val", p.val}, {"test", p.test}});
    }
    return out.dump(2) + "\n";
}

inline std::string serialize_patch_plan_csv(const std::vector<PatchRect>& patches) {
    std::ostringstream out;
    out << "image_id,x0,y0,size,has_mf\n";
    for (const auto& p : patches)
        out << p.image_id << ',' << p.x0 << ',' << p.y0 << ',' << p.size << ','
            << (p.has_mf ? "true" : "false") << '\n';
    return out.str();
}

// --- fusion weights and feature maps ---------------------------------------------

inline FusionWeights parse_fusion_weights(const std::string& text) {
    const json doc = detail::parse_json(text, "weight file");
    detail::check_keys(doc, {"c", "epsilon", "ln_gamma", "ln_beta", "conv_weight", "conv_bias"}, {},
                       "weight file");
    FusionWeights w;
    const long c = detail::get_integer(doc, "c", "weight file");
    if (c < 1) throw RangeError("weight file: c must be at least 1");
    w.c = static_cast<std::size_t>(c);
    w.epsilon = detail::get_number(doc, "epsilon", "weight file");

    const auto load_vector = [&](const char* key) {
        const auto& jv = doc.at(key);
        if (!jv.is_array()) throw SchemaError(std::string("weight file: '") + key + "' must be an array");
        std::vector<double> v;
        for (const auto& x : jv) {
            if (!x.is_number()) throw SchemaError(std::string("weight file: '") + key + "' entries must be numbers");
            v.push_back(x.get<double>());
        }
        return v;
    };
    w.ln_gamma = load_vector("ln_gamma");
    w.ln_beta = load_vector("ln_beta");
    w.conv_bias = load_vector("conv_bias");
    const auto& jw = doc.at("conv_weight");
    if (!jw.is_array()) throw SchemaError("weight file: 'conv_weight' must be an array of arrays");
    for (const auto& jrow : jw) {
        if (!jrow.is_array()) throw SchemaError("weight file: 'conv_weight' rows must be arrays");
        std::vector<double> row;
        for (const auto& x : jrow) {
            if (!x.is_number()) throw SchemaError("weight file: 'conv_weight' entries must be numbers");
            row.push_back(x.get<double>());
        }
        w.conv_weight.push_back(std::move(row));
    }
    try {
        w.validate();
    } catch (const ShapeMismatchError& e) {
        throw SchemaError(std::string("weight file: ") + e.what());
    }
    return w;
}

inline FusionWeights load_fusion_weights(const std::string& path) {
    return parse_fusion_weights(read_file(path));
}

inline std::string serialize_fusion_weights(const FusionWeights& w) {
    json out = {{"c", w.c},           {"epsilon", w.epsilon},
                {"ln_gamma", w.ln_gamma}, {"ln_beta", w.ln_beta},
                {"conv_weight", w.conv_weight}, {"conv_bias", w.conv_bias}};
    return out.dump(2) + "\n";
}

// Feature-map pair document: flat arrays in (c, y, x) order with declared dims.
inline std::pair<FeatureMap, FeatureMap> parse_feature_pair(const std::string& text) {
    const json doc = detail::parse_json(text, "feature file");
    detail::check_keys(doc, {"c", "h", "w", "he", "phh3"}, {}, "feature file");
    const long c = detail::get_integer(doc, "c", "feature file");
    const long h = detail::get_integer(doc, "h", "feature file");
    const long w = detail::get_integer(doc, "w", "feature file");
    if (c < 1 || h < 1 || w < 1) throw RangeError("feature file: dims must be at least 1");

    const auto load_map = [&](const char* key) {
        const auto& jv = doc.at(key);
        if (!jv.is_array()) throw SchemaError(std::string("feature file: '") + key + "' must be an array");
        FeatureMap m(static_cast<std::size_t>(c), static_cast<std::size_t>(h),
                     static_cast<std::size_t>(w));
        if (jv.size() != m.data.size())
            throw SchemaError(std::string("feature file: '") + key + "' length must be c*h*w");
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            if (!jv[i].is_number())
                throw SchemaError(std::string("feature file: '") + key + "' entries must be numbers");
            m.data[i] = jv[i].get<double>();
        }
        return m;
    };
    return {load_map("he"), load_map("phh3")};
}

inline std::pair<FeatureMap, FeatureMap> load_feature_pair(const std::string& path) {
    return parse_feature_pair(read_file(path));
}

inline std::string serialize_feature_pair(const FeatureMap& he, const FeatureMap& phh3) {
    json out = {{"c", he.c}, {"h", he.h}, {"w", he.w}, {"he", he.data}, {"phh3", phh3.data}};
    return out.dump(2) + "\n";
}

// --- study presets ---------------------------------------------------------------

inline std::string serialize_preset(const StudyPreset& preset) {
    json raters = json::array();
    for (const auto& r : preset.raters) {
        raters.push_back({{"rater_id", r.rater_id},
                          {"sensitivity", r.sensitivity},
                          {"fp_rate_per_mm2", r.fp_rate_per_mm2},
                          {"jitter_sigma_um", r.jitter_sigma_um}});
    }
    json out = {{"name", preset.name}, {"n_raters", preset.n_raters}, {"seed", preset.seed},
                {"raters", std::move(raters)}};
    return out.dump(2) + "\n";
}

inline StudyPreset parse_preset(const std::string& text) {
    const json doc = detail::parse_json(text, "preset file");
    detail::check_keys(doc, {"name", "n_raters", "seed", "raters"}, {}, "preset file");
    StudyPreset preset;
    preset.name = detail::get_string(doc, "name", "preset file");
    preset.n_raters = static_cast<int>(detail::get_integer(doc, "n_raters", "preset file"));
    const auto& js = doc.at("seed");
    if (!js.is_number_unsigned() && !js.is_number_integer())
        throw SchemaError("preset file: 'seed' must be an integer");
    preset.seed = js.get<std::uint64_t>();
    if (!doc["raters"].is_array()) throw SchemaError("preset file: 'raters' must be an array");
    for (const auto& jr : doc["raters"]) {
        detail::check_keys(jr, {"rater_id", "sensitivity", "fp_rate_per_mm2", "jitter_sigma_um"},
                           {}, "rater profile");
        RaterProfile r;
        r.rater_id = detail::get_string(jr, "rater_id", "rater profile");
        r.sensitivity = detail::get_number(jr, "sensitivity", "rater profile");
        r.fp_rate_per_mm2 = detail::get_number(jr, "fp_rate_per_mm2", "rater profile");
        r.jitter_sigma_um = detail::get_number(jr, "jitter_sigma_um", "rater profile");
        preset.raters.push_back(std::move(r));
    }
    if (preset.n_raters != static_cast<int>(preset.raters.size()))
        throw SchemaError("preset file: n_raters must match the profile count");
    if (preset.n_raters < 2) throw RangeError("preset file: a study needs at least 2 raters");
    return preset;
}

inline StudyPreset load_preset(const std::string& path) { return parse_preset(read_file(path)); }

} // namespace mitoeval
