#ifndef RADCS_REPORT_HPP
#define RADCS_REPORT_HPP

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "radcs/io.hpp"
#include "radcs/pipeline.hpp"

namespace radcs {

// A scene run serializes to a self-describing report directory:
//   run_config.json          what was run (scene path, rate, variant, seed...)
//   metrics.csv              one row per frame plus an aggregate row
//   frames/frame_NNNNNN.rplan / .rmeas / _recon.radf / _mask.csv / _report.json
// Everything is a pure function of the inputs, so re-running with the same
// flags reproduces every byte.

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string frame_stem(std::int64_t frame_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06" PRId64, frame_id);
    return buf;
}

inline std::string mask_bitmap_hex(const ImportanceMask& mask, const BlockGeometry& bg = {}) {
    std::vector<std::uint8_t> bytes((std::size_t(bg.total_blocks()) + 7) / 8, 0);
    for (const BlockIndex& b : mask.important) {
        const int lin = b.linear(bg);
        bytes[std::size_t(lin / 8)] |= std::uint8_t(1u << (lin % 8));
    }
    std::string hex;
    for (std::uint8_t v : bytes) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", v);
        hex += buf;
    }
    return hex;
}

} // namespace detail

inline nlohmann::json detection_to_json(const Detection& d) {
    return {{"cx_m", d.center_x_m}, {"cy_m", d.center_y_m},     {"w_m", d.width_m},
            {"h_m", d.height_m},    {"score", d.score},
            {"size", d.size_class == SizeClass::Large ? "large" : "small"}};
}

inline Detection detection_from_json(const nlohmann::json& j) {
    Detection d;
    d.center_x_m = j.at("cx_m").get<double>();
    d.center_y_m = j.at("cy_m").get<double>();
    d.width_m = j.at("w_m").get<double>();
    d.height_m = j.at("h_m").get<double>();
    d.score = j.at("score").get<double>();
    d.size_class = j.at("size").get<std::string>() == "large" ? SizeClass::Large : SizeClass::Small;
    return d;
}

inline std::string metrics_csv_row(std::int64_t frame_id, const MetricBundle& m, std::size_t n_dets,
                                   std::size_t n_truth, long plan_total_m) {
    std::string row = std::to_string(frame_id);
    row += ',';
    row += detail::format_double(m.nmse);
    row += ',';
    row += detail::format_double(m.psnr_db);
    row += ',';
    row += detail::format_double(m.ap50);
    row += ',';
    row += detail::format_double(m.ap);
    row += ',' + std::to_string(n_dets) + ',' + std::to_string(n_truth) + ',' +
           std::to_string(plan_total_m);
    return row;
}

/// Render the metrics CSV (per-frame rows + aggregate) for a finished run.
inline std::string render_metrics_csv(const SceneRun& run, const AnnotationTable& truth) {
    std::string csv = "frame_id,nmse,psnr_db,ap50,ap,n_detections,n_truth,plan_total_m\n";
    std::size_t truth_total = 0, det_total = 0;
    for (const FrameRecord& rec : run.records) {
        const auto it = truth.find(rec.frame_id);
        const std::size_t n_truth = it == truth.end() ? 0 : it->second.size();
        truth_total += n_truth;
        det_total += rec.detections.size();
        csv += metrics_csv_row(rec.frame_id, rec.metrics, rec.detections.size(), n_truth,
                               rec.plan.total_m) +
               "\n";
    }
    csv += "aggregate,";
    csv += detail::format_double(run.mean_nmse);
    csv += ",nan,";
    csv += detail::format_double(run.ap50_pooled);
    csv += ',';
    csv += detail::format_double(run.ap_pooled);
    csv += ',' + std::to_string(det_total) + ',' + std::to_string(truth_total) + ',' +
           std::to_string(run.total_measurements) + "\n";
    return csv;
}

inline nlohmann::json run_config_json(const SceneConfig& config, const std::string& scene_path) {
    nlohmann::json j;
    j["scene"] = scene_path;
    j["rate"] = config.sampling_rate;
    j["variant"] = to_string(config.variant);
    j["backend"] = std::holds_alternative<OracleBackend>(config.backend) ? "oracle" : "blob";
    j["seed"] = config.seed;
    j["n_frames"] = config.n_frames;
    j["score_threshold"] = config.score_threshold;
    j["plan_from_original"] = config.plan_from_original;
    j["solver"] = {{"max_iterations", config.solver.max_iterations},
                   {"primal_tolerance", config.solver.primal_tolerance},
                   {"dual_tolerance", config.solver.dual_tolerance},
                   {"penalty", config.solver.penalty_parameter},
                   {"over_relaxation", config.solver.over_relaxation}};
    return j;
}

/// Write the full report directory for a finished scene run.
inline void write_report(const std::filesystem::path& out_dir, const SceneRun& run,
                         const AnnotationTable& truth, const std::string& scene_path,
                         const BlockGeometry& bg = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "frames");

    {
        std::ofstream cfg(out_dir / "run_config.json");
        cfg << run_config_json(run.config, scene_path).dump(2) << "\n";
    }
    {
        std::ofstream csv(out_dir / "metrics.csv", std::ios::binary);
        csv << render_metrics_csv(run, truth);
    }
    for (const FrameRecord& rec : run.records) {
        const std::string stem = detail::frame_stem(rec.frame_id);
        write_rplan(out_dir / "frames" / (stem + ".rplan"), rec.plan);
        write_rmeas(out_dir / "frames" / (stem + ".rmeas"), rec.measurements);
        write_radf(out_dir / "frames" / (stem + "_recon.radf"), rec.reconstruction.data);
        {
            std::ofstream mask_csv(out_dir / "frames" / (stem + "_mask.csv"), std::ios::binary);
            mask_csv << "az_block,range_block,important\n";
            for (int lin = 0; lin < bg.total_blocks(); ++lin) {
                const BlockIndex idx = BlockIndex::from_linear(lin, bg);
                const bool imp = rec.mask_used.important.count(idx) > 0;
                mask_csv << idx.az_block << ',' << idx.range_block << ',' << (imp ? 1 : 0) << "\n";
            }
        }
        nlohmann::json j;
        j["frame_id"] = rec.frame_id;
        j["metrics"] = {{"nmse", rec.metrics.nmse},
                        {"nmse_defined", rec.metrics.nmse_defined},
                        {"psnr_db", detail::format_double(rec.metrics.psnr_db)},
                        {"ap50", rec.metrics.ap50},
                        {"ap", rec.metrics.ap}};
        j["plan"] = {{"total_m", rec.plan.total_m},
                     {"target_budget", rec.plan.target_budget},
                     {"x1", rec.plan.x1},
                     {"x2", rec.plan.x2},
                     {"n_important", rec.plan.n_important()},
                     {"relaxed", rec.plan.relaxed}};
        j["convergence"] = {{"n_unconverged", rec.convergence.n_unconverged},
                            {"worst_residual", rec.convergence.worst_residual},
                            {"total_iterations", rec.convergence.total_iterations}};
        j["mask_bitmap_hex"] = detail::mask_bitmap_hex(rec.mask_used, bg);
        j["mask_variant"] = rec.mask_used.variant == PatternVariant::RadInfo2 ? "radinfo2" : "radinfo1";
        j["detector_warning"] = rec.detector_warning;
        j["detections"] = nlohmann::json::array();
        for (const Detection& d : rec.detections) j["detections"].push_back(detection_to_json(d));
        std::ofstream rep(out_dir / "frames" / (stem + "_report.json"), std::ios::binary);
        rep << j.dump(2) << "\n";
    }
}

/// Recompute metrics.csv from a stored report plus its scene directory. Used
/// to check that reports are self-describing: the result is byte-identical to
/// the stored CSV.
inline std::string recompute_metrics_csv(const std::filesystem::path& report_dir,
                                         const std::filesystem::path& scene_dir) {
    namespace fs = std::filesystem;
    const SceneManifest man = load_manifest(scene_dir);
    const AnnotationTable truth =
        man.annotation_path.empty() ? AnnotationTable{} : read_annotations(man.annotation_path);

    std::string csv = "frame_id,nmse,psnr_db,ap50,ap,n_detections,n_truth,plan_total_m\n";
    double nmse_sum = 0.0;
    int nmse_count = 0;
    long total_m = 0;
    std::size_t truth_total = 0, det_total = 0;
    PooledAp ap50_pool;
    std::vector<PooledAp> ap_pools(ap_thresholds().size());

    std::vector<fs::path> reports;
    for (const auto& entry : fs::directory_iterator(report_dir / "frames"))
        if (entry.path().extension() == ".json") reports.push_back(entry.path());
    std::sort(reports.begin(), reports.end());

    bool first = true;
    for (const fs::path& rep_path : reports) {
        nlohmann::json j;
        std::ifstream(rep_path) >> j;
        const std::int64_t frame_id = j.at("frame_id").get<std::int64_t>();
        const std::string stem = detail::frame_stem(frame_id);

        PolarFrame recon;
        recon.frame_id = frame_id;
        recon.data = read_radf(report_dir / "frames" / (stem + "_recon.radf"));
        // frame ids index the manifest's ordered file list
        const PolarFrame original = load_polar_frame(man.frame_paths.at(std::size_t(frame_id)), frame_id);

        std::vector<Detection> dets;
        for (const auto& dj : j.at("detections")) dets.push_back(detection_from_json(dj));
        const SamplingPlan plan = read_rplan(report_dir / "frames" / (stem + ".rplan"));

        auto it = truth.find(frame_id);
        std::vector<Box> gt;
        if (it != truth.end())
            for (const GroundTruthBox& b : it->second) gt.push_back({b.center_x_m, b.center_y_m, b.width_m, b.height_m});

        const std::vector<ScoredBox> sb = detail::scored_boxes(dets);
        const MetricBundle m = frame_metrics(original, recon, sb, gt);
        csv += metrics_csv_row(frame_id, m, dets.size(), gt.size(), plan.total_m) + "\n";

        ap50_pool.add_frame(sb, gt, 0.50);
        for (std::size_t t = 0; t < ap_thresholds().size(); ++t)
            ap_pools[t].add_frame(sb, gt, ap_thresholds()[t]);
        if (!first && m.nmse_defined) {
            nmse_sum += m.nmse;
            ++nmse_count;
        }
        first = false;
        truth_total += gt.size();
        det_total += dets.size();
        total_m += plan.total_m;
    }
    double ap = 0.0;
    for (const PooledAp& pool : ap_pools) ap += pool.value();
    ap /= double(ap_thresholds().size());
    csv += "aggregate,";
    csv += detail::format_double(nmse_count ? nmse_sum / nmse_count : 0.0);
    csv += ",nan,";
    csv += detail::format_double(ap50_pool.value());
    csv += ',';
    csv += detail::format_double(ap);
    csv += ',' + std::to_string(det_total) + ',' + std::to_string(truth_total) + ',' +
           std::to_string(total_m) + "\n";
    return csv;
}

} // namespace radcs

#endif
