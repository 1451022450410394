#ifndef RADCS_IO_HPP
#define RADCS_IO_HPP

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "radcs/cs_engine.hpp"
#include "radcs/detector.hpp"
#include "radcs/geometry.hpp"
#include "radcs/lp_allocator.hpp"

namespace radcs {

// On-disk formats. All binary files are little-endian; this library targets
// little-endian hosts and reads/writes native layouts directly.
//   .radf  raw 32-bit float raster, row-major (400x576 polar, or square
//          Cartesian exports)
//   .rmeas per-frame measurements: "RMES", version, frame_id, seed,
//          240 uint16 counts, then concatenated float32 values
//   .rplan sampling plan: "RPLN", version, S, I, O, x1, x2, then 240 pairs
//          (float32 rate, uint16 m)

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("unexpected end of file");
    return v;
}

} // namespace detail

inline void write_radf(const std::filesystem::path& path, const std::vector<float>& data) {
    auto out = detail::open_out(path);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size() * sizeof(float)));
}

inline std::vector<float> read_radf(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    in.seekg(0, std::ios::end);
    const auto bytes = in.tellg();
    in.seekg(0);
    if (bytes % sizeof(float) != 0) throw std::runtime_error(path.string() + ": size is not a float multiple");
    std::vector<float> data(std::size_t(bytes) / sizeof(float));
    in.read(reinterpret_cast<char*>(data.data()), bytes);
    return data;
}

/// 8-bit single-channel PNG as intensities in [0, 255].
inline std::vector<float> read_png_gray(const std::filesystem::path& path, int& width, int& height) {
    FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot read " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error(path.string() + ": PNG decode error");
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    std::vector<float> out(std::size_t(width) * height);
    std::vector<png_byte> row(std::size_t(png_get_rowbytes(png, info)));
    for (int r = 0; r < height; ++r) {
        png_read_row(png, row.data(), nullptr);
        for (int c = 0; c < width; ++c) out[std::size_t(r) * width + c] = float(row[std::size_t(c)]);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return out;
}

/// Load a polar frame from .radf or .png, validating geometry.
inline PolarFrame load_polar_frame(const std::filesystem::path& path, std::int64_t frame_id,
                                   const FrameGeometry& g = {}) {
    PolarFrame frame;
    frame.frame_id = frame_id;
    frame.timestamp_s = frame_id * 0.25;
    const std::string ext = path.extension().string();
    if (ext == ".png") {
        int w = 0, h = 0;
        frame.data = read_png_gray(path, w, h);
        if (w != g.n_range_bins || h != g.n_azimuth_bins)
            throw std::runtime_error(path.string() + ": expected " + std::to_string(g.n_range_bins) + "x" +
                                     std::to_string(g.n_azimuth_bins) + " PNG, got " + std::to_string(w) +
                                     "x" + std::to_string(h));
    } else {
        frame.data = read_radf(path);
    }
    frame.validate(g);
    return frame;
}

// --- measurements -----------------------------------------------------------

inline void write_rmeas(const std::filesystem::path& path, const FrameMeasurements& meas) {
    auto out = detail::open_out(path);
    out.write("RMES", 4);
    detail::put<std::uint32_t>(out, 1);
    detail::put<std::int64_t>(out, meas.frame_id);
    detail::put<std::uint64_t>(out, meas.seed);
    for (int m : meas.m_per_block) detail::put<std::uint16_t>(out, std::uint16_t(m));
    for (const Eigen::VectorXd& v : meas.values)
        for (long i = 0; i < v.size(); ++i) detail::put<float>(out, float(v[i]));
}

inline FrameMeasurements read_rmeas(const std::filesystem::path& path, const BlockGeometry& bg = {}) {
    auto in = detail::open_in(path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "RMES", 4) != 0)
        throw std::runtime_error(path.string() + ": not a measurement file");
    if (detail::get<std::uint32_t>(in) != 1)
        throw std::runtime_error(path.string() + ": unsupported measurement version");
    FrameMeasurements meas;
    meas.frame_id = detail::get<std::int64_t>(in);
    meas.seed = detail::get<std::uint64_t>(in);
    meas.m_per_block.resize(std::size_t(bg.total_blocks()));
    for (int& m : meas.m_per_block) m = detail::get<std::uint16_t>(in);
    meas.values.resize(std::size_t(bg.total_blocks()));
    for (int lin = 0; lin < bg.total_blocks(); ++lin) {
        const int count = meas.m_per_block[std::size_t(lin)];
        Eigen::VectorXd v(count);
        for (int i = 0; i < count; ++i) v[i] = detail::get<float>(in);
        meas.values[std::size_t(lin)] = std::move(v);
    }
    return meas;
}

// --- sampling plans ----------------------------------------------------------

inline void write_rplan(const std::filesystem::path& path, const SamplingPlan& plan) {
    auto out = detail::open_out(path);
    out.write("RPLN", 4);
    detail::put<std::uint32_t>(out, 1);
    detail::put<std::uint32_t>(out, std::uint32_t(plan.target_budget));
    detail::put<std::uint16_t>(out, std::uint16_t(plan.n_important()));
    detail::put<std::uint16_t>(out, std::uint16_t(int(plan.m_per_block.size()) - plan.n_important()));
    detail::put<float>(out, float(plan.x1));
    detail::put<float>(out, float(plan.x2));
    for (std::size_t i = 0; i < plan.m_per_block.size(); ++i) {
        detail::put<float>(out, plan.rate_per_block[i]);
        detail::put<std::uint16_t>(out, std::uint16_t(plan.m_per_block[i]));
    }
}

inline SamplingPlan read_rplan(const std::filesystem::path& path, const BlockGeometry& bg = {}) {
    auto in = detail::open_in(path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "RPLN", 4) != 0)
        throw std::runtime_error(path.string() + ": not a plan file");
    if (detail::get<std::uint32_t>(in) != 1)
        throw std::runtime_error(path.string() + ": unsupported plan version");
    SamplingPlan plan;
    plan.target_budget = detail::get<std::uint32_t>(in);
    const int n_imp = detail::get<std::uint16_t>(in);
    (void)detail::get<std::uint16_t>(in); // other-block count, derivable
    plan.x1 = detail::get<float>(in);
    plan.x2 = detail::get<float>(in);
    const int nblocks = bg.total_blocks();
    plan.rate_per_block.resize(std::size_t(nblocks));
    plan.m_per_block.resize(std::size_t(nblocks));
    plan.important.assign(std::size_t(nblocks), 0);
    for (int i = 0; i < nblocks; ++i) {
        plan.rate_per_block[std::size_t(i)] = detail::get<float>(in);
        plan.m_per_block[std::size_t(i)] = detail::get<std::uint16_t>(in);
        plan.total_m += plan.m_per_block[std::size_t(i)];
    }
    // Re-derive importance flags from the rate split when the plan had any.
    if (n_imp > 0)
        for (int i = 0; i < nblocks; ++i)
            if (plan.rate_per_block[std::size_t(i)] == float(plan.x1))
                plan.important[std::size_t(i)] = 1;
    return plan;
}

// --- annotations -------------------------------------------------------------

/// Line-delimited annotation records: frame_id cx cy w h (meters), '#' comments.
inline AnnotationTable read_annotations(const std::filesystem::path& path, const FrameGeometry& g = {}) {
    auto in = detail::open_in(path);
    AnnotationTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        GroundTruthBox box;
        if (!(ss >> box.frame_id)) continue; // blank or comment line
        if (!(ss >> box.center_x_m >> box.center_y_m >> box.width_m >> box.height_m))
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 'frame_id cx cy w h'");
        box.validate(g);
        table[box.frame_id].push_back(box);
    }
    return table;
}

inline void write_annotations(const std::filesystem::path& path, const AnnotationTable& table) {
    auto out = detail::open_out(path);
    out << "# frame_id center_x_m center_y_m width_m height_m\n";
    out.precision(17);
    for (const auto& [frame_id, boxes] : table)
        for (const GroundTruthBox& b : boxes)
            out << frame_id << ' ' << b.center_x_m << ' ' << b.center_y_m << ' ' << b.width_m << ' '
                << b.height_m << '\n';
}

// --- scene manifests ----------------------------------------------------------

/// A scene on disk: ordered frame files plus one annotation file, tied together
/// by a key/value manifest ("manifest.txt" in the scene directory).
struct SceneManifest {
    std::string scene_name;
    std::string weather;
    std::filesystem::path annotation_path;
    std::vector<std::filesystem::path> frame_paths;
    FrameGeometry geometry;

    void validate() const {
        if (frame_paths.empty()) throw std::runtime_error("scene manifest lists no frames");
        for (const auto& p : frame_paths)
            if (!std::filesystem::exists(p)) throw std::runtime_error("missing frame file " + p.string());
        if (!annotation_path.empty() && !std::filesystem::exists(annotation_path))
            throw std::runtime_error("missing annotation file " + annotation_path.string());
    }
};

inline SceneManifest load_manifest(const std::filesystem::path& scene_dir) {
    const auto manifest_path = scene_dir / "manifest.txt";
    auto in = detail::open_in(manifest_path);
    SceneManifest man;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        const auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            const auto last = s.find_last_not_of(" \t\r");
            s.erase(last == std::string::npos ? 0 : last + 1);
        };
        trim(key);
        trim(value);
        if (key == "scene_name") man.scene_name = value;
        else if (key == "weather") man.weather = value;
        else if (key == "annotations") man.annotation_path = scene_dir / value;
        else if (key == "frame") man.frame_paths.push_back(scene_dir / value);
        else if (key == "max_range_m") man.geometry.max_range_m = std::stod(value);
        else
            throw std::runtime_error(manifest_path.string() + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
    man.validate();
    return man;
}

inline void write_manifest(const std::filesystem::path& scene_dir, const SceneManifest& man) {
    auto out = detail::open_out(scene_dir / "manifest.txt");
    out << "scene_name: " << man.scene_name << "\n";
    if (!man.weather.empty()) out << "weather: " << man.weather << "\n";
    if (!man.annotation_path.empty())
        out << "annotations: " << std::filesystem::relative(man.annotation_path, scene_dir).string() << "\n";
    for (const auto& p : man.frame_paths)
        out << "frame: " << std::filesystem::relative(p, scene_dir).string() << "\n";
}

} // namespace radcs

#endif
