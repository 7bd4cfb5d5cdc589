#include "rmk/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "rmk/io.hpp"
#include "rmk/random.hpp"

namespace rmk::scene {

double class_intensity(int class_id, int classes) {
    return 0.35 + 0.6 * static_cast<double>(class_id + 1) / static_cast<double>(classes);
}

void render_box(Tensor& image, const geom::OrientedBox& box, double intensity) {
    require_ndim(image, 4, "render_box");
    const auto poly = geom::box_to_polygon(box);
    double xmin = poly.vertices[0].x, xmax = xmin, ymin = poly.vertices[0].y, ymax = ymin;
    for (const auto& v : poly.vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    const auto h = image.dim(2), w = image.dim(3);
    const auto r0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(ymin)));
    const auto r1 = std::min<std::int64_t>(h - 1, static_cast<std::int64_t>(std::ceil(ymax)));
    const auto c0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(xmin)));
    const auto c1 = std::min<std::int64_t>(w - 1, static_cast<std::int64_t>(std::ceil(xmax)));
    for (std::int64_t r = r0; r <= r1; ++r) {
        for (std::int64_t c = c0; c <= c1; ++c) {
            if (!poly.contains({c + 0.5, r + 0.5})) continue;
            for (std::int64_t ch = 0; ch < image.dim(1); ++ch) image.set(0, ch, r, c, intensity);
        }
    }
}

Scene gen_scene(std::uint64_t seed, const SceneSpec& spec, const Canvas& canvas) {
    if (spec.objects < 0 || spec.classes < 1 || !(spec.min_size > 0.0) ||
        spec.max_size < spec.min_size || canvas.height < 1 || canvas.width < 1) {
        throw GenerationError("gen_scene: invalid scene parameters");
    }
    Rng rng(seed);
    const auto h = canvas.height, w = canvas.width;
    std::vector<float> pixels(static_cast<std::size_t>(h * w));
    for (auto& p : pixels) p = static_cast<float>(rng.uniform(0.0, spec.noise));
    Tensor gray = Tensor::from_vector<float>({1, 1, h, w}, pixels);

    Scene scene;
    for (int k = 0; k < spec.objects; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
            double bw = rng.uniform(spec.min_size, spec.max_size);
            double bh = rng.uniform(spec.min_size, spec.max_size);
            if (bw < bh) std::swap(bw, bh);
            const double theta = spec.angle_mode == AngleMode::AxisAligned
                                     ? 0.0
                                     : rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double cx = rng.uniform(0.0, static_cast<double>(w));
            const double cy = rng.uniform(0.0, static_cast<double>(h));
            const int cls = static_cast<int>(rng.uniform_int(0, spec.classes - 1));
            const geom::OrientedBox box(cx, cy, bw, bh, theta, cls, 1.0);
            const auto poly = geom::box_to_polygon(box);
            const bool inside = std::all_of(poly.vertices.begin(), poly.vertices.end(), [&](auto v) {
                return v.x >= 0.0 && v.y >= 0.0 && v.x <= static_cast<double>(w) &&
                       v.y <= static_cast<double>(h);
            });
            if (!inside) continue;
            const bool overlaps = std::any_of(scene.truth.begin(), scene.truth.end(), [&](auto& o) {
                return geom::rotated_iou(o, box) > 0.0;
            });
            if (overlaps) continue;
            scene.truth.push_back(box);
            placed = true;
        }
        if (!placed) {
            throw GenerationError("gen_scene: could not place object " + std::to_string(k + 1) +
                                  " of " + std::to_string(spec.objects) + " after " +
                                  std::to_string(spec.max_attempts) + " attempts");
        }
    }
    for (const auto& b : scene.truth) render_box(gray, b, class_intensity(b.class_id(), spec.classes));

    std::vector<float> rgb;
    rgb.reserve(pixels.size() * 3);
    auto g = gray.data<float>();
    for (int ch = 0; ch < 3; ++ch) rgb.insert(rgb.end(), g.begin(), g.end());
    scene.image = Tensor::from_vector<float>({1, 3, h, w}, std::move(rgb));
    return scene;
}

void write_annotations(const std::filesystem::path& path, const std::vector<geom::OrientedBox>& boxes,
                       bool with_scores) {
    std::ofstream os(path);
    if (!os) throw io::FormatError("cannot open " + path.string() + " for writing");
    os << "# cx cy w h theta class_id" << (with_scores ? " score" : "") << '\n';
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& b : boxes) {
        os << b.cx() << ' ' << b.cy() << ' ' << b.w() << ' ' << b.h() << ' ' << b.theta() << ' '
           << b.class_id();
        if (with_scores) os << ' ' << b.score();
        os << '\n';
    }
}

std::vector<geom::OrientedBox> read_annotations(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw io::FormatError("cannot open " + path.string());
    std::vector<geom::OrientedBox> boxes;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double cx, cy, w, h, theta;
        int cls;
        if (!(ls >> cx)) continue;  // blank or comment-only
        if (!(ls >> cy >> w >> h >> theta >> cls)) {
            throw io::FormatError(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 'cx cy w h theta class_id [score]'");
        }
        double score = 1.0;
        ls >> score;
        boxes.emplace_back(cx, cy, w, h, theta, cls, score);
    }
    return boxes;
}

}  // namespace rmk::scene
