#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "rmk/geometry.hpp"
#include "rmk/tensor.hpp"

// Seeded synthetic scenes of filled rotated rectangles, and the plain-text
// annotation format.
namespace rmk::scene {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AngleMode { Random, AxisAligned };

struct SceneSpec {
    int objects = 3;
    int classes = 2;
    double min_size = 12.0;
    double max_size = 40.0;
    AngleMode angle_mode = AngleMode::Random;
    double noise = 0.1;       // background amplitude, uniform in [0, noise)
    int max_attempts = 1000;  // placement attempts per object
};

struct Canvas {
    std::int64_t height = 256;
    std::int64_t width = 256;
};

struct Scene {
    Tensor image;  // (1, 3, H, W) f32; the gray value repeated on 3 channels
    std::vector<geom::OrientedBox> truth;
};

/// Intensity used to paint objects of `class_id`.
double class_intensity(int class_id, int classes);

/// Boxes lie fully inside the canvas and never overlap. The same seed gives
/// a bit-identical scene.
Scene gen_scene(std::uint64_t seed, const SceneSpec& spec, const Canvas& canvas);

/// Paints `box` into every channel of image item 0 at pixels whose centre
/// lies inside the box.
void render_box(Tensor& image, const geom::OrientedBox& box, double intensity);

// One object per line: "cx cy w h theta class_id [score]"; '#' starts a comment.
void write_annotations(const std::filesystem::path& path, const std::vector<geom::OrientedBox>& boxes,
                       bool with_scores = false);
std::vector<geom::OrientedBox> read_annotations(const std::filesystem::path& path);

}  // namespace rmk::scene
