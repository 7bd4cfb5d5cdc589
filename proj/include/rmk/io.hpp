#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmk/tensor.hpp"

namespace rmk::io {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// RMKT layout: "RMKT", version 0x01, dtype byte (0 = f32, 1 = f64), ndim
// byte, ndim little-endian u32 extents, row-major little-endian payload.
void write_rmkt(std::ostream& os, const Tensor& t);
Tensor read_rmkt(std::istream& is);
void save_rmkt(const std::filesystem::path& path, const Tensor& t);
Tensor load_rmkt(const std::filesystem::path& path);

/// Ordered, named tensor collection with a free-form role tag per entry.
class NamedTensors {
   public:
    struct Entry {
        std::string name;
        std::string role;
        Tensor tensor;
    };

    void add(std::string name, std::string role, Tensor tensor);
    const Tensor& get(const std::string& name) const;
    const Entry* find(const std::string& name) const;
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

   private:
    std::vector<Entry> entries_;
};

/// Writes one RMKT file per entry plus manifest.txt with lines
/// "name file dtype shape role".
void save_bundle(const std::filesystem::path& dir, const NamedTensors& tensors);
NamedTensors load_bundle(const std::filesystem::path& dir);

/// Reads a P2 or P5 graymap as a (1, 1, H, W) f32 tensor scaled to [0, 1].
Tensor read_pgm(const std::filesystem::path& path);
/// Writes channel 0 of batch item 0 as an 8-bit P5 graymap, clamping to [0, 1].
void write_pgm(const std::filesystem::path& path, const Tensor& image);

}  // namespace rmk::io
