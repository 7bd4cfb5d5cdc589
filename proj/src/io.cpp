#include "rmk/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace rmk::io {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'M', 'K', 'T'};
constexpr std::uint8_t kVersion = 1;

template <typename U>
void put_le(std::ostream& os, U v) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
    std::array<unsigned char, sizeof(U)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw FormatError("RMKT: truncated stream");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
}

std::string shape_token(const Shape& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s;
}

}  // namespace

void write_rmkt(std::ostream& os, const Tensor& t) {
    if (t.ndim() > 255) throw FormatError("RMKT: too many dimensions");
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint8_t>(os, kVersion);
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.dtype()));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.ndim()));
    for (auto e : t.shape()) {
        if (e > std::numeric_limits<std::uint32_t>::max()) throw FormatError("RMKT: extent too large");
        put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e));
    }
    if (t.dtype() == DType::F32) {
        for (float v : t.data<float>()) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
    } else {
        for (double v : t.data<double>()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
    }
    if (!os) throw FormatError("RMKT: write failed");
}

Tensor read_rmkt(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw FormatError("RMKT: bad magic");
    const auto version = get_le<std::uint8_t>(is);
    if (version != kVersion) throw FormatError("RMKT: unsupported version " + std::to_string(version));
    const auto dtype = get_le<std::uint8_t>(is);
    if (dtype > 1) throw FormatError("RMKT: unknown dtype byte " + std::to_string(dtype));
    const auto ndim = get_le<std::uint8_t>(is);
    if (ndim == 0) throw FormatError("RMKT: zero-dimensional tensor");
    Shape shape;
    for (int i = 0; i < ndim; ++i) shape.push_back(get_le<std::uint32_t>(is));
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    if (dtype == 0) {
        std::vector<float> v(n);
        for (auto& x : v) x = std::bit_cast<float>(get_le<std::uint32_t>(is));
        return Tensor::from_vector<float>(shape, std::move(v));
    }
    std::vector<double> v(n);
    for (auto& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(is));
    return Tensor::from_vector<double>(shape, std::move(v));
}

void save_rmkt(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_rmkt(os, t);
}

Tensor load_rmkt(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_rmkt(is);
}

void NamedTensors::add(std::string name, std::string role, Tensor tensor) {
    if (find(name)) throw ContractError("duplicate tensor name '" + name + "'");
    if (name.empty() || name.find_first_of(" \t\n/") != std::string::npos) {
        throw ContractError("invalid tensor name '" + name + "'");
    }
    entries_.push_back({std::move(name), role.empty() ? "-" : std::move(role), std::move(tensor)});
}

const NamedTensors::Entry* NamedTensors::find(const std::string& name) const {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.name == name; });
    return it == entries_.end() ? nullptr : &*it;
}

const Tensor& NamedTensors::get(const std::string& name) const {
    const Entry* e = find(name);
    if (!e) throw FormatError("missing tensor '" + name + "'");
    return e->tensor;
}

void save_bundle(const std::filesystem::path& dir, const NamedTensors& tensors) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw FormatError("cannot write manifest in " + dir.string());
    manifest << "# name file dtype shape role\n";
    for (const auto& e : tensors.entries()) {
        const std::string file = e.name + ".rmkt";
        save_rmkt(dir / file, e.tensor);
        manifest << e.name << ' ' << file << ' ' << dtype_name(e.tensor.dtype()) << ' '
                 << shape_token(e.tensor.shape()) << ' ' << e.role << '\n';
    }
}

NamedTensors load_bundle(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw FormatError("no manifest.txt in " + dir.string());
    NamedTensors out;
    std::string line;
    int lineno = 0;
    while (std::getline(manifest, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string name, file, dtype, shape, role;
        if (!(ls >> name >> file >> dtype >> shape >> role)) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": expected 5 fields");
        }
        Tensor t = load_rmkt(dir / file);
        if (shape_token(t.shape()) != shape || dtype != dtype_name(t.dtype())) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": " + file +
                              " does not match declared " + dtype + " " + shape);
        }
        out.add(name, role, std::move(t));
    }
    return out;
}

Tensor read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    auto token = [&]() {
        std::string tok;
        while (is >> tok) {
            if (tok[0] != '#') return tok;
            std::string rest;
            std::getline(is, rest);
        }
        throw FormatError("PGM: truncated header");
    };
    const std::string magic = token();
    if (magic != "P2" && magic != "P5") throw FormatError("PGM: unsupported magic " + magic);
    const long w = std::stol(token());
    const long h = std::stol(token());
    const long maxval = std::stol(token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw FormatError("PGM: bad header");
    std::vector<float> pixels(static_cast<std::size_t>(w * h));
    if (magic == "P2") {
        for (auto& p : pixels) p = static_cast<float>(std::stol(token())) / maxval;
    } else {
        is.get();  // single whitespace after maxval
        const int bytes = maxval < 256 ? 1 : 2;
        for (auto& p : pixels) {
            unsigned v = static_cast<unsigned char>(is.get());
            if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(is.get());
            if (!is) throw FormatError("PGM: truncated raster");
            p = static_cast<float>(v) / maxval;
        }
    }
    return Tensor::from_vector<float>({1, 1, h, w}, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
    require_ndim(image, 4, "write_pgm");
    const auto h = image.dim(2), w = image.dim(3);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    os << "P5\n" << w << ' ' << h << "\n255\n";
    for (std::int64_t r = 0; r < h; ++r) {
        for (std::int64_t c = 0; c < w; ++c) {
            const double v = std::clamp(image.at(0, 0, r, c), 0.0, 1.0);
            os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
}

}  // namespace rmk::io
