#include "rmk/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rmk::config {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    T value{};
    if constexpr (std::is_same_v<T, bool>) {
        std::string s;
        is >> s;
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
    } else {
        is >> value;
        std::string rest;
        if (is.fail() || (is >> rest)) {
            throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
        }
        return value;
    }
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;

template <typename T, typename F>
Setter field(F accessor) {
    return [accessor](Config& c, const std::string& key, const std::string& value) {
        accessor(c) = parse_value<T>(key, value);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"network.image_channels", field<std::int64_t>([](Config& c) -> auto& { return c.network.image_channels; })},
        {"network.stem_channels", field<std::int64_t>([](Config& c) -> auto& { return c.network.stem_channels; })},
        {"network.backbone_channels", field<std::int64_t>([](Config& c) -> auto& { return c.network.backbone_channels; })},
        {"network.branch_out", field<std::int64_t>([](Config& c) -> auto& { return c.network.branch_out; })},
        {"network.msk_mid", field<std::int64_t>([](Config& c) -> auto& { return c.network.msk_mid; })},
        {"network.strip", field<std::int64_t>([](Config& c) -> auto& { return c.network.strip; })},
        {"network.pool_window", field<std::int64_t>([](Config& c) -> auto& { return c.network.pool_window; })},
        {"network.head_channels", field<std::int64_t>([](Config& c) -> auto& { return c.network.head_channels; })},
        {"network.anchors", field<std::int64_t>([](Config& c) -> auto& { return c.network.anchors; })},
        {"network.classes", field<std::int64_t>([](Config& c) -> auto& { return c.network.classes; })},
        {"network.omega", field<double>([](Config& c) -> auto& { return c.network.omega; })},
        {"network.anchor_scale", field<double>([](Config& c) -> auto& { return c.network.anchor_scale; })},

        {"data.seed", field<std::uint64_t>([](Config& c) -> auto& { return c.data.seed; })},
        {"data.images", field<std::int64_t>([](Config& c) -> auto& { return c.data.images; })},
        {"data.height", field<std::int64_t>([](Config& c) -> auto& { return c.data.height; })},
        {"data.width", field<std::int64_t>([](Config& c) -> auto& { return c.data.width; })},
        {"data.objects", field<int>([](Config& c) -> auto& { return c.data.scene.objects; })},
        {"data.min_size", field<double>([](Config& c) -> auto& { return c.data.scene.min_size; })},
        {"data.max_size", field<double>([](Config& c) -> auto& { return c.data.scene.max_size; })},
        {"data.noise", field<double>([](Config& c) -> auto& { return c.data.scene.noise; })},
        {"data.max_attempts", field<int>([](Config& c) -> auto& { return c.data.scene.max_attempts; })},
        {"data.angle_mode",
         [](Config& c, const std::string& key, const std::string& v) {
             if (v == "random") c.data.scene.angle_mode = scene::AngleMode::Random;
             else if (v == "axis") c.data.scene.angle_mode = scene::AngleMode::AxisAligned;
             else throw ConfigError("config key '" + key + "': expected random or axis, got '" + v + "'");
         }},

        {"eval.mode",
         [](Config& c, const std::string& key, const std::string& v) {
             if (v == "network") c.eval.mode = EvalMode::Network;
             else if (v == "oracle") c.eval.mode = EvalMode::Oracle;
             else if (v == "empty") c.eval.mode = EvalMode::Empty;
             else throw ConfigError("config key '" + key + "': expected network, oracle or empty, got '" + v + "'");
         }},
        {"eval.iou_threshold", field<double>([](Config& c) -> auto& { return c.eval.options.iou_threshold; })},
        {"eval.coco_sweep", field<bool>([](Config& c) -> auto& { return c.eval.options.coco_sweep; })},
        {"eval.nms_threshold", field<double>([](Config& c) -> auto& { return c.eval.decode.nms_threshold; })},
        {"eval.score_threshold", field<double>([](Config& c) -> auto& { return c.eval.decode.score_threshold; })},
        {"eval.max_detections", field<std::size_t>([](Config& c) -> auto& { return c.eval.decode.max_detections; })},

        {"audit.channels", field<std::int64_t>([](Config& c) -> auto& { return c.audit.channels; })},

        {"gradcheck.eps", field<double>([](Config& c) -> auto& { return c.gradcheck.eps; })},
        {"gradcheck.image_size", field<std::int64_t>([](Config& c) -> auto& { return c.gradcheck.image_size; })},
        {"gradcheck.max_coordinates", field<std::int64_t>([](Config& c) -> auto& { return c.gradcheck.max_coordinates; })},
        {"gradcheck.assembly_coordinates", field<std::int64_t>([](Config& c) -> auto& { return c.gradcheck.assembly_coordinates; })},

        {"boundary.omega", field<double>([](Config& c) -> auto& { return c.boundary.omega; })},
        {"boundary.delta", field<double>([](Config& c) -> auto& { return c.boundary.delta; })},
        {"boundary.dataset_size", field<std::int64_t>([](Config& c) -> auto& { return c.boundary.dataset_size; })},
        {"boundary.steps", field<std::int64_t>([](Config& c) -> auto& { return c.boundary.steps; })},
        {"boundary.lr", field<double>([](Config& c) -> auto& { return c.boundary.lr; })},
        {"boundary.seed", field<std::uint64_t>([](Config& c) -> auto& { return c.boundary.seed; })},
        {"boundary.landscape_samples", field<std::int64_t>([](Config& c) -> auto& { return c.boundary.landscape_samples; })},
        {"boundary.jump_threshold", field<double>([](Config& c) -> auto& { return c.boundary.jump_threshold; })},

        {"paths.out", [](Config& c, const std::string&, const std::string& v) { c.out_dir = v; }},
    };
    return table;
}

}  // namespace

const char* eval_mode_name(EvalMode m) {
    switch (m) {
        case EvalMode::Oracle: return "oracle";
        case EvalMode::Empty: return "empty";
        default: return "network";
    }
}

void Config::validate() const {
    try {
        network.validate();
        boundary.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    if (data.images < 1) throw ConfigError("config key 'data.images' must be >= 1");
    if (data.height < 1 || data.width < 1) throw ConfigError("config keys 'data.height'/'data.width' must be >= 1");
    if (data.scene.objects < 0) throw ConfigError("config key 'data.objects' must be >= 0");
    if (!(data.scene.min_size > 0.0) || data.scene.max_size < data.scene.min_size) {
        throw ConfigError("config keys 'data.min_size'/'data.max_size' must satisfy 0 < min <= max");
    }
    auto unit = [](double v, const char* key) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("config key '") + key + "' must lie in [0, 1]");
    };
    unit(eval.options.iou_threshold, "eval.iou_threshold");
    unit(eval.decode.nms_threshold, "eval.nms_threshold");
    unit(eval.decode.score_threshold, "eval.score_threshold");
    if (audit.channels < 1) throw ConfigError("config key 'audit.channels' must be >= 1");
    if (!(gradcheck.eps > 0.0)) throw ConfigError("config key 'gradcheck.eps' must be positive");
    if (gradcheck.image_size < 64 || gradcheck.image_size % 64 != 0) {
        throw ConfigError("config key 'gradcheck.image_size' must be a positive multiple of 64");
    }
    if (gradcheck.max_coordinates < 0) throw ConfigError("config key 'gradcheck.max_coordinates' must be >= 0");
    if (gradcheck.assembly_coordinates < 0) {
        throw ConfigError("config key 'gradcheck.assembly_coordinates' must be >= 0");
    }
}

Config parse(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Config c;
    const auto& table = setters();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("config key '" + section + "' appears outside any [section]");
        }
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            auto it = table.find(full);
            if (it == table.end()) throw ConfigError("unknown config key '" + full + "'");
            it->second(c, full, node.data());
        }
    }
    c.data.scene.classes = static_cast<int>(c.network.classes);
    c.validate();
    return c;
}

Config load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    return parse(is);
}

void write_defaults(std::ostream& os) {
    const Config c;
    const auto& n = c.network;
    os << "[network]\n"
       << "image_channels = " << n.image_channels << "\nstem_channels = " << n.stem_channels
       << "\nbackbone_channels = " << n.backbone_channels << "\nbranch_out = " << n.branch_out
       << "\nmsk_mid = " << n.msk_mid << "\nstrip = " << n.strip << "\npool_window = " << n.pool_window
       << "\nhead_channels = " << n.head_channels << "\nanchors = " << n.anchors
       << "\nclasses = " << n.classes << "\nomega = " << n.omega << "\nanchor_scale = " << n.anchor_scale
       << "\n\n[data]\nseed = " << c.data.seed << "\nimages = " << c.data.images
       << "\nheight = " << c.data.height << "\nwidth = " << c.data.width
       << "\nobjects = " << c.data.scene.objects << "\nmin_size = " << c.data.scene.min_size
       << "\nmax_size = " << c.data.scene.max_size << "\nangle_mode = random\nnoise = " << c.data.scene.noise
       << "\nmax_attempts = " << c.data.scene.max_attempts
       << "\n\n[eval]\nmode = network\niou_threshold = " << c.eval.options.iou_threshold
       << "\ncoco_sweep = false\nnms_threshold = " << c.eval.decode.nms_threshold
       << "\nscore_threshold = " << c.eval.decode.score_threshold
       << "\nmax_detections = " << c.eval.decode.max_detections
       << "\n\n[audit]\nchannels = " << c.audit.channels
       << "\n\n[gradcheck]\neps = " << c.gradcheck.eps << "\nimage_size = " << c.gradcheck.image_size
       << "\nmax_coordinates = " << c.gradcheck.max_coordinates
       << "\nassembly_coordinates = " << c.gradcheck.assembly_coordinates
       << "\n\n[boundary]\nomega = " << c.boundary.omega << "\ndelta = " << c.boundary.delta
       << "\ndataset_size = " << c.boundary.dataset_size << "\nsteps = " << c.boundary.steps
       << "\nlr = " << c.boundary.lr << "\nseed = " << c.boundary.seed
       << "\nlandscape_samples = " << c.boundary.landscape_samples
       << "\njump_threshold = " << c.boundary.jump_threshold << "\n\n[paths]\nout = " << c.out_dir.string()
       << '\n';
}

}  // namespace rmk::config
