#include "fovcast/weights.hpp"

#include <cstdio>
#include <cstring>
#include <vector>

#include "json.hpp"

#include "fovcast/common.hpp"

namespace fovcast {

using nn::Tensor;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'F', 'W', 'T', '1'};

void append_f64(std::string& out, const std::vector<Tensor>& params) {
    for (const Tensor& p : params) {
        auto v = p.values();
        const std::size_t before = out.size();
        out.resize(before + v.size() * sizeof(double));
        std::memcpy(out.data() + before, v.data(), v.size() * sizeof(double));
    }
}

std::uint64_t fnv1a64(const char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ull;
    }
    return h;
}

ordered_json shapes_json(const std::vector<Tensor>& params) {
    ordered_json shapes = ordered_json::array();
    for (const Tensor& p : params) {
        ordered_json s = ordered_json::array();
        for (int d : p.shape()) s.push_back(d);
        shapes.push_back(std::move(s));
    }
    return shapes;
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

void write_checkpoint(const std::string& path, ordered_json manifest,
                      const std::vector<Tensor>& params) {
    std::string blob;
    append_f64(blob, params);
    manifest["tensors"] = shapes_json(params);
    manifest["digest"] = hex16(fnv1a64(blob.data(), blob.size()));
    const std::string meta = manifest.dump();

    std::string out;
    out.append(kMagic, 4);
    std::uint32_t len = static_cast<std::uint32_t>(meta.size());
    out.append(reinterpret_cast<const char*>(&len), 4);
    out += meta;
    out += blob;
    write_file_atomic(path, out);
}

struct Checkpoint {
    ordered_json manifest;
    std::string blob;  // raw f64 bytes
};

Checkpoint read_checkpoint(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DataError(path + ": not a weight checkpoint");
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 4, 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(len))
        throw DataError(path + ": truncated checkpoint manifest");
    Checkpoint cp;
    try {
        cp.manifest = ordered_json::parse(bytes.substr(8, len));
    } catch (const ordered_json::exception& e) {
        throw DataError(path + ": bad checkpoint manifest: " + e.what());
    }
    cp.blob = bytes.substr(8 + len);
    return cp;
}

/** Validate shapes against a freshly built model and overwrite its values. */
void restore_params(const std::string& path, const Checkpoint& cp,
                    std::vector<Tensor> params) {
    const ordered_json& shapes = cp.manifest.at("tensors");
    if (shapes.size() != params.size())
        throw DataError(path + ": checkpoint holds " + std::to_string(shapes.size()) +
                        " tensors, model expects " + std::to_string(params.size()));
    std::size_t total = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& want = params[i].shape();
        const ordered_json& got = shapes[i];
        bool same = got.size() == want.size();
        for (std::size_t d = 0; same && d < want.size(); ++d)
            same = got[d].get<int>() == want[d];
        if (!same) throw DataError(path + ": tensor " + std::to_string(i) + " shape mismatch");
        total += params[i].values().size();
    }
    if (cp.blob.size() != total * sizeof(double))
        throw DataError(path + ": checkpoint payload size mismatch");
    const std::string digest = hex16(fnv1a64(cp.blob.data(), cp.blob.size()));
    if (cp.manifest.at("digest").get<std::string>() != digest)
        throw DataError(path + ": checkpoint digest mismatch (corrupted payload)");

    std::size_t off = 0;
    for (Tensor& p : params) {
        std::vector<double>& vals = p.mutable_values();
        std::memcpy(vals.data(), cp.blob.data() + off, vals.size() * sizeof(double));
        off += vals.size() * sizeof(double);
    }
}

}  // namespace

std::uint64_t weight_digest(const std::vector<Tensor>& params) {
    std::string blob;
    append_f64(blob, params);
    return fnv1a64(blob.data(), blob.size());
}

std::string weight_digest_hex(const std::vector<Tensor>& params) {
    return hex16(weight_digest(params));
}

// ====================== trajectory checkpoints ======================

void save_trajectory_weights(const std::string& path, const TrajectoryModel& m) {
    ordered_json manifest;
    manifest["family"] = "trajectory";
    manifest["variant"] = to_string(m.config.variant);
    manifest["fps"] = m.config.fps;
    manifest["hidden"] = m.config.hidden;
    manifest["embed_dim"] = m.config.embed_dim;
    manifest["n_others"] = m.config.n_others;
    manifest["trained"] = m.trained;
    write_checkpoint(path, std::move(manifest), m.parameters());
}

TrajectoryModel load_trajectory_weights(const std::string& path) {
    Checkpoint cp = read_checkpoint(path);
    try {
        if (cp.manifest.at("family").get<std::string>() != "trajectory")
            throw DataError(path + ": checkpoint is not a trajectory model");
        TrajectoryModelConfig cfg;
        cfg.variant = trajectory_variant_from_name(cp.manifest.at("variant").get<std::string>());
        cfg.fps = cp.manifest.at("fps").get<int>();
        cfg.hidden = cp.manifest.at("hidden").get<int>();
        cfg.embed_dim = cp.manifest.at("embed_dim").get<int>();
        cfg.n_others = cp.manifest.at("n_others").get<int>();
        Rng rng(0);
        TrajectoryModel m = make_trajectory_model(cfg, rng);
        m.trained = cp.manifest.at("trained").get<bool>();
        restore_params(path, cp, m.parameters());
        return m;
    } catch (const ordered_json::exception& e) {
        throw DataError(path + ": bad checkpoint manifest: " + e.what());
    }
}

// ====================== heatmap checkpoints ======================

void save_heatmap_weights(const std::string& path, const HeatmapModel& m) {
    ordered_json manifest;
    manifest["family"] = "heatmap";
    manifest["fusion"] = to_string(m.config.fusion);
    manifest["fps"] = m.config.fps;
    manifest["channels"] = m.config.channels;
    manifest["others_channels"] = m.config.others_channels;
    manifest["sal_mid_channels"] = m.config.sal_mid_channels;
    manifest["sal_channels"] = m.config.sal_channels;
    manifest["head_mid_channels"] = m.config.head_mid_channels;
    manifest["kernel"] = m.config.kernel;
    manifest["trained"] = m.trained;
    write_checkpoint(path, std::move(manifest), m.parameters());
}

HeatmapModel load_heatmap_weights(const std::string& path) {
    Checkpoint cp = read_checkpoint(path);
    try {
        if (cp.manifest.at("family").get<std::string>() != "heatmap")
            throw DataError(path + ": checkpoint is not a heatmap model");
        HeatmapModelConfig cfg;
        cfg.fusion = fusion_from_name(cp.manifest.at("fusion").get<std::string>());
        cfg.fps = cp.manifest.at("fps").get<int>();
        cfg.channels = cp.manifest.at("channels").get<std::vector<int>>();
        cfg.others_channels = cp.manifest.at("others_channels").get<int>();
        cfg.sal_mid_channels = cp.manifest.at("sal_mid_channels").get<int>();
        cfg.sal_channels = cp.manifest.at("sal_channels").get<int>();
        cfg.head_mid_channels = cp.manifest.at("head_mid_channels").get<int>();
        cfg.kernel = cp.manifest.at("kernel").get<int>();
        Rng rng(0);
        HeatmapModel m = make_heatmap_model(cfg, rng);
        m.trained = cp.manifest.at("trained").get<bool>();
        restore_params(path, cp, m.parameters());
        return m;
    } catch (const ordered_json::exception& e) {
        throw DataError(path + ": bad checkpoint manifest: " + e.what());
    }
}

std::string checkpoint_family(const std::string& path) {
    Checkpoint cp = read_checkpoint(path);
    try {
        return cp.manifest.at("family").get<std::string>();
    } catch (const ordered_json::exception& e) {
        throw DataError(path + ": bad checkpoint manifest: " + e.what());
    }
}

}  // namespace fovcast
