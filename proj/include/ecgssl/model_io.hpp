#pragma once

#include <filesystem>
#include <string>

#include "ecgssl/nn/checkpoint.hpp"
#include "ecgssl/pipelines.hpp"

namespace ecgssl {

namespace detail {

inline nlohmann::json encoder_config_json(const nn::EncoderConfig& c) {
    return {{"stages", c.stages},       {"base_width", c.base_width},
            {"blocks_per_stage", c.blocks_per_stage}, {"kernel", c.kernel},
            {"rep_dim", c.rep_dim},     {"input_len", c.input_len},
            {"stem_stride", c.stem_stride}};
}

inline nn::EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    nn::EncoderConfig c;
    c.stages = j.at("stages");
    c.base_width = j.at("base_width");
    c.blocks_per_stage = j.at("blocks_per_stage");
    c.kernel = j.at("kernel");
    c.rep_dim = j.at("rep_dim");
    c.input_len = j.at("input_len");
    c.stem_stride = j.value("stem_stride", 1);
    return c;
}

inline void pack_rep(nn::Checkpoint& ck, const RepModel& model) {
    ck.meta["task"] = model.task;
    ck.meta["rep_dim"] = model.dim;
    ck.meta["input_len"] = model.input_len;
    switch (model.kind) {
        case RepModel::Kind::Encoder: {
            ck.meta["rep_kind"] = "encoder";
            ck.meta["encoder_config"] = encoder_config_json(model.encoder.cfg);
            std::vector<nn::Param<float>*> ps;
            const_cast<nn::Encoder<float>&>(model.encoder).collect(ps);
            for (const auto* p : ps) ck.add(p->name, p->value);
            break;
        }
        case RepModel::Kind::RP:
            ck.meta["rep_kind"] = "rp";
            ck.add("rp.matrix", model.rp_matrix);
            break;
        case RepModel::Kind::PCA: {
            ck.meta["rep_kind"] = "pca";
            nn::Tensor<float> mean({model.input_len});
            mean.v = model.pca_mean;
            ck.add("pca.mean", mean);
            ck.add("pca.components", model.pca_components);
            break;
        }
    }
}

inline RepModel unpack_rep(const nn::Checkpoint& ck) {
    RepModel model;
    model.task = ck.meta.at("task");
    model.dim = ck.meta.at("rep_dim");
    model.input_len = ck.meta.at("input_len");
    const std::string kind = ck.meta.at("rep_kind");
    if (kind == "encoder") {
        model.kind = RepModel::Kind::Encoder;
        model.encoder.init(encoder_config_from_json(ck.meta.at("encoder_config")), 0);
        std::vector<nn::Param<float>*> ps;
        model.encoder.collect(ps);
        for (auto* p : ps) {
            const auto& t = ck.get(p->name);
            if (t.shape != p->value.shape)
                throw DataError("checkpoint tensor " + p->name + " has unexpected shape");
            p->value = t;
        }
    } else if (kind == "rp") {
        model.kind = RepModel::Kind::RP;
        model.rp_matrix = ck.get("rp.matrix");
    } else if (kind == "pca") {
        model.kind = RepModel::Kind::PCA;
        model.pca_mean = ck.get("pca.mean").v;
        model.pca_components = ck.get("pca.components");
    } else {
        throw DataError("unknown rep_kind in checkpoint: " + kind);
    }
    return model;
}

} // namespace detail

inline void save_rep_model(const RepModel& model, const std::filesystem::path& path) {
    nn::Checkpoint ck;
    ck.meta["model"] = "representation";
    detail::pack_rep(ck, model);
    ck.save(path);
}

inline RepModel load_rep_model(const std::filesystem::path& path) {
    const nn::Checkpoint ck = nn::Checkpoint::load(path);
    if (ck.meta.at("model") != "representation")
        throw DataError("checkpoint is not a representation model: " + path.string());
    return detail::unpack_rep(ck);
}

inline void save_downstream_model(const DownstreamModel& model, const std::filesystem::path& path,
                                  const nlohmann::json& extra_meta = {}) {
    nn::Checkpoint ck;
    ck.meta["model"] = "downstream";
    detail::pack_rep(ck, model.rep);
    if (!extra_meta.is_null())
        for (const auto& [k, v] : extra_meta.items()) ck.meta[k] = v;
    ck.add("head.w", model.head.w.value);
    ck.add("head.b", model.head.b.value);
    ck.save(path);
}

/// Raw checkpoint metadata, for config echoes in reports.
inline nlohmann::json load_checkpoint_meta(const std::filesystem::path& path) {
    return nn::Checkpoint::load(path).meta;
}

inline DownstreamModel load_downstream_model(const std::filesystem::path& path) {
    const nn::Checkpoint ck = nn::Checkpoint::load(path);
    if (ck.meta.at("model") != "downstream")
        throw DataError("checkpoint is not a downstream model: " + path.string());
    DownstreamModel dm;
    dm.rep = detail::unpack_rep(ck);
    dm.head.w.name = "head.w";
    dm.head.b.name = "head.b";
    dm.head.w.init_shape(ck.get("head.w").shape);
    dm.head.b.init_shape(ck.get("head.b").shape);
    dm.head.w.value = ck.get("head.w");
    dm.head.b.value = ck.get("head.b");
    return dm;
}

/// Generic probe used by the CLI `evaluate` path: true if the file holds a
/// downstream model (encoder+head) rather than a bare representation.
inline bool is_downstream_checkpoint(const std::filesystem::path& path) {
    const nn::Checkpoint ck = nn::Checkpoint::load(path);
    return ck.meta.at("model") == "downstream";
}

} // namespace ecgssl
