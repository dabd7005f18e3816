#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgssl/ingest.hpp"
#include "ecgssl/linalg.hpp"
#include "ecgssl/nn/encoder.hpp"
#include "ecgssl/nn/graph.hpp"
#include "ecgssl/nn/optim.hpp"
#include "ecgssl/signal.hpp"
#include "ecgssl/transforms.hpp"

namespace ecgssl {

enum class PretextTask { TS, TemporalOnly, SpatialOnly, SimCLR, AE };

inline const char* pretext_task_name(PretextTask t) {
    switch (t) {
        case PretextTask::TS: return "ts";
        case PretextTask::TemporalOnly: return "temporal";
        case PretextTask::SpatialOnly: return "spatial";
        case PretextTask::SimCLR: return "simclr";
        default: return "ae";
    }
}

inline PretextTask pretext_task_from_name(const std::string& s) {
    if (s == "ts") return PretextTask::TS;
    if (s == "temporal") return PretextTask::TemporalOnly;
    if (s == "spatial") return PretextTask::SpatialOnly;
    if (s == "simclr") return PretextTask::SimCLR;
    if (s == "ae") return PretextTask::AE;
    throw UsageError("unknown pretext task: " + s);
}

struct PretrainConfig {
    PretextTask task = PretextTask::TS;
    nn::EncoderConfig encoder;
    int epochs = 30;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool softmax_head = false;  // 4-way softmax variant of the TS pretext
    double tau = 0.5;           // SimCLR temperature
    int permutation_pieces = 4;
    double noise_sigma = 0.01;
    double val_fraction = 0.1;  // held-out share of pretext examples
};

struct TrainLogEntry {
    int epoch = 0;
    double loss = 0;
    double pretext_accuracy = -1;  // -1 when the task defines none (SimCLR, AE, fine-tune)
};

/// A representation map Segment -> R^d: a trained encoder, a random
/// projection, or PCA components.
struct RepModel {
    enum class Kind { Encoder, RP, PCA };
    Kind kind = Kind::Encoder;
    std::string task = "ts";  // provenance echo for reports

    nn::Encoder<float> encoder;        // Kind::Encoder
    nn::Tensor<float> rp_matrix;       // Kind::RP, [d, L]
    std::vector<float> pca_mean;       // Kind::PCA, [L]
    nn::Tensor<float> pca_components;  // Kind::PCA, [d, L]
    int input_len = kSegmentLength;
    int dim = 0;

    std::vector<TrainLogEntry> log;
};

enum class FinetuneMode { LinearProbe, Full };

struct FinetuneConfig {
    FinetuneMode mode = FinetuneMode::Full;
    int epochs = 50;
    int batch = 64;
    double lr = 1e-3;
    // Full mode trains the pre-trained encoder this much slower than the
    // fresh head; scratch training overrides to 1.
    double encoder_lr_factor = 0.1;
    std::uint64_t seed = 0;
};

/// Representation model plus the downstream head; scores are sigmoid(logit).
struct DownstreamModel {
    RepModel rep;
    nn::LinearLayer<float> head;
    std::vector<TrainLogEntry> log;
};

namespace detail {

inline void check_segments(const std::vector<Segment>& segments, int input_len,
                           bool reject_degenerate = true) {
    if (segments.empty()) throw DataError("no segments provided");
    for (const auto& s : segments) {
        if (reject_degenerate && s.degenerate)
            throw DataError("degenerate segment in training set");
        if (static_cast<int>(s.samples.size()) != input_len)
            throw DataError("segment length " + std::to_string(s.samples.size()) +
                            " does not match the configured input length " +
                            std::to_string(input_len));
    }
}

inline nn::Tensor<float> batch_tensor(const std::vector<const Segment*>& segs) {
    const int b = static_cast<int>(segs.size());
    const int len = static_cast<int>(segs[0]->samples.size());
    nn::Tensor<float> t({b, len});
    for (int i = 0; i < b; ++i)
        std::copy(segs[i]->samples.begin(), segs[i]->samples.end(),
                  t.v.begin() + static_cast<std::size_t>(i) * len);
    return t;
}

/// Exact-code pretext accuracy: an example counts only if every bit (or the
/// 4-way argmax) is right.
inline double pretext_accuracy(const nn::Tensor<float>& logits,
                               const std::vector<ReverseLabel>& targets, bool softmax4) {
    int correct = 0;
    const int b = logits.dim(0);
    for (int i = 0; i < b; ++i) {
        const ReverseLabel& lab = targets[static_cast<std::size_t>(i)];
        if (softmax4) {
            int arg = 0;
            for (int k = 1; k < logits.dim(1); ++k)
                if (logits.at2(i, k) > logits.at2(i, arg)) arg = k;
            correct += (arg == lab.class_index());
        } else if (logits.dim(1) == 2) {
            correct += ((logits.at2(i, 0) > 0) == (lab.spatial != 0) &&
                        (logits.at2(i, 1) > 0) == (lab.temporal != 0));
        } else {
            // single-bit ablation tasks: the active bit is whichever is set
            const int bit = lab.spatial | lab.temporal;
            correct += ((logits.at2(i, 0) > 0) == (bit != 0));
        }
    }
    return static_cast<double>(correct) / b;
}

// sub-seed streams hanging off the user seed
enum SeedStream : std::uint64_t {
    kSeedEncoderInit = 1,
    kSeedHeadInit = 2,
    kSeedValSplit = 3,
    kSeedEpochShuffle = 100,   // + epoch
    kSeedAugment = 1'000'000,  // + example counter
    kSeedDecoderInit = 4,
};

} // namespace detail

/// Stage-1 pretraining on unlabeled segments (reverse-detection tasks and
/// SimCLR). Trains encoder + pretext objective, logs per-epoch loss (plus
/// held-out pretext accuracy for the classification tasks), discards the
/// head and returns the encoder. epochs = 0 returns the randomly
/// initialized encoder unchanged.
inline RepModel pretrain(const std::vector<Segment>& segments, const PretrainConfig& cfg) {
    if (cfg.task == PretextTask::AE)
        throw UsageError("pretrain: the AE task is trained via train_autoencoder");
    detail::check_segments(segments, cfg.encoder.input_len);
    if (cfg.epochs < 0 || cfg.batch <= 0 || cfg.lr <= 0)
        throw UsageError("pretrain: epochs must be >= 0, batch and lr positive");

    RepModel model;
    model.kind = RepModel::Kind::Encoder;
    model.task = pretext_task_name(cfg.task);
    model.input_len = cfg.encoder.input_len;
    model.dim = cfg.encoder.rep_dim;
    model.encoder.init(cfg.encoder, derive_seed(cfg.seed, detail::kSeedEncoderInit));

    if (cfg.task == PretextTask::SimCLR) {
        std::vector<nn::Param<float>*> params;
        model.encoder.collect(params);
        nn::Optimizer<float> opt;
        opt.lr = cfg.lr;
        opt.params = params;

        AugmentSpec perm{AugmentSpec::Kind::Permutation, cfg.permutation_pieces, cfg.noise_sigma, 0};
        AugmentSpec noise{AugmentSpec::Kind::GaussianNoise, cfg.permutation_pieces, cfg.noise_sigma, 0};

        std::vector<std::size_t> order(segments.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::uint64_t aug_counter = 0;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            Rng rng(derive_seed(cfg.seed, detail::kSeedEpochShuffle + static_cast<std::uint64_t>(epoch)));
            rng.shuffle(order);
            double loss_sum = 0;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
                const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
                const int n = static_cast<int>(end - start);
                if (n < 2) continue;  // a positive pair needs at least one negative pair
                std::vector<Segment> views;
                std::vector<int> pairing(static_cast<std::size_t>(2 * n));
                views.reserve(static_cast<std::size_t>(2 * n));
                for (int i = 0; i < n; ++i) {
                    const Segment& s = segments[order[start + static_cast<std::size_t>(i)]];
                    perm.seed = derive_seed(cfg.seed, detail::kSeedAugment + aug_counter++);
                    noise.seed = derive_seed(cfg.seed, detail::kSeedAugment + aug_counter++);
                    views.push_back(augment(s, perm));
                    views.push_back(augment(s, noise));
                    pairing[static_cast<std::size_t>(2 * i)] = 2 * i + 1;
                    pairing[static_cast<std::size_t>(2 * i + 1)] = 2 * i;
                }
                std::vector<const Segment*> ptrs;
                for (const auto& v : views) ptrs.push_back(&v);
                nn::Graph<float> g;
                const int reps = model.encoder.forward(g, g.leaf(detail::batch_tensor(ptrs)));
                const int loss = nn::ntxent_loss(g, reps, pairing, static_cast<float>(cfg.tau));
                const double lv = g.value(loss).v[0];
                if (!std::isfinite(lv))
                    throw NumericError("pretrain(simclr): NaN/inf loss at epoch " + std::to_string(epoch));
                loss_sum += lv;
                ++batches;
                opt.zero_grad();
                g.backward(loss);
                opt.step();
            }
            if (batches == 0) throw DataError("pretrain(simclr): need at least 2 segments per batch");
            model.log.push_back({epoch, loss_sum / static_cast<double>(batches), -1.0});
        }
        return model;
    }

    const auto examples = make_pretext_set(
        segments, cfg.task == PretextTask::TS
                      ? PretextMode::TS
                      : (cfg.task == PretextTask::TemporalOnly ? PretextMode::TemporalOnly
                                                               : PretextMode::SpatialOnly));

    // pretext head: 2 sigmoid bits (default), 4-way softmax (option), a
    // single bit for the ablation tasks
    const bool binary = cfg.task != PretextTask::TS;
    const bool softmax4 = !binary && cfg.softmax_head;
    const int head_dim = binary ? 1 : (softmax4 ? 4 : 2);
    nn::LinearLayer<float> head;
    {
        Rng rng(derive_seed(cfg.seed, detail::kSeedHeadInit));
        head.init("pretext_head", cfg.encoder.rep_dim, head_dim, rng);
    }

    // 90/10 example-level split for the logged held-out pretext accuracy
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(derive_seed(cfg.seed, detail::kSeedValSplit));
    split_rng.shuffle(order);
    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(examples.size())));
    if (n_val >= examples.size()) throw DataError("pretrain: not enough pretext examples");
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    std::vector<nn::Param<float>*> params;
    model.encoder.collect(params);
    head.collect(params);
    nn::Optimizer<float> opt;
    opt.lr = cfg.lr;
    opt.params = params;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, detail::kSeedEpochShuffle + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(train_idx);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch));
            std::vector<const Segment*> segs;
            std::vector<ReverseLabel> labs;
            for (std::size_t k = start; k < end; ++k) {
                segs.push_back(&examples[train_idx[k]].segment);
                labs.push_back(examples[train_idx[k]].target);
            }
            nn::Graph<float> g;
            const int reps = model.encoder.forward(g, g.leaf(detail::batch_tensor(segs)));
            const int logits = head.forward(g, reps);
            int loss;
            if (softmax4) {
                std::vector<int> cls;
                for (const auto& l : labs) cls.push_back(l.class_index());
                loss = g.softmax_ce(logits, cls);
            } else {
                nn::Tensor<float> targets({static_cast<int>(labs.size()), head_dim});
                for (std::size_t i = 0; i < labs.size(); ++i) {
                    if (binary)
                        targets.at2(static_cast<int>(i), 0) =
                            static_cast<float>(labs[i].spatial | labs[i].temporal);
                    else {
                        targets.at2(static_cast<int>(i), 0) = labs[i].spatial;
                        targets.at2(static_cast<int>(i), 1) = labs[i].temporal;
                    }
                }
                loss = g.bce_multilabel(logits, targets);
            }
            const double lv = g.value(loss).v[0];
            if (!std::isfinite(lv))
                throw NumericError("pretrain: NaN/inf loss at epoch " + std::to_string(epoch));
            loss_sum += lv;
            ++batches;
            opt.zero_grad();
            g.backward(loss);
            opt.step();
        }

        double acc;
        {
            std::vector<const Segment*> segs;
            std::vector<ReverseLabel> labs;
            for (std::size_t k : val_idx) {
                segs.push_back(&examples[k].segment);
                labs.push_back(examples[k].target);
            }
            nn::Graph<float> g;
            g.set_inference(true);
            const int reps = model.encoder.forward(g, g.leaf(detail::batch_tensor(segs)));
            const int logits = head.forward(g, reps);
            acc = detail::pretext_accuracy(g.value(logits), labs, softmax4);
        }
        model.log.push_back({epoch, loss_sum / static_cast<double>(batches), acc});
    }
    return model;
}

/// Reconstruction baseline: encoder to R^d plus a mirrored
/// transposed-convolution decoder, trained on MSE; the decoder is dropped
/// on return.
inline RepModel train_autoencoder(const std::vector<Segment>& segments, const PretrainConfig& cfg) {
    detail::check_segments(segments, cfg.encoder.input_len);
    if (cfg.epochs < 0 || cfg.batch <= 0 || cfg.lr <= 0)
        throw UsageError("train_autoencoder: epochs must be >= 0, batch and lr positive");

    RepModel model;
    model.kind = RepModel::Kind::Encoder;
    model.task = "ae";
    model.input_len = cfg.encoder.input_len;
    model.dim = cfg.encoder.rep_dim;
    model.encoder.init(cfg.encoder, derive_seed(cfg.seed, detail::kSeedEncoderInit));

    nn::Decoder<float> decoder;
    decoder.init(cfg.encoder, model.encoder.stage_lengths(), derive_seed(cfg.seed, detail::kSeedDecoderInit));

    std::vector<nn::Param<float>*> params;
    model.encoder.collect(params);
    decoder.collect(params);
    nn::Optimizer<float> opt;
    opt.lr = cfg.lr;
    opt.params = params;

    std::vector<std::size_t> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, detail::kSeedEpochShuffle + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            std::vector<const Segment*> segs;
            for (std::size_t k = start; k < end; ++k) segs.push_back(&segments[order[k]]);
            nn::Tensor<float> batch = detail::batch_tensor(segs);
            nn::Graph<float> g;
            const int reps = model.encoder.forward(g, g.leaf(batch));
            const int recon = decoder.forward(g, reps);
            const int loss = g.mse(recon, batch);
            const double lv = g.value(loss).v[0];
            if (!std::isfinite(lv))
                throw NumericError("train_autoencoder: NaN/inf loss at epoch " + std::to_string(epoch));
            loss_sum += lv;
            ++batches;
            opt.zero_grad();
            g.backward(loss);
            opt.step();
        }
        model.log.push_back({epoch, loss_sum / static_cast<double>(batches), -1.0});
    }
    return model;
}

/// Random-projection baseline: [d, L] i.i.d. gaussian entries of variance 1/d.
inline RepModel fit_rp(int d, std::uint64_t seed, int input_len = kSegmentLength) {
    if (d <= 0) throw UsageError("fit_rp: dimension must be positive");
    RepModel model;
    model.kind = RepModel::Kind::RP;
    model.task = "rp";
    model.input_len = input_len;
    model.dim = d;
    model.rp_matrix = nn::Tensor<float>({d, input_len});
    Rng rng(seed);
    const double std = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& v : model.rp_matrix.v) v = static_cast<float>(rng.normal(0.0, std));
    return model;
}

/// PCA baseline: mean-center, then the top-d right singular vectors of the
/// data matrix (no covariance formation), ordered by decreasing singular
/// value.
inline RepModel fit_pca(const std::vector<Segment>& segments, int d) {
    if (segments.empty()) throw DataError("fit_pca: no segments");
    const int len = static_cast<int>(segments[0].samples.size());
    detail::check_segments(segments, len);
    if (d <= 0) throw UsageError("fit_pca: dimension must be positive");
    if (static_cast<int>(segments.size()) < d)
        throw DataError("fit_pca: need at least d segments");

    const int n = static_cast<int>(segments.size());
    std::vector<double> mean(static_cast<std::size_t>(len), 0.0);
    for (const auto& s : segments)
        for (int c = 0; c < len; ++c) mean[static_cast<std::size_t>(c)] += s.samples[static_cast<std::size_t>(c)];
    for (auto& m : mean) m /= n;

    linalg::Mat X(n, len);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < len; ++c)
            X.at(i, c) = static_cast<double>(segments[static_cast<std::size_t>(i)].samples[static_cast<std::size_t>(c)]) -
                         mean[static_cast<std::size_t>(c)];

    const auto svd = linalg::top_right_singular(X, d, /*seed=*/0x9CA5EED);
    const double sigma_max = svd.singular_values.empty() ? 0.0 : svd.singular_values[0];
    int rank = 0;
    for (double s : svd.singular_values)
        if (s > sigma_max * 1e-7) ++rank;
    if (rank < d)
        throw NumericError("fit_pca: data rank " + std::to_string(rank) +
                           " is below the requested dimension " + std::to_string(d));

    RepModel model;
    model.kind = RepModel::Kind::PCA;
    model.task = "pca";
    model.input_len = len;
    model.dim = d;
    model.pca_mean.assign(mean.begin(), mean.end());
    model.pca_components = nn::Tensor<float>({d, len});
    for (int j = 0; j < d; ++j)
        for (int c = 0; c < len; ++c)
            model.pca_components.at2(j, c) = static_cast<float>(svd.components.at(j, c));
    return model;
}

/// Maps segments to representations [B, d]. Encoder kind runs the forward
/// pass in inference mode; RP multiplies; PCA projects the centered signal.
inline nn::Tensor<float> embed(const RepModel& model, const std::vector<Segment>& segments,
                               int batch = 256) {
    if (segments.empty()) return nn::Tensor<float>({0, model.dim});
    detail::check_segments(segments, model.input_len, /*reject_degenerate=*/false);
    const int n = static_cast<int>(segments.size());
    nn::Tensor<float> out({n, model.dim});

    if (model.kind == RepModel::Kind::Encoder) {
        // forward passes never write to the model; the graph copies values
        auto& enc = const_cast<nn::Encoder<float>&>(model.encoder);
        for (int start = 0; start < n; start += batch) {
            const int end = std::min(n, start + batch);
            std::vector<const Segment*> segs;
            for (int k = start; k < end; ++k) segs.push_back(&segments[static_cast<std::size_t>(k)]);
            nn::Graph<float> g;
            g.set_inference(true);
            const int reps = enc.forward(g, g.leaf(detail::batch_tensor(segs)));
            const auto& rv = g.value(reps);
            for (int i = 0; i < end - start; ++i)
                for (int c = 0; c < model.dim; ++c) out.at2(start + i, c) = rv.at2(i, c);
        }
        return out;
    }

    for (int i = 0; i < n; ++i) {
        const auto& s = segments[static_cast<std::size_t>(i)].samples;
        for (int j = 0; j < model.dim; ++j) {
            double acc = 0;
            if (model.kind == RepModel::Kind::RP) {
                const float* row = &model.rp_matrix.v[static_cast<std::size_t>(j) * model.input_len];
                for (int c = 0; c < model.input_len; ++c) acc += static_cast<double>(row[c]) * s[static_cast<std::size_t>(c)];
            } else {
                const float* row = &model.pca_components.v[static_cast<std::size_t>(j) * model.input_len];
                for (int c = 0; c < model.input_len; ++c)
                    acc += static_cast<double>(row[c]) *
                           (static_cast<double>(s[static_cast<std::size_t>(c)]) - model.pca_mean[static_cast<std::size_t>(c)]);
            }
            out.at2(i, j) = static_cast<float>(acc);
        }
    }
    return out;
}

/// sigmoid(logit) scores in [0,1] for a batch of segments.
inline std::vector<double> score(const DownstreamModel& model, const std::vector<Segment>& segments) {
    const nn::Tensor<float> reps = embed(model.rep, segments);
    std::vector<double> out(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        double logit = model.head.b.value.v[0];
        for (int c = 0; c < model.rep.dim; ++c)
            logit += static_cast<double>(model.head.w.value.at2(0, c)) * reps.at2(static_cast<int>(i), c);
        out[i] = 1.0 / (1.0 + std::exp(-logit));
    }
    return out;
}

/// Stage-2 fine-tuning for AF detection. LinearProbe freezes the
/// representation and trains only the head (mandatory for RP/PCA); Full
/// also updates encoder weights at a 10x smaller learning rate. The model
/// argument is taken by value: the caller's copy is never touched.
inline DownstreamModel finetune(RepModel model, const std::vector<LabeledSegment>& data,
                                const FinetuneConfig& cfg) {
    if (data.empty()) throw DataError("finetune: no labeled segments");
    bool pos = false, neg = false;
    for (const auto& ls : data) (ls.label ? pos : neg) = true;
    if (!pos || !neg) throw DataError("finetune: both classes must be present");
    if (cfg.mode == FinetuneMode::Full && model.kind != RepModel::Kind::Encoder)
        throw UsageError("finetune: Full mode requires an encoder representation");
    if (cfg.epochs < 0 || cfg.batch <= 0 || cfg.lr <= 0)
        throw UsageError("finetune: epochs must be >= 0, batch and lr positive");

    DownstreamModel dm;
    dm.rep = std::move(model);
    {
        // Zero-initialized head: logits start at 0 whatever the scale of the
        // incoming representation, so the first steps cannot thrash a
        // pre-trained encoder through a saturated sigmoid.
        Rng rng(derive_seed(cfg.seed, detail::kSeedHeadInit));
        dm.head.init("af_head", dm.rep.dim, 1, rng);
        dm.head.w.value.fill(0.0f);
        dm.head.b.value.fill(0.0f);
    }

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    if (cfg.mode == FinetuneMode::LinearProbe) {
        // one frozen embedding pass, then plain logistic regression
        std::vector<Segment> segs;
        segs.reserve(data.size());
        for (const auto& ls : data) segs.push_back(ls.segment);
        const nn::Tensor<float> feats = embed(dm.rep, segs);

        std::vector<nn::Param<float>*> params;
        dm.head.collect(params);
        nn::Optimizer<float> opt;
        opt.lr = cfg.lr;
        opt.params = params;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            Rng rng(derive_seed(cfg.seed, detail::kSeedEpochShuffle + static_cast<std::uint64_t>(epoch)));
            rng.shuffle(order);
            double loss_sum = 0;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
                const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
                const int b = static_cast<int>(end - start);
                nn::Tensor<float> x({b, dm.rep.dim});
                nn::Tensor<float> t({b, 1});
                for (int i = 0; i < b; ++i) {
                    const std::size_t k = order[start + static_cast<std::size_t>(i)];
                    for (int c = 0; c < dm.rep.dim; ++c)
                        x.at2(i, c) = feats.at2(static_cast<int>(k), c);
                    t.at2(i, 0) = static_cast<float>(data[k].label);
                }
                nn::Graph<float> g;
                const int loss = g.bce_multilabel(dm.head.forward(g, g.leaf(x)), t);
                const double lv = g.value(loss).v[0];
                if (!std::isfinite(lv))
                    throw NumericError("finetune: NaN/inf loss at epoch " + std::to_string(epoch));
                loss_sum += lv;
                ++batches;
                opt.zero_grad();
                g.backward(loss);
                opt.step();
            }
            dm.log.push_back({epoch, loss_sum / static_cast<double>(batches), -1.0});
        }
        return dm;
    }

    // Full fine-tune: the pre-trained weights only need small adjustments,
    // so the encoder group runs slower than the fresh head.
    std::vector<nn::Param<float>*> enc_params, head_params;
    dm.rep.encoder.collect(enc_params);
    dm.head.collect(head_params);
    nn::Optimizer<float> enc_opt, head_opt;
    enc_opt.lr = cfg.lr * cfg.encoder_lr_factor;
    enc_opt.params = enc_params;
    head_opt.lr = cfg.lr;
    head_opt.params = head_params;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, detail::kSeedEpochShuffle + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            const int b = static_cast<int>(end - start);
            std::vector<const Segment*> segs;
            nn::Tensor<float> t({b, 1});
            for (int i = 0; i < b; ++i) {
                const std::size_t k = order[start + static_cast<std::size_t>(i)];
                segs.push_back(&data[k].segment);
                t.at2(i, 0) = static_cast<float>(data[k].label);
            }
            nn::Graph<float> g;
            const int reps = dm.rep.encoder.forward(g, g.leaf(detail::batch_tensor(segs)));
            const int loss = g.bce_multilabel(dm.head.forward(g, reps), t);
            const double lv = g.value(loss).v[0];
            if (!std::isfinite(lv))
                throw NumericError("finetune: NaN/inf loss at epoch " + std::to_string(epoch));
            loss_sum += lv;
            ++batches;
            enc_opt.zero_grad();
            head_opt.zero_grad();
            g.backward(loss);
            enc_opt.step();
            head_opt.step();
        }
        dm.log.push_back({epoch, loss_sum / static_cast<double>(batches), -1.0});
    }
    return dm;
}

struct ScratchConfig {
    nn::EncoderConfig encoder;
    int epochs = 50;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

/// Supervised-only reference: the same architecture from random
/// initialization, trained directly on the downstream labels.
inline DownstreamModel train_from_scratch(const std::vector<LabeledSegment>& data,
                                          const ScratchConfig& cfg) {
    RepModel model;
    model.kind = RepModel::Kind::Encoder;
    model.task = "scratch";
    model.input_len = cfg.encoder.input_len;
    model.dim = cfg.encoder.rep_dim;
    model.encoder.init(cfg.encoder, derive_seed(cfg.seed, detail::kSeedEncoderInit));

    FinetuneConfig fcfg;
    fcfg.mode = FinetuneMode::Full;
    fcfg.epochs = cfg.epochs;
    fcfg.batch = cfg.batch;
    fcfg.lr = cfg.lr;
    // no pre-trained weights to protect: one lr for everything
    fcfg.encoder_lr_factor = 1.0;
    fcfg.seed = cfg.seed;

    DownstreamModel dm = finetune(std::move(model), data, fcfg);
    dm.rep.task = "scratch";
    return dm;
}

} // namespace ecgssl
