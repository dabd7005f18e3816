// ecgssl command-line tool: synthetic data generation, two-stage
// pretrain/fine-tune workflows, baselines, evaluation, interpretation and
// experiment sweeps. Every run writes a config.json echo next to its
// output; all randomness flows from --seed through named sub-seeds.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecgssl/eval.hpp"
#include "ecgssl/ingest.hpp"
#include "ecgssl/interpret.hpp"
#include "ecgssl/model_io.hpp"
#include "ecgssl/pipelines.hpp"
#include "ecgssl/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_json(const fs::path& path, const ordered_json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ecgssl::DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

/// config.json echo beside the command output (inside DIR for directory
/// outputs, <file>.config.json for file outputs).
void write_config_echo(const fs::path& out_target, bool is_dir, const ordered_json& cfg) {
    const fs::path path = is_dir ? out_target / "config.json"
                                 : fs::path(out_target.string() + ".config.json");
    write_json(path, cfg);
}

void write_training_log(const fs::path& model_path, const std::vector<ecgssl::TrainLogEntry>& log) {
    std::ofstream out(model_path.string() + ".log.csv");
    if (!out) throw ecgssl::DataError("cannot write training log for " + model_path.string());
    out << "epoch,loss,pretext_accuracy\n";
    out.precision(9);
    for (const auto& e : log) out << e.epoch << ',' << e.loss << ',' << e.pretext_accuracy << "\n";
}

struct EncoderFlags {
    int stages = 4;
    int width = 16;
    int blocks = 2;
    int kernel = 7;
    int stem_stride = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--stages", stages, "encoder stages");
        cmd->add_option("--width", width, "encoder base width (channels)");
        cmd->add_option("--blocks", blocks, "residual blocks per stage");
        cmd->add_option("--kernel", kernel, "conv kernel size (odd)");
        cmd->add_option("--stem-stride", stem_stride, "extra stem downsampling (1 = reference)");
    }
    ecgssl::nn::EncoderConfig config(int dim) const {
        ecgssl::nn::EncoderConfig cfg;
        cfg.stages = stages;
        cfg.base_width = width;
        cfg.blocks_per_stage = blocks;
        cfg.kernel = kernel;
        cfg.stem_stride = stem_stride;
        cfg.rep_dim = dim;
        return cfg;
    }
    ordered_json echo() const {
        return {{"stages", stages}, {"width", width}, {"blocks", blocks},
                {"kernel", kernel}, {"stem_stride", stem_stride}};
    }
};

std::vector<ecgssl::LabeledSegment> load_labeled_or_throw(const std::string& data_dir) {
    const auto manifest = ecgssl::read_manifest(fs::path(data_dir) / ecgssl::kManifestName);
    auto segs = ecgssl::load_labeled_segments(manifest);
    if (segs.empty()) throw ecgssl::DataError("no labeled segments in " + data_dir);
    return segs;
}

ecgssl::MetricsReport evaluate_model(const ecgssl::DownstreamModel& model,
                                     const std::vector<ecgssl::LabeledSegment>& data) {
    std::vector<ecgssl::Segment> segs;
    std::vector<int> labels;
    for (const auto& ls : data) {
        segs.push_back(ls.segment);
        labels.push_back(ls.label);
    }
    const auto scores = ecgssl::score(model, segs);
    const auto g = ecgssl::gmean_threshold(scores, labels);
    ecgssl::MetricsReport rep = ecgssl::confusion_metrics(scores, labels, g.threshold);
    rep.auc = ecgssl::auc(scores, labels);
    rep.task = model.rep.task;
    rep.d = model.rep.dim;
    return rep;
}

void write_report(const fs::path& path, const ecgssl::MetricsReport& rep) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["timestamp"] = timestamp_utc();
    const ordered_json fields = rep.to_json();
    for (const auto& [k, v] : fields.items()) j[k] = v;
    write_json(path, j);
}

// ---------------------------------------------------------------- commands

int cmd_synth(int n_normal, int n_af, std::uint64_t seed, const std::string& out_dir,
              double duration, double hr, int fs, bool text) {
    ecgssl::SynthParams params;
    params.duration_s = duration;
    params.mean_hr_bpm = hr;
    params.fs = fs;
    const auto corpus = ecgssl::synth_corpus(n_normal, n_af, params, seed);
    ecgssl::write_corpus(corpus, out_dir, text);
    write_config_echo(out_dir, true,
                      {{"command", "synth"},
                       {"normal", n_normal},
                       {"af", n_af},
                       {"seed", seed},
                       {"duration_s", duration},
                       {"mean_hr_bpm", hr},
                       {"fs", fs},
                       {"text", text},
                       {"out", out_dir}});
    std::printf("wrote %zu records to %s\n", corpus.size(), out_dir.c_str());
    return 0;
}

int cmd_pretrain(const std::string& task, int dim, const std::string& data_dir, int epochs,
                 int batch, double lr, std::uint64_t seed, const std::string& out,
                 const EncoderFlags& enc, bool softmax_head, double tau) {
    const auto manifest = ecgssl::read_manifest(fs::path(data_dir) / ecgssl::kManifestName);
    const auto segments = ecgssl::load_unlabeled_segments(manifest);

    ecgssl::PretrainConfig cfg;
    cfg.task = ecgssl::pretext_task_from_name(task);
    cfg.encoder = enc.config(dim);
    cfg.epochs = epochs;
    cfg.batch = batch;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.softmax_head = softmax_head;
    cfg.tau = tau;

    const ecgssl::RepModel model = cfg.task == ecgssl::PretextTask::AE
                                       ? ecgssl::train_autoencoder(segments, cfg)
                                       : ecgssl::pretrain(segments, cfg);
    ecgssl::save_rep_model(model, out);
    write_training_log(out, model.log);
    write_config_echo(out, false,
                      {{"command", "pretrain"}, {"task", task}, {"dim", dim},
                       {"data", data_dir},     {"epochs", epochs}, {"batch", batch},
                       {"lr", lr},             {"seed", seed},     {"softmax_head", softmax_head},
                       {"tau", tau},           {"encoder", enc.echo()}, {"out", out}});
    if (!model.log.empty())
        std::printf("pretrain(%s): final loss %.4f pretext accuracy %.3f\n", task.c_str(),
                    model.log.back().loss, model.log.back().pretext_accuracy);
    return 0;
}

int cmd_baseline(const std::string& method, int dim, const std::string& data_dir,
                 std::uint64_t seed, const std::string& out) {
    ecgssl::RepModel model;
    if (method == "rp") {
        model = ecgssl::fit_rp(dim, seed);
    } else if (method == "pca") {
        const auto manifest = ecgssl::read_manifest(fs::path(data_dir) / ecgssl::kManifestName);
        model = ecgssl::fit_pca(ecgssl::load_unlabeled_segments(manifest), dim);
    } else {
        throw ecgssl::UsageError("baseline method must be rp or pca");
    }
    ecgssl::save_rep_model(model, out);
    write_config_echo(out, false, {{"command", "baseline"}, {"method", method}, {"dim", dim},
                                   {"data", data_dir},      {"seed", seed},     {"out", out}});
    std::printf("baseline(%s) written to %s\n", method.c_str(), out.c_str());
    return 0;
}

int cmd_finetune(const std::string& model_path, const std::string& mode_name, long n_train,
                 bool balanced, const std::string& data_dir, int epochs, int batch, double lr,
                 std::uint64_t seed, const std::string& out) {
    auto rep = ecgssl::load_rep_model(model_path);
    auto all = load_labeled_or_throw(data_dir);

    ecgssl::SplitSpec spec;
    spec.seed = ecgssl::derive_seed(seed, 42);
    if (balanced) {
        if (n_train % 2 != 0)
            throw ecgssl::UsageError("--balanced requires an even --n-train");
        spec.n_per_class = static_cast<std::size_t>(n_train / 2);
    } else {
        spec.n_train = static_cast<std::size_t>(n_train);
    }
    const auto split = ecgssl::split(all, spec);

    ecgssl::FinetuneConfig cfg;
    cfg.mode = mode_name == "linear" ? ecgssl::FinetuneMode::LinearProbe
                                     : ecgssl::FinetuneMode::Full;
    if (mode_name != "linear" && mode_name != "full")
        throw ecgssl::UsageError("--mode must be linear or full");
    cfg.epochs = epochs;
    cfg.batch = batch;
    cfg.lr = lr;
    cfg.seed = seed;

    const auto dm = ecgssl::finetune(std::move(rep), split.train, cfg);
    ecgssl::save_downstream_model(dm, out, {{"n_train", n_train}, {"seed", seed}});
    write_training_log(out, dm.log);
    write_config_echo(out, false,
                      {{"command", "finetune"}, {"model", model_path}, {"mode", mode_name},
                       {"n_train", n_train},    {"balanced", balanced}, {"data", data_dir},
                       {"epochs", epochs},      {"batch", batch},       {"lr", lr},
                       {"seed", seed},          {"out", out}});
    std::printf("finetuned %s on %zu segments -> %s\n", model_path.c_str(), split.train.size(),
                out.c_str());
    return 0;
}

int cmd_scratch(long n_train, bool balanced, const std::string& data_dir, int dim, int epochs,
                int batch, double lr, std::uint64_t seed, const std::string& out,
                const EncoderFlags& enc) {
    auto all = load_labeled_or_throw(data_dir);
    ecgssl::SplitSpec spec;
    spec.seed = ecgssl::derive_seed(seed, 42);
    if (balanced) {
        if (n_train % 2 != 0) throw ecgssl::UsageError("--balanced requires an even --n-train");
        spec.n_per_class = static_cast<std::size_t>(n_train / 2);
    } else {
        spec.n_train = static_cast<std::size_t>(n_train);
    }
    const auto split = ecgssl::split(all, spec);

    ecgssl::ScratchConfig cfg;
    cfg.encoder = enc.config(dim);
    cfg.epochs = epochs;
    cfg.batch = batch;
    cfg.lr = lr;
    cfg.seed = seed;
    const auto dm = ecgssl::train_from_scratch(split.train, cfg);
    ecgssl::save_downstream_model(dm, out, {{"n_train", n_train}, {"seed", seed}});
    write_training_log(out, dm.log);
    write_config_echo(out, false,
                      {{"command", "scratch"}, {"n_train", n_train}, {"balanced", balanced},
                       {"data", data_dir},     {"dim", dim},         {"epochs", epochs},
                       {"batch", batch},       {"lr", lr},           {"seed", seed},
                       {"encoder", enc.echo()}, {"out", out}});
    std::printf("scratch model on %zu segments -> %s\n", split.train.size(), out.c_str());
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_dir,
                 const std::string& report_path) {
    if (!ecgssl::is_downstream_checkpoint(model_path))
        throw ecgssl::DataError("evaluate needs a fine-tuned (downstream) checkpoint");
    const auto dm = ecgssl::load_downstream_model(model_path);
    const auto data = load_labeled_or_throw(data_dir);
    ecgssl::MetricsReport rep = evaluate_model(dm, data);
    const json meta = ecgssl::load_checkpoint_meta(model_path);
    rep.n_train = meta.value("n_train", 0L);
    rep.seed = meta.value("seed", 0ULL);
    write_report(report_path, rep);
    write_config_echo(report_path, false, {{"command", "evaluate"}, {"model", model_path},
                                           {"data", data_dir},      {"report", report_path}});
    std::printf("auc %.4f sens %.4f spec %.4f acc %.4f thr %.4f -> %s\n", rep.auc, rep.sensitivity,
                rep.specificity, rep.accuracy, rep.threshold, report_path.c_str());
    return 0;
}

int cmd_neighbors(const std::string& model_path, const std::string& data_dir, int k,
                  const std::string& report_path) {
    auto rep = ecgssl::is_downstream_checkpoint(model_path)
                   ? ecgssl::load_downstream_model(model_path).rep
                   : ecgssl::load_rep_model(model_path);
    const auto data = load_labeled_or_throw(data_dir);
    std::vector<ecgssl::Segment> segs;
    std::vector<int> labels;
    for (const auto& ls : data) {
        segs.push_back(ls.segment);
        labels.push_back(ls.label);
    }
    const auto reps = ecgssl::embed(rep, segs);
    std::vector<std::vector<double>> points(segs.size(), std::vector<double>(static_cast<std::size_t>(rep.dim)));
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (int c = 0; c < rep.dim; ++c) points[i][static_cast<std::size_t>(c)] = reps.at2(static_cast<int>(i), c);

    const auto means = ecgssl::knn_label_means(points, labels, k);
    std::vector<double> af_means, normal_means;
    for (std::size_t i = 0; i < means.size(); ++i)
        (labels[i] ? af_means : normal_means).push_back(means[i]);
    const auto t = ecgssl::welch_t_test(af_means, normal_means, ecgssl::Alternative::Greater);

    double mean_af = 0, mean_normal = 0;
    for (double m : af_means) mean_af += m;
    for (double m : normal_means) mean_normal += m;
    mean_af /= static_cast<double>(af_means.size());
    mean_normal /= static_cast<double>(normal_means.size());

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["timestamp"] = timestamp_utc();
    j["k"] = k;
    j["n_af"] = af_means.size();
    j["n_normal"] = normal_means.size();
    j["mean_neighbor_label_af"] = mean_af;
    j["mean_neighbor_label_normal"] = mean_normal;
    j["t"] = t.t;
    j["df"] = t.df;
    j["p"] = t.p;
    j["alternative"] = "greater";
    write_json(report_path, j);
    write_config_echo(report_path, false, {{"command", "neighbors"}, {"model", model_path},
                                           {"data", data_dir},       {"k", k},
                                           {"report", report_path}});
    std::printf("neighbor label means: AF %.4f Normal %.4f, one-sided p = %.3e\n", mean_af,
                mean_normal, t.p);
    return 0;
}

int cmd_project2d(const std::string& model_path, const std::string& data_dir,
                  const std::string& out_path) {
    auto rep = ecgssl::is_downstream_checkpoint(model_path)
                   ? ecgssl::load_downstream_model(model_path).rep
                   : ecgssl::load_rep_model(model_path);
    const auto data = load_labeled_or_throw(data_dir);
    std::vector<ecgssl::Segment> segs;
    for (const auto& ls : data) segs.push_back(ls.segment);
    const auto reps = ecgssl::embed(rep, segs);
    std::vector<std::vector<double>> points(segs.size(), std::vector<double>(static_cast<std::size_t>(rep.dim)));
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (int c = 0; c < rep.dim; ++c) points[i][static_cast<std::size_t>(c)] = reps.at2(static_cast<int>(i), c);
    const auto xy = ecgssl::project_2d(points);

    if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
    std::ofstream out(out_path);
    if (!out) throw ecgssl::DataError("cannot write " + out_path);
    out << "id,label,x,y\n";
    out.precision(9);
    for (std::size_t i = 0; i < xy.size(); ++i)
        out << data[i].segment.source_id << ':' << data[i].segment.offset << ','
            << data[i].label << ',' << xy[i][0] << ',' << xy[i][1] << "\n";
    write_config_echo(out_path, false, {{"command", "project2d"}, {"model", model_path},
                                        {"data", data_dir},       {"out", out_path}});
    std::printf("wrote %zu projected points to %s\n", xy.size(), out_path.c_str());
    return 0;
}

int cmd_interpret(const std::string& model_path, const std::string& data_dir,
                  const std::vector<std::string>& ids, const std::string& out_dir,
                  const std::string& rule_name, bool svg) {
    if (!ecgssl::is_downstream_checkpoint(model_path))
        throw ecgssl::DataError("interpret needs a fine-tuned (downstream) checkpoint");
    const auto dm = ecgssl::load_downstream_model(model_path);
    const ecgssl::LrpRule rule = rule_name == "zero" ? ecgssl::LrpRule::Zero
                                                     : ecgssl::LrpRule::Epsilon;
    if (rule_name != "zero" && rule_name != "epsilon")
        throw ecgssl::UsageError("--rule must be epsilon or zero");

    const auto manifest = ecgssl::read_manifest(fs::path(data_dir) / ecgssl::kManifestName);
    auto records = ecgssl::load_all_records(manifest);
    ecgssl::load_annotations(manifest, records);
    fs::create_directories(out_dir);

    ordered_json summary = ordered_json::array();
    for (const std::string& id : ids) {
        const ecgssl::EcgRecord* rec = nullptr;
        for (const auto& r : records)
            if (r.id == id) rec = &r;
        if (!rec) throw ecgssl::MissingFileError("no record with id " + id);
        for (const ecgssl::Segment& seg : ecgssl::segment_normalized(*rec)) {
            const auto map = ecgssl::lrp(dm, seg, rule);
            const std::string stem = id + "_off" + std::to_string(seg.offset);
            ecgssl::heatmap_export(map, seg, fs::path(out_dir) / (stem + ".csv"), svg);
            ordered_json entry;
            entry["segment"] = map.segment_id;
            entry["output_logit"] = map.output_logit;
            entry["conservation_gap"] = map.conservation_gap;
            if (!rec->annotations.empty()) {
                const auto focus = ecgssl::r_peak_focus(map, rec->annotations, seg.offset, rec->fs);
                entry["mean_abs_r_near_peaks"] = focus.mean_abs_r_near_peaks;
                entry["mean_abs_r_elsewhere"] = focus.mean_abs_r_elsewhere;
            }
            summary.push_back(entry);
        }
    }
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["timestamp"] = timestamp_utc();
    j["rule"] = rule_name;
    j["segments"] = summary;
    write_json(fs::path(out_dir) / "summary.json", j);
    write_config_echo(out_dir, true, {{"command", "interpret"}, {"model", model_path},
                                      {"data", data_dir},       {"ids", ids},
                                      {"rule", rule_name},      {"svg", svg},
                                      {"out", out_dir}});
    std::printf("wrote %zu heatmaps to %s\n", summary.size(), out_dir.c_str());
    return 0;
}

int cmd_sweep(const std::string& data_dir, std::vector<std::string> tasks, std::vector<int> dims,
              std::vector<long> n_trains, int seeds, const std::string& out_dir,
              const EncoderFlags& enc, int pretrain_epochs, int finetune_epochs, int batch,
              double lr, double test_frac, std::uint64_t base_seed) {
    const auto manifest = ecgssl::read_manifest(fs::path(data_dir) / ecgssl::kManifestName);
    const auto all = ecgssl::load_labeled_segments(manifest);
    if (all.empty()) throw ecgssl::DataError("no labeled segments in " + data_dir);

    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "task,dim,n_train,seed,auc,sens,spec,acc\n";
    summary.precision(9);

    for (const std::string& task : tasks)
        for (int dim : dims)
            for (long n_train : n_trains)
                for (int s = 0; s < seeds; ++s) {
                    const std::uint64_t cell_seed = ecgssl::derive_seed(base_seed, static_cast<std::uint64_t>(s));
                    // held-out test side: per-class record-level split, so
                    // both classes survive on both sides of small corpora
                    std::size_t per_class[2] = {0, 0};
                    for (const auto& ls : all) ++per_class[ls.label];
                    ecgssl::SplitSpec spec;
                    spec.n_per_class = static_cast<std::size_t>(
                        static_cast<double>(std::min(per_class[0], per_class[1])) * (1.0 - test_frac));
                    spec.seed = ecgssl::derive_seed(cell_seed, 7);
                    const auto pool_split = ecgssl::split(all, spec);

                    // balanced fine-tune subset of the training pool
                    ecgssl::SplitSpec fspec;
                    fspec.n_per_class = static_cast<std::size_t>(n_train / 2);
                    fspec.seed = ecgssl::derive_seed(cell_seed, 8);
                    const auto fine_split = ecgssl::split(pool_split.train, fspec);

                    std::vector<ecgssl::Segment> pool_segments;
                    for (const auto& ls : pool_split.train) pool_segments.push_back(ls.segment);

                    ecgssl::DownstreamModel dm;
                    if (task == "scratch") {
                        ecgssl::ScratchConfig cfg;
                        cfg.encoder = enc.config(dim);
                        cfg.epochs = finetune_epochs;
                        cfg.batch = batch;
                        cfg.lr = lr;
                        cfg.seed = cell_seed;
                        dm = ecgssl::train_from_scratch(fine_split.train, cfg);
                    } else {
                        ecgssl::RepModel rep;
                        ecgssl::FinetuneConfig fcfg;
                        fcfg.epochs = finetune_epochs;
                        fcfg.batch = batch;
                        fcfg.lr = lr;
                        fcfg.seed = cell_seed;
                        if (task == "rp") {
                            rep = ecgssl::fit_rp(dim, cell_seed);
                            fcfg.mode = ecgssl::FinetuneMode::LinearProbe;
                        } else if (task == "pca") {
                            rep = ecgssl::fit_pca(pool_segments, dim);
                            fcfg.mode = ecgssl::FinetuneMode::LinearProbe;
                        } else {
                            ecgssl::PretrainConfig pcfg;
                            pcfg.task = ecgssl::pretext_task_from_name(task);
                            pcfg.encoder = enc.config(dim);
                            pcfg.epochs = pretrain_epochs;
                            pcfg.batch = batch;
                            pcfg.lr = lr;
                            pcfg.seed = cell_seed;
                            rep = pcfg.task == ecgssl::PretextTask::AE
                                      ? ecgssl::train_autoencoder(pool_segments, pcfg)
                                      : ecgssl::pretrain(pool_segments, pcfg);
                            fcfg.mode = ecgssl::FinetuneMode::Full;
                        }
                        dm = ecgssl::finetune(std::move(rep), fine_split.train, fcfg);
                    }

                    ecgssl::MetricsReport rep = evaluate_model(dm, pool_split.test);
                    rep.n_train = n_train;
                    rep.seed = cell_seed;
                    const fs::path cell = fs::path(out_dir) / task / ("d" + std::to_string(dim)) /
                                          ("n" + std::to_string(n_train)) /
                                          ("seed" + std::to_string(s));
                    write_report(cell / "report.json", rep);
                    summary << task << ',' << dim << ',' << n_train << ',' << s << ',' << rep.auc
                            << ',' << rep.sensitivity << ',' << rep.specificity << ',' << rep.accuracy
                            << "\n";
                    summary.flush();
                    std::printf("[sweep] %s d=%d n=%ld seed=%d auc=%.4f\n", task.c_str(), dim,
                                n_train, s, rep.auc);
                }
    write_config_echo(out_dir, true,
                      {{"command", "sweep"},   {"data", data_dir},   {"tasks", tasks},
                       {"dims", dims},         {"n_train", n_trains}, {"seeds", seeds},
                       {"pretrain_epochs", pretrain_epochs}, {"finetune_epochs", finetune_epochs},
                       {"batch", batch},       {"lr", lr},           {"test_frac", test_frac},
                       {"seed", base_seed},    {"encoder", enc.echo()}, {"out", out_dir}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-supervised ECG representation learning via reverse detection"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    int sy_normal = 10, sy_af = 10, sy_fs = 300;
    std::uint64_t sy_seed = 0;
    double sy_duration = 30.0, sy_hr = 70.0;
    bool sy_text = false;
    std::string sy_out;
    synth->add_option("--normal", sy_normal, "number of Normal records");
    synth->add_option("--af", sy_af, "number of AF records");
    synth->add_option("--seed", sy_seed, "RNG seed");
    synth->add_option("--duration", sy_duration, "record length in seconds");
    synth->add_option("--hr", sy_hr, "mean heart rate (bpm)");
    synth->add_option("--fs", sy_fs, "sampling rate");
    synth->add_flag("--text", sy_text, "write .txt sample files instead of .f32le");
    synth->add_option("--out", sy_out, "output directory")->required();

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "stage-1 self-supervised pretraining");
    std::string pr_task = "ts", pr_data, pr_out;
    int pr_dim = 128, pr_epochs = 30, pr_batch = 64;
    double pr_lr = 1e-3, pr_tau = 0.5;
    std::uint64_t pr_seed = 0;
    bool pr_softmax = false;
    EncoderFlags pr_enc;
    pre->add_option("--task", pr_task, "ts|temporal|spatial|simclr|ae");
    pre->add_option("--dim", pr_dim, "representation dimension");
    pre->add_option("--data", pr_data, "corpus directory")->required();
    pre->add_option("--epochs", pr_epochs, "training epochs");
    pre->add_option("--batch", pr_batch, "batch size");
    pre->add_option("--lr", pr_lr, "Adam learning rate");
    pre->add_option("--seed", pr_seed, "RNG seed");
    pre->add_option("--tau", pr_tau, "SimCLR temperature");
    pre->add_flag("--softmax-head", pr_softmax, "4-way softmax pretext head instead of 2 bits");
    pre->add_option("--out", pr_out, "checkpoint path")->required();
    pr_enc.attach(pre);

    // baseline
    auto* base = app.add_subcommand("baseline", "non-learned baselines (rp, pca)");
    std::string ba_method = "rp", ba_data, ba_out;
    int ba_dim = 128;
    std::uint64_t ba_seed = 0;
    base->add_option("--method", ba_method, "rp|pca")->required();
    base->add_option("--dim", ba_dim, "representation dimension");
    base->add_option("--data", ba_data, "corpus directory (pca only)");
    base->add_option("--seed", ba_seed, "RNG seed (rp)");
    base->add_option("--out", ba_out, "checkpoint path")->required();

    // finetune
    auto* fine = app.add_subcommand("finetune", "stage-2 fine-tuning for AF detection");
    std::string fi_model, fi_mode = "full", fi_data, fi_out;
    long fi_n = 2000;
    bool fi_balanced = false;
    int fi_epochs = 50, fi_batch = 64;
    double fi_lr = 1e-3;
    std::uint64_t fi_seed = 0;
    fine->add_option("--model", fi_model, "pretrained representation checkpoint")->required();
    fine->add_option("--mode", fi_mode, "linear|full");
    fine->add_option("--n-train", fi_n, "number of fine-tune segments");
    fine->add_flag("--balanced", fi_balanced, "balanced per-class sampling");
    fine->add_option("--data", fi_data, "corpus directory")->required();
    fine->add_option("--epochs", fi_epochs, "training epochs");
    fine->add_option("--batch", fi_batch, "batch size");
    fine->add_option("--lr", fi_lr, "Adam learning rate");
    fine->add_option("--seed", fi_seed, "RNG seed");
    fine->add_option("--out", fi_out, "output checkpoint")->required();

    // scratch
    auto* scr = app.add_subcommand("scratch", "supervised training from random init");
    std::string sc_data, sc_out;
    long sc_n = 2000;
    bool sc_balanced = false;
    int sc_dim = 128, sc_epochs = 50, sc_batch = 64;
    double sc_lr = 1e-3;
    std::uint64_t sc_seed = 0;
    EncoderFlags sc_enc;
    scr->add_option("--n-train", sc_n, "number of training segments");
    scr->add_flag("--balanced", sc_balanced, "balanced per-class sampling");
    scr->add_option("--data", sc_data, "corpus directory")->required();
    scr->add_option("--dim", sc_dim, "representation dimension");
    scr->add_option("--epochs", sc_epochs, "training epochs");
    scr->add_option("--batch", sc_batch, "batch size");
    scr->add_option("--lr", sc_lr, "Adam learning rate");
    scr->add_option("--seed", sc_seed, "RNG seed");
    scr->add_option("--out", sc_out, "output checkpoint")->required();
    sc_enc.attach(scr);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "metrics report for a fine-tuned model");
    std::string ev_model, ev_data, ev_report;
    ev->add_option("--model", ev_model, "downstream checkpoint")->required();
    ev->add_option("--data", ev_data, "corpus directory")->required();
    ev->add_option("--report", ev_report, "output report.json")->required();

    // neighbors
    auto* nb = app.add_subcommand("neighbors", "k-NN label study with Welch t-test");
    std::string nb_model, nb_data, nb_report;
    int nb_k = 3;
    nb->add_option("--model", nb_model, "checkpoint (representation or downstream)")->required();
    nb->add_option("--data", nb_data, "corpus directory")->required();
    nb->add_option("--k", nb_k, "neighbor count");
    nb->add_option("--report", nb_report, "output JSON")->required();

    // project2d
    auto* p2 = app.add_subcommand("project2d", "2-D PCA projection of representations");
    std::string p2_model, p2_data, p2_out;
    p2->add_option("--model", p2_model, "checkpoint")->required();
    p2->add_option("--data", p2_data, "corpus directory")->required();
    p2->add_option("--out", p2_out, "output points.csv")->required();

    // interpret
    auto* intp = app.add_subcommand("interpret", "LRP relevance heatmaps");
    std::string in_model, in_data, in_out, in_rule = "epsilon", in_ids_csv;
    bool in_svg = false;
    intp->add_option("--model", in_model, "downstream checkpoint")->required();
    intp->add_option("--data", in_data, "corpus directory")->required();
    intp->add_option("--ids", in_ids_csv, "comma-separated record ids")->required();
    intp->add_option("--rule", in_rule, "epsilon|zero");
    intp->add_flag("--svg", in_svg, "also render SVG heatmaps");
    intp->add_option("--out", in_out, "output directory")->required();

    // sweep
    auto* sw = app.add_subcommand("sweep", "experiment grid over tasks/dims/train sizes/seeds");
    std::string sw_data, sw_out, sw_tasks = "ts", sw_dims = "128", sw_ns = "2000";
    int sw_seeds = 1, sw_pre_epochs = 30, sw_fine_epochs = 50, sw_batch = 64;
    double sw_lr = 1e-3, sw_test_frac = 0.3;
    std::uint64_t sw_seed = 0;
    EncoderFlags sw_enc;
    sw->add_option("--data", sw_data, "corpus directory")->required();
    sw->add_option("--tasks", sw_tasks, "comma list: ts,temporal,spatial,simclr,ae,rp,pca,scratch");
    sw->add_option("--dims", sw_dims, "comma list of representation dimensions");
    sw->add_option("--n-train", sw_ns, "comma list of fine-tune sizes");
    sw->add_option("--seeds", sw_seeds, "number of seeds per cell");
    sw->add_option("--pretrain-epochs", sw_pre_epochs, "pretraining epochs");
    sw->add_option("--finetune-epochs", sw_fine_epochs, "fine-tuning epochs");
    sw->add_option("--batch", sw_batch, "batch size");
    sw->add_option("--lr", sw_lr, "Adam learning rate");
    sw->add_option("--test-frac", sw_test_frac, "held-out record fraction");
    sw->add_option("--seed", sw_seed, "base RNG seed");
    sw->add_option("--out", sw_out, "output directory")->required();
    sw_enc.attach(sw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // every usage problem maps to exit code 1
    }

    auto split_csv = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(item);
        return out;
    };

    try {
        if (*synth) return cmd_synth(sy_normal, sy_af, sy_seed, sy_out, sy_duration, sy_hr, sy_fs, sy_text);
        if (*pre)
            return cmd_pretrain(pr_task, pr_dim, pr_data, pr_epochs, pr_batch, pr_lr, pr_seed,
                                pr_out, pr_enc, pr_softmax, pr_tau);
        if (*base) return cmd_baseline(ba_method, ba_dim, ba_data, ba_seed, ba_out);
        if (*fine)
            return cmd_finetune(fi_model, fi_mode, fi_n, fi_balanced, fi_data, fi_epochs, fi_batch,
                                fi_lr, fi_seed, fi_out);
        if (*scr)
            return cmd_scratch(sc_n, sc_balanced, sc_data, sc_dim, sc_epochs, sc_batch, sc_lr,
                               sc_seed, sc_out, sc_enc);
        if (*ev) return cmd_evaluate(ev_model, ev_data, ev_report);
        if (*nb) return cmd_neighbors(nb_model, nb_data, nb_k, nb_report);
        if (*p2) return cmd_project2d(p2_model, p2_data, p2_out);
        if (*intp)
            return cmd_interpret(in_model, in_data, split_csv(in_ids_csv), in_out, in_rule, in_svg);
        if (*sw) {
            std::vector<int> dims;
            for (const auto& d : split_csv(sw_dims)) dims.push_back(std::stoi(d));
            std::vector<long> ns;
            for (const auto& n : split_csv(sw_ns)) ns.push_back(std::stol(n));
            return cmd_sweep(sw_data, split_csv(sw_tasks), dims, ns, sw_seeds, sw_out, sw_enc,
                             sw_pre_epochs, sw_fine_epochs, sw_batch, sw_lr, sw_test_frac, sw_seed);
        }
    } catch (const ecgssl::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const ecgssl::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const ecgssl::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
