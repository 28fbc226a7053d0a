#include "earface/harness.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "earface/image_io.hpp"

namespace earface {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Experiment config

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw Error("config: malformed JSON in '" + path.string() + "': " + e.what());
    }
    ExperimentConfig cfg = from_json(j, path.has_parent_path() ? path.parent_path() : ".");
    cfg.raw_text = text;
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j, const fs::path& base_dir) {
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("out_dir")) {
        fs::path p = j.at("out_dir").get<std::string>();
        cfg.out_dir = p.is_absolute() ? p : base_dir / p;
    }
    if (j.contains("dataset")) {
        const Json& d = j.at("dataset");
        cfg.dataset_name = d.value("name", cfg.dataset_name);
        if (d.contains("synthetic")) {
            cfg.synthetic = synth_config_from_json(d.at("synthetic"));
            cfg.synthetic->name = cfg.dataset_name;
            if (!d.at("synthetic").contains("seed"))
                cfg.synthetic->seed = Rng::derive(cfg.seed, "synthetic");
        }
        if (d.contains("manifest")) {
            fs::path p = d.at("manifest").get<std::string>();
            cfg.manifest_path = p.is_absolute() ? p : base_dir / p;
        }
        if (cfg.synthetic && cfg.manifest_path)
            throw Error("config: dataset must be synthetic or manifest-backed, not both");
        if (!cfg.synthetic && !cfg.manifest_path)
            throw Error("config: dataset section needs either 'synthetic' or 'manifest'");
    } else {
        throw Error("config: missing 'dataset' section");
    }
    if (j.contains("split")) {
        cfg.split = split_spec_from_json(j.at("split"));
        if (!j.at("split").contains("seed")) cfg.split.seed = Rng::derive(cfg.seed, "split");
    } else {
        cfg.split.seed = Rng::derive(cfg.seed, "split");
    }
    if (j.contains("ingest")) cfg.target_size = j.at("ingest").value("target_size", cfg.target_size);
    if (j.contains("generator")) cfg.generator = generator_config_from_json(j.at("generator"));
    if (j.contains("discriminator"))
        cfg.discriminator = discriminator_config_from_json(j.at("discriminator"));
    if (j.contains("train")) {
        cfg.train = train_config_from_json(j.at("train"));
        if (!j.at("train").contains("seed")) cfg.train.seed = Rng::derive(cfg.seed, "train");
    } else {
        cfg.train.seed = Rng::derive(cfg.seed, "train");
    }
    if (j.contains("embedder")) {
        const Json& e = j.at("embedder");
        cfg.embedder.kind = e.value("kind", cfg.embedder.kind);
        if (e.contains("weight_path")) {
            fs::path p = e.at("weight_path").get<std::string>();
            cfg.embedder.weight_path = p.is_absolute() ? p : base_dir / p;
        }
        cfg.embedder.builtin = embedder_config_from_json(e);
        if (!e.contains("seed")) cfg.embedder.builtin.seed = Rng::derive(cfg.seed, "embedder");
    } else {
        cfg.embedder.builtin.seed = Rng::derive(cfg.seed, "embedder");
    }
    if (j.contains("ssim")) cfg.ssim_cfg = ssim_config_from_json(j.at("ssim"));
    if (j.contains("ranks")) cfg.ranks = j.at("ranks").get<std::vector<int>>();
    cfg.embedder.validate();
    return cfg;
}

Json ExperimentConfig::to_json() const {
    Json j;
    j["seed"] = seed;
    j["out_dir"] = out_dir.string();
    Json d;
    d["name"] = dataset_name;
    if (synthetic) d["synthetic"] = earface::to_json(*synthetic);
    if (manifest_path) d["manifest"] = manifest_path->string();
    j["dataset"] = d;
    j["split"] = earface::to_json(split);
    j["ingest"] = Json{{"target_size", target_size}};
    j["generator"] = earface::to_json(generator);
    j["discriminator"] = earface::to_json(discriminator);
    j["train"] = earface::to_json(train);
    Json e = earface::to_json(embedder.builtin);
    e["kind"] = embedder.kind;
    if (!embedder.weight_path.empty()) e["weight_path"] = embedder.weight_path.string();
    j["embedder"] = e;
    j["ssim"] = earface::to_json(ssim_cfg);
    j["ranks"] = ranks;
    return j;
}

void ExperimentConfig::override_seed(uint64_t s) {
    seed = s;
    if (synthetic) synthetic->seed = Rng::derive(s, "synthetic");
    split.seed = Rng::derive(s, "split");
    train.seed = Rng::derive(s, "train");
    embedder.builtin.seed = Rng::derive(s, "embedder");
    raw_text.clear();  // echo regenerates from the effective config
}

void ExperimentConfig::override_out_dir(const fs::path& dir) { out_dir = dir; }

fs::path ExperimentConfig::manifest_file() const {
    if (manifest_path) return *manifest_path;
    return out_dir / "data" / "manifest.csv";
}

// ---------------------------------------------------------------------------
// Output directory plumbing

namespace {

/// One command at a time per output directory.
class OutputLock {
public:
    explicit OutputLock(const fs::path& out_dir) : path_(out_dir / ".lock") {
        fs::create_directories(out_dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw Error("output directory '" + out_dir.string() +
                        "' is locked by another command (stale? remove " + path_.string() + ")");
    }
    ~OutputLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }

private:
    fs::path path_;
    int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    os << text;
    if (!os) throw Error("write failed for '" + path.string() + "'");
}

void echo_config(const ExperimentConfig& cfg, std::vector<fs::path>& artifacts) {
    const fs::path p = cfg.out_dir / "config.json";
    write_text(p, cfg.raw_text.empty() ? cfg.to_json().dump(2) + "\n" : cfg.raw_text);
    artifacts.push_back(p);
}

/// Appends this command's artifact list to <out>/artifacts.json.
void record_artifacts(const fs::path& out_dir, const std::string& command,
                      const std::vector<fs::path>& files) {
    const fs::path p = out_dir / "artifacts.json";
    Json j = Json::object();
    if (fs::exists(p)) {
        std::ifstream is(p);
        try {
            is >> j;
        } catch (...) {
            j = Json::object();
        }
    }
    std::vector<std::string> rel;
    for (const auto& f : files) rel.push_back(fs::relative(f, out_dir).string());
    std::sort(rel.begin(), rel.end());
    j[command] = rel;
    write_text(p, j.dump(2) + "\n");
}

DatasetManifest load_config_manifest(const ExperimentConfig& cfg) {
    const fs::path mf = cfg.manifest_file();
    if (!fs::exists(mf))
        throw Error("manifest '" + mf.string() + "' not found (run prepare first?)");
    DatasetManifest m = load_manifest(mf);
    m.dataset_name = cfg.dataset_name;
    return m;
}

SplitAssignment load_config_splits(const ExperimentConfig& cfg) {
    if (!fs::exists(cfg.splits_file()))
        throw Error("splits '" + cfg.splits_file().string() + "' not found (run prepare first?)");
    return load_splits(cfg.splits_file());
}

std::string model_label_for_checkpoint(const fs::path& checkpoint) {
    const fs::path sibling = checkpoint.parent_path() / "config.json";
    if (fs::exists(sibling)) {
        try {
            std::ifstream is(sibling);
            Json j;
            is >> j;
            if (j.contains("dataset") && j.at("dataset").contains("name"))
                return j.at("dataset").at("name").get<std::string>();
        } catch (...) {
        }
    }
    return checkpoint.parent_path().filename().string();
}

}  // namespace

Reconstructor make_checkpoint_reconstructor(const fs::path& checkpoint, uint64_t eval_seed) {
    nn::GeneratorConfig gcfg;
    auto gen = std::make_shared<nn::Generator>(load_generator_checkpoint(checkpoint, &gcfg));
    auto rng = std::make_shared<Rng>(Rng::derive(eval_seed, "eval-dropout"));
    return [gen, rng](const PairedSample& pair) {
        const Tensor ear = convert_range(pair.ear.data, pair.ear.range, ValueRange::Symmetric);
        const Tensor out = gen->forward(ear, nn::Mode::Eval, rng.get());
        return convert_range(out, ValueRange::Symmetric, ValueRange::Unit);
    };
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_prepare(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw Error("prepare: no output directory configured");
    OutputLock lock(cfg.out_dir);
    CommandResult result;

    DatasetManifest manifest;
    if (cfg.synthetic) {
        manifest = generate_synthetic(*cfg.synthetic, cfg.out_dir / "data");
        for (const auto& e : manifest.entries) {
            result.artifacts.push_back(manifest.root / e.ear_path);
            result.artifacts.push_back(manifest.root / e.face_path);
        }
        result.artifacts.push_back(cfg.out_dir / "data" / "manifest.csv");
    } else {
        manifest = load_config_manifest(cfg);  // validates
    }
    manifest.dataset_name = cfg.dataset_name;

    const SplitAssignment splits = build_splits(manifest, cfg.split);
    save_splits(splits, cfg.splits_file());
    result.artifacts.push_back(cfg.splits_file());

    echo_config(cfg, result.artifacts);
    record_artifacts(cfg.out_dir, "prepare", result.artifacts);
    return result;
}

CommandResult cmd_train(const ExperimentConfig& cfg, std::optional<fs::path> resume) {
    OutputLock lock(cfg.out_dir);
    CommandResult result;

    const DatasetManifest manifest = load_config_manifest(cfg);
    const SplitAssignment splits = load_config_splits(cfg);
    nn::EmbeddingNetwork psi = load_embedder(cfg.embedder);

    TrainRun run;
    run.generator = cfg.generator;
    run.discriminator = cfg.discriminator;
    run.train = cfg.train;
    run.ingest = IngestConfig{cfg.target_size, ValueRange::Symmetric};
    run.resume = resume;

    const TrainResult tr = train(run, manifest, splits, psi, cfg.out_dir);
    result.artifacts = tr.checkpoints;
    result.artifacts.push_back(tr.log_path);
    echo_config(cfg, result.artifacts);
    record_artifacts(cfg.out_dir, "train", result.artifacts);
    return result;
}

namespace {

CommandResult evaluate_impl(const ExperimentConfig& cfg, const fs::path& checkpoint,
                            const std::vector<std::string>& split_names,
                            const std::string& model_label, const std::string& command,
                            const std::string& file_tag) {
    if (split_names.empty()) throw Error(command + ": no splits requested");
    OutputLock lock(cfg.out_dir);
    CommandResult result;

    const DatasetManifest manifest = load_config_manifest(cfg);
    const SplitAssignment splits = load_config_splits(cfg);
    nn::EmbeddingNetwork psi = load_embedder(cfg.embedder);
    const Reconstructor reconstruct = make_checkpoint_reconstructor(checkpoint, cfg.seed);
    const IngestConfig ingest{cfg.target_size, ValueRange::Unit};

    // sd_test_2 rows come from sd_test_1's table when both are in one call.
    const bool derive_sd2 =
        std::count(split_names.begin(), split_names.end(), std::string("sd_test_2")) &&
        std::count(split_names.begin(), split_names.end(), std::string("sd_test_1"));

    std::map<std::string, MetricsReport> reports;
    for (const std::string& name : split_names) {
        if (reports.count(name)) continue;
        if (name == "sd_test_2" && derive_sd2) continue;
        const auto pairs = load_split_pairs(manifest, splits, name, ingest);
        if (pairs.empty()) throw Error(command + ": split '" + name + "' is empty");
        reports[name] = evaluate_set(reconstruct, psi, pairs, cfg.ssim_cfg);
    }
    if (derive_sd2) reports["sd_test_2"] = filter_report(reports["sd_test_1"], splits.sd_test_2);

    for (const auto& [name, report] : reports) {
        const fs::path jp = cfg.out_dir / ("metrics_" + file_tag + name + ".json");
        const fs::path cp = cfg.out_dir / ("metrics_" + file_tag + name + ".csv");
        write_text(jp, metrics_report_json(report, model_label, cfg.dataset_name, name));
        write_metrics_csv(report, cp);
        result.artifacts.push_back(jp);
        result.artifacts.push_back(cp);
    }
    record_artifacts(cfg.out_dir, command, result.artifacts);
    return result;
}

}  // namespace

CommandResult cmd_evaluate(const ExperimentConfig& cfg, const fs::path& checkpoint,
                           const std::vector<std::string>& split_names) {
    return evaluate_impl(cfg, checkpoint, split_names, cfg.dataset_name, "evaluate", "");
}

CommandResult cmd_cross_eval(const ExperimentConfig& data_cfg, const fs::path& foreign_checkpoint,
                             const std::vector<std::string>& split_names,
                             std::string model_label) {
    if (model_label.empty()) model_label = model_label_for_checkpoint(foreign_checkpoint);
    return evaluate_impl(data_cfg, foreign_checkpoint, split_names, model_label, "cross-eval",
                         "cross_" + model_label + "_");
}

CommandResult cmd_identify(const ExperimentConfig& cfg, const fs::path& checkpoint,
                           const std::string& split_name, const std::string& gallery_split) {
    OutputLock lock(cfg.out_dir);
    CommandResult result;

    const DatasetManifest manifest = load_config_manifest(cfg);
    const SplitAssignment splits = load_config_splits(cfg);
    nn::EmbeddingNetwork psi = load_embedder(cfg.embedder);
    const Reconstructor reconstruct = make_checkpoint_reconstructor(checkpoint, cfg.seed);
    const IngestConfig ingest{cfg.target_size, ValueRange::Unit};

    const auto probes = load_split_pairs(manifest, splits, split_name, ingest);
    const std::string gsplit = gallery_split.empty() ? split_name : gallery_split;
    const auto gallery_pairs =
        gsplit == split_name ? probes : load_split_pairs(manifest, splits, gsplit, ingest);
    std::vector<GalleryImage> gallery;
    for (const auto& p : gallery_pairs) gallery.push_back({p.face.data, p.subject_id});

    const IdentifyResult ir = identify(reconstruct, psi, probes, gallery, cfg.ranks);
    const fs::path jp = cfg.out_dir / ("cmc_" + split_name + ".json");
    const fs::path sp = cfg.out_dir / ("similarity_" + split_name + ".csv");
    write_text(jp, cmc_report_json(ir, cfg.dataset_name, cfg.dataset_name, split_name));
    write_similarity_csv(ir.sim, sp);
    result.artifacts.push_back(jp);
    result.artifacts.push_back(sp);
    record_artifacts(cfg.out_dir, "identify", result.artifacts);
    return result;
}

CommandResult cmd_grid(const ExperimentConfig& cfg, const fs::path& checkpoint,
                       std::vector<std::string> pair_ids, const fs::path& out_png) {
    OutputLock lock(cfg.out_dir);
    CommandResult result;

    const DatasetManifest manifest = load_config_manifest(cfg);
    const IngestConfig ingest{cfg.target_size, ValueRange::Unit};
    if (pair_ids.empty()) {
        const SplitAssignment splits = load_config_splits(cfg);
        const auto& source = !splits.sd_test_1.empty() ? splits.sd_test_1 : splits.train;
        for (size_t i = 0; i < source.size() && i < 3; ++i) pair_ids.push_back(source[i]);
        if (pair_ids.empty()) throw Error("grid: no pairs available");
    }

    std::map<std::string, ManifestEntry> by_id;
    for (const auto& e : manifest.entries) by_id[e.pair_id] = e;
    const Reconstructor reconstruct = make_checkpoint_reconstructor(checkpoint, cfg.seed);

    const int s = cfg.target_size;
    Tensor grid(1, 3, 3 * s, s * static_cast<int>(pair_ids.size()));
    for (size_t col = 0; col < pair_ids.size(); ++col) {
        auto it = by_id.find(pair_ids[col]);
        if (it == by_id.end()) throw Error("grid: unknown pair_id '" + pair_ids[col] + "'");
        const PairedSample pair = load_pair(manifest, it->second, ingest);
        const Tensor recon = reconstruct(pair);
        const Tensor* rows[3] = {&pair.ear.data, &recon, &pair.face.data};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < s; ++y)
                    for (int x = 0; x < s; ++x)
                        grid.at(0, c, r * s + y, static_cast<int>(col) * s + x) =
                            rows[r]->at(0, c, y, x);
    }
    fs::path target = out_png.empty() ? cfg.out_dir / "grid.png" : out_png;
    if (!target.is_absolute() && !out_png.empty()) target = fs::absolute(target);
    fs::create_directories(target.parent_path());
    write_png(grid, target);
    result.artifacts.push_back(target);
    record_artifacts(cfg.out_dir, "grid", result.artifacts);
    return result;
}

}  // namespace earface
