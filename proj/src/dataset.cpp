#include "earface/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "earface/image_io.hpp"
#include "earface/rng.hpp"

namespace earface {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Manifest

void DatasetManifest::validate() const {
    std::set<std::string> pair_ids;
    std::set<std::pair<std::string, std::string>> path_pairs;
    for (size_t i = 0; i < entries.size(); ++i) {
        const ManifestEntry& e = entries[i];
        const std::string where = "manifest row " + std::to_string(i + 1);
        if (e.subject_id.empty()) throw Error(where + ": empty subject_id");
        if (e.pair_id.empty()) throw Error(where + ": empty pair_id");
        if (e.ear_path.empty() || e.face_path.empty())
            throw Error(where + ": entry must reference one ear path and one face path");
        if (!pair_ids.insert(e.pair_id).second)
            throw Error(where + ": duplicate pair_id '" + e.pair_id + "'");
        if (!path_pairs.insert({e.ear_path, e.face_path}).second)
            throw Error(where + ": duplicate (ear_path, face_path) entry '" + e.ear_path + "', '" +
                        e.face_path + "'");
    }
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_manifest: missing file '" + path.string() + "'");
    DatasetManifest m;
    m.dataset_name = path.stem().string();
    m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");

    std::string line;
    int row = 0;
    std::map<std::string, int> seen_pairs;
    std::set<std::pair<std::string, std::string>> seen_paths;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!ss && !line.empty() && line.back() == ',') fields.push_back("");
        if (row == 1) {
            if (line != "pair_id,subject_id,ear_path,face_path")
                throw Error("load_manifest: row 1: bad header '" + line + "'");
            continue;
        }
        if (fields.size() != 4)
            throw Error("load_manifest: row " + std::to_string(row) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
        const std::string where = "load_manifest: row " + std::to_string(row);
        if (fields[0].empty()) throw Error(where + ": empty pair_id");
        if (fields[1].empty()) throw Error(where + ": empty subject_id");
        if (fields[2].empty() || fields[3].empty())
            throw Error(where + ": entry must reference one ear path and one face path");
        if (auto [it, fresh] = seen_pairs.insert({fields[0], row}); !fresh)
            throw Error(where + ": duplicate pair_id '" + fields[0] + "' (first at row " +
                        std::to_string(it->second) + ")");
        if (!seen_paths.insert({fields[2], fields[3]}).second)
            throw Error(where + ": duplicate (ear_path, face_path) entry");
        m.entries.push_back({fields[0], fields[1], fields[2], fields[3]});
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    manifest.validate();
    std::ofstream os(path);
    if (!os) throw Error("save_manifest: cannot write '" + path.string() + "'");
    os << "pair_id,subject_id,ear_path,face_path\n";
    for (const auto& e : manifest.entries)
        os << e.pair_id << ',' << e.subject_id << ',' << e.ear_path << ',' << e.face_path << '\n';
    if (!os) throw Error("save_manifest: write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Splits

const std::vector<std::string>& SplitAssignment::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "sd_test_1") return sd_test_1;
    if (name == "sd_test_2") return sd_test_2;
    if (name == "sid_test") return sid_test;
    throw Error("unknown split '" + name + "' (expected train|sd_test_1|sd_test_2|sid_test)");
}

SplitAssignment build_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
    manifest.validate();
    if (spec.train_fraction < 0.0 || spec.train_fraction > 1.0)
        throw Error("build_splits: train_fraction must lie in [0, 1]");
    if (spec.sid_subject_count < 0 || spec.sd2_subject_count < 0)
        throw Error("build_splits: negative subject count");
    if (spec.sid_subject_count > 0 && spec.sd2_subject_count > 0 &&
        spec.sid_subject_count != spec.sd2_subject_count)
        throw Error("build_splits: sd2_subject_count must equal sid_subject_count when both are "
                    "nonzero");

    std::map<std::string, std::vector<std::string>> by_subject;
    for (const auto& e : manifest.entries) by_subject[e.subject_id].push_back(e.pair_id);

    std::vector<std::string> subjects;
    for (const auto& [s, _] : by_subject) subjects.push_back(s);
    const int needed = spec.sid_subject_count + spec.sd2_subject_count;
    if (static_cast<int>(subjects.size()) < needed)
        throw Error("build_splits: too few subjects (" + std::to_string(subjects.size()) +
                    ", need at least " + std::to_string(needed) + ")");

    std::vector<std::string> order = subjects;
    Rng sid_rng(Rng::derive(spec.seed, "sid-subjects"));
    sid_rng.shuffle(order);
    std::set<std::string> sid_subjects(order.begin(),
                                       order.begin() + spec.sid_subject_count);

    SplitAssignment out;
    out.spec = spec;
    for (const std::string& s : subjects) {
        auto& pairs = by_subject[s];
        if (sid_subjects.count(s)) {
            out.sid_test.insert(out.sid_test.end(), pairs.begin(), pairs.end());
            continue;
        }
        if (pairs.size() == 1) {
            // A single-pair subject cannot feed both train and sd_test_1.
            out.train.push_back(pairs[0]);
            continue;
        }
        std::vector<std::string> shuffled = pairs;
        Rng r(Rng::derive(spec.seed, "subject:" + s));
        r.shuffle(shuffled);
        size_t k = static_cast<size_t>(std::floor(spec.train_fraction * shuffled.size()));
        if (k == 0) k = 1;  // every sd_test_1 subject must also appear in train
        for (size_t i = 0; i < shuffled.size(); ++i)
            (i < k ? out.train : out.sd_test_1).push_back(shuffled[i]);
    }

    std::map<std::string, std::vector<std::string>> sd1_by_subject;
    {
        std::map<std::string, std::string> subject_of;
        for (const auto& e : manifest.entries) subject_of[e.pair_id] = e.subject_id;
        for (const auto& p : out.sd_test_1) sd1_by_subject[subject_of[p]].push_back(p);
    }
    if (spec.sd2_subject_count > 0) {
        std::vector<std::string> sd1_subjects;
        for (const auto& [s, _] : sd1_by_subject) sd1_subjects.push_back(s);
        if (static_cast<int>(sd1_subjects.size()) < spec.sd2_subject_count)
            throw Error("build_splits: sd_test_1 has only " +
                        std::to_string(sd1_subjects.size()) + " subjects, cannot sample " +
                        std::to_string(spec.sd2_subject_count) + " for sd_test_2");
        Rng r(Rng::derive(spec.seed, "sd2-subjects"));
        r.shuffle(sd1_subjects);
        for (int i = 0; i < spec.sd2_subject_count; ++i) {
            const auto& pairs = sd1_by_subject[sd1_subjects[i]];
            out.sd_test_2.insert(out.sd_test_2.end(), pairs.begin(), pairs.end());
        }
    }

    std::sort(out.train.begin(), out.train.end());
    std::sort(out.sd_test_1.begin(), out.sd_test_1.end());
    std::sort(out.sd_test_2.begin(), out.sd_test_2.end());
    std::sort(out.sid_test.begin(), out.sid_test.end());
    out.validate(manifest);
    return out;
}

void SplitAssignment::validate(const DatasetManifest& manifest) const {
    std::map<std::string, std::string> subject_of;
    for (const auto& e : manifest.entries) subject_of[e.pair_id] = e.subject_id;
    auto subjects_of = [&](const std::vector<std::string>& pairs) {
        std::set<std::string> s;
        for (const auto& p : pairs) {
            auto it = subject_of.find(p);
            if (it == subject_of.end()) throw Error("splits: unknown pair_id '" + p + "'");
            s.insert(it->second);
        }
        return s;
    };

    std::set<std::string> train_set(train.begin(), train.end());
    std::set<std::string> sd1_set(sd_test_1.begin(), sd_test_1.end());
    std::set<std::string> sid_set(sid_test.begin(), sid_test.end());
    if (train_set.size() != train.size() || sd1_set.size() != sd_test_1.size() ||
        sid_set.size() != sid_test.size())
        throw Error("splits: duplicate pair_id within a split");
    for (const auto& p : sd1_set)
        if (train_set.count(p)) throw Error("splits: pair '" + p + "' in both train and sd_test_1");
    for (const auto& p : sid_set)
        if (train_set.count(p) || sd1_set.count(p))
            throw Error("splits: pair '" + p + "' in sid_test and another set");
    for (const auto& p : sd_test_2)
        if (!sd1_set.count(p)) throw Error("splits: sd_test_2 pair '" + p + "' not in sd_test_1");

    const auto train_subj = subjects_of(train);
    const auto sd1_subj = subjects_of(sd_test_1);
    const auto sd2_subj = subjects_of(sd_test_2);
    const auto sid_subj = subjects_of(sid_test);
    for (const auto& s : sid_subj)
        if (train_subj.count(s) || sd1_subj.count(s))
            throw Error("splits: subject '" + s + "' appears in sid_test and elsewhere");
    for (const auto& s : sd1_subj)
        if (!train_subj.count(s))
            throw Error("splits: sd_test_1 subject '" + s + "' missing from train");
    if (!sd_test_2.empty() && !sid_test.empty() && sd2_subj.size() != sid_subj.size())
        throw Error("splits: sd_test_2 and sid_test subject counts differ");
}

void save_splits(const SplitAssignment& splits, const fs::path& path) {
    nlohmann::ordered_json j;
    j["spec"] = {{"sid_subject_count", splits.spec.sid_subject_count},
                 {"sd2_subject_count", splits.spec.sd2_subject_count},
                 {"train_fraction", splits.spec.train_fraction},
                 {"seed", splits.spec.seed}};
    j["train"] = splits.train;
    j["sd_test_1"] = splits.sd_test_1;
    j["sd_test_2"] = splits.sd_test_2;
    j["sid_test"] = splits.sid_test;
    std::ofstream os(path);
    if (!os) throw Error("save_splits: cannot write '" + path.string() + "'");
    os << j.dump(2) << '\n';
}

SplitAssignment load_splits(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_splits: missing file '" + path.string() + "'");
    nlohmann::ordered_json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw Error("load_splits: malformed JSON in '" + path.string() + "': " + e.what());
    }
    SplitAssignment out;
    out.spec.sid_subject_count = j["spec"]["sid_subject_count"].get<int>();
    out.spec.sd2_subject_count = j["spec"]["sd2_subject_count"].get<int>();
    out.spec.train_fraction = j["spec"]["train_fraction"].get<double>();
    out.spec.seed = j["spec"]["seed"].get<uint64_t>();
    out.train = j["train"].get<std::vector<std::string>>();
    out.sd_test_1 = j["sd_test_1"].get<std::vector<std::string>>();
    out.sd_test_2 = j["sd_test_2"].get<std::vector<std::string>>();
    out.sid_test = j["sid_test"].get<std::vector<std::string>>();
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion

PairedSample load_pair(const DatasetManifest& manifest, const ManifestEntry& entry,
                       const IngestConfig& cfg) {
    if (cfg.target_size <= 0) throw Error("load_pair: non-positive target size");
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp : manifest.root / fp;
    };
    auto ingest = [&](const std::string& rel) {
        Tensor img = read_png(resolve(rel));
        img = resize_bilinear(img, cfg.target_size, cfg.target_size);
        ImageTensor out{convert_range(img, ValueRange::Unit, cfg.range), cfg.range};
        validate_image(out, "load_pair('" + rel + "')");
        return out;
    };
    PairedSample s;
    s.ear = ingest(entry.ear_path);
    s.face = ingest(entry.face_path);
    s.subject_id = entry.subject_id;
    s.pair_id = entry.pair_id;
    return s;
}

std::vector<PairedSample> load_split_pairs(const DatasetManifest& manifest,
                                           const SplitAssignment& splits,
                                           const std::string& split_name,
                                           const IngestConfig& cfg) {
    const auto& ids = splits.split(split_name);
    std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<PairedSample> out;
    out.reserve(ids.size());
    for (const auto& e : manifest.entries)
        if (wanted.count(e.pair_id)) out.push_back(load_pair(manifest, e, cfg));
    if (out.size() != wanted.size())
        throw Error("load_split_pairs: split references pair ids missing from manifest");
    std::sort(out.begin(), out.end(),
              [](const PairedSample& a, const PairedSample& b) { return a.pair_id < b.pair_id; });
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

double smoothstep(double lo, double hi, double x) {
    const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

std::array<double, 3> palette(double a, double b, double c) {
    return {0.15 + 0.7 * a, 0.15 + 0.7 * b, 0.15 + 0.7 * c};
}

void mix_in(std::array<double, 3>& dst, const std::array<double, 3>& src, double alpha) {
    for (int c = 0; c < 3; ++c) dst[c] += alpha * (src[c] - dst[c]);
}

/// Soft ellipse membership: 1 inside, 0 outside, smooth rim.
double ellipse_mask(double u, double v, double cx, double cy, double rx, double ry) {
    const double du = (u - cx) / rx, dv = (v - cy) / ry;
    return smoothstep(1.10, 0.90, std::sqrt(du * du + dv * dv));
}

void require_latent(const std::vector<double>& latent) {
    if (latent.size() < 16) throw Error("synthetic render: latent must have 16 components");
}

}  // namespace

Tensor render_synthetic_face(const std::vector<double>& latent, int family, int size,
                             double dx, double dy, double brightness) {
    require_latent(latent);
    const auto& l = latent;
    Tensor img(1, 3, size, size);

    const auto top = palette(l[0], l[1], l[2]);
    const auto bottom = palette(l[3], l[4], l[5]);
    const auto skin = std::array<double, 3>{0.45 + 0.4 * l[8], 0.35 + 0.35 * l[9],
                                            0.30 + 0.30 * l[10]};
    const auto eye = std::array<double, 3>{0.08 + 0.15 * l[11], 0.08, 0.12};
    const auto mouth = std::array<double, 3>{0.55 + 0.3 * l[12], 0.15, 0.18};
    const double cx = 0.5, cy = 0.45;
    const double rx = 0.26 + 0.10 * l[6], ry = 0.34 + 0.08 * l[7];
    const double eye_dx = 0.10 + 0.05 * l[11], eye_y = cy - 0.06 + 0.05 * l[12];
    const double eye_r = 0.035 + 0.02 * l[13];
    const double mouth_y = cy + 0.16 + 0.05 * l[14];
    const double mouth_rx = 0.07 + 0.06 * l[15];

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size - dx;
            const double v = (y + 0.5) / size - dy;
            std::array<double, 3> px;
            if (family == 0) {
                for (int c = 0; c < 3; ++c) px[c] = top[c] + (bottom[c] - top[c]) * v;
            } else {
                // striped background with an inverted palette and fine grain
                const double s = 0.5 + 0.5 * std::sin(2.0 * M_PI * (5.0 + 3.0 * l[0]) * u);
                for (int c = 0; c < 3; ++c)
                    px[c] = (1.0 - top[c]) + ((1.0 - bottom[c]) - (1.0 - top[c])) * s;
                const double grain =
                    0.06 * std::sin(34.0 * M_PI * u) * std::sin(34.0 * M_PI * v);
                for (int c = 0; c < 3; ++c) px[c] = std::clamp(px[c] + grain, 0.0, 1.0);
            }
            mix_in(px, skin, ellipse_mask(u, v, cx, cy, rx, ry));
            mix_in(px, eye, ellipse_mask(u, v, cx - eye_dx, eye_y, eye_r, eye_r));
            mix_in(px, eye, ellipse_mask(u, v, cx + eye_dx, eye_y, eye_r, eye_r));
            mix_in(px, mouth, ellipse_mask(u, v, cx, mouth_y, mouth_rx, 0.028));
            for (int c = 0; c < 3; ++c)
                img.at(0, c, y, x) = std::clamp(px[c] * brightness, 0.0, 1.0);
        }
    }
    return img;
}

Tensor render_synthetic_ear(const std::vector<double>& latent, int family, int size,
                            double dx, double dy, double brightness) {
    require_latent(latent);
    const auto& l = latent;
    Tensor img(1, 3, size, size);

    // Shares the latent slots that drive the face so the mapping is learnable.
    const auto left = palette(l[3], l[4], l[5]);
    const auto right = palette(l[0], l[1], l[2]);
    const auto skin = std::array<double, 3>{0.45 + 0.4 * l[8], 0.35 + 0.35 * l[9],
                                            0.30 + 0.30 * l[10]};
    const auto dark = std::array<double, 3>{0.10, 0.08, 0.08};
    const double cx = 0.5, cy = 0.5;
    const double rx = 0.16 + 0.08 * l[6], ry = 0.26 + 0.08 * l[7];
    const double freq = 6.0 + 8.0 * l[13];
    const double phase = 2.0 * M_PI * l[14];
    const double spiral = 1.0 + 2.0 * l[15];

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size - dx;
            const double v = (y + 0.5) / size - dy;
            std::array<double, 3> px;
            if (family == 0) {
                for (int c = 0; c < 3; ++c) px[c] = left[c] + (right[c] - left[c]) * u;
            } else {
                const double s = 0.5 + 0.5 * std::sin(2.0 * M_PI * (4.0 + 3.0 * l[3]) * v);
                for (int c = 0; c < 3; ++c)
                    px[c] = (1.0 - left[c]) + ((1.0 - right[c]) - (1.0 - left[c])) * s;
            }
            const double du = (u - cx) / rx, dv = (v - cy) / ry;
            const double rho = std::sqrt(du * du + dv * dv);
            const double theta = std::atan2(dv, du);
            double wave = std::sin(freq * rho * 2.0 * M_PI + spiral * theta + phase);
            if (family == 1) wave = std::tanh(3.0 * wave);  // harder ridges
            const double ring = 0.5 + 0.5 * wave;
            std::array<double, 3> lobe = skin;
            mix_in(lobe, dark, 0.65 * ring);
            mix_in(px, lobe, ellipse_mask(u, v, cx, cy, rx, ry));
            // tragus marker whose position encodes two more latent slots
            mix_in(px, dark,
                   ellipse_mask(u, v, cx - 0.35 * rx + 0.2 * rx * l[11],
                                cy + 0.25 * ry * (l[12] - 0.5), 0.05, 0.05));
            for (int c = 0; c < 3; ++c)
                img.at(0, c, y, x) = std::clamp(px[c] * brightness, 0.0, 1.0);
        }
    }
    return img;
}

DatasetManifest generate_synthetic(const SynthConfig& cfg, const fs::path& out_dir) {
    if (cfg.n_subjects < 2) throw Error("generate_synthetic: need at least 2 subjects");
    if (cfg.pairs_per_subject < 1) throw Error("generate_synthetic: pairs_per_subject must be >= 1");
    if (cfg.image_size < 8) throw Error("generate_synthetic: image_size too small");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw Error("generate_synthetic: cannot create output directory '" + out_dir.string() +
                    "'");

    DatasetManifest m;
    m.dataset_name = cfg.name;
    m.root = out_dir;
    const std::string fam_tag = "fam" + std::to_string(cfg.family);
    char buf[64];
    for (int s = 0; s < cfg.n_subjects; ++s) {
        Rng latent_rng(Rng::derive(cfg.seed, "latent-" + fam_tag, static_cast<uint64_t>(s)));
        std::vector<double> latent(16);
        for (double& v : latent) v = latent_rng.uniform();
        for (int p = 0; p < cfg.pairs_per_subject; ++p) {
            Rng jr(Rng::derive(cfg.seed, "jitter-" + fam_tag,
                               static_cast<uint64_t>(s) * 100003ull + p));
            const double jitter_px = 1.5 / cfg.image_size;
            const double edx = jr.uniform(-jitter_px, jitter_px);
            const double edy = jr.uniform(-jitter_px, jitter_px);
            const double eb = jr.uniform(0.96, 1.04);
            const double fdx = jr.uniform(-jitter_px, jitter_px);
            const double fdy = jr.uniform(-jitter_px, jitter_px);
            const double fb = jr.uniform(0.96, 1.04);

            std::snprintf(buf, sizeof(buf), "s%03d_p%02d", s, p);
            const std::string stem = buf;
            const std::string ear_name = stem + "_ear.png";
            const std::string face_name = stem + "_face.png";
            write_png(render_synthetic_ear(latent, cfg.family, cfg.image_size, edx, edy, eb),
                      out_dir / ear_name);
            write_png(render_synthetic_face(latent, cfg.family, cfg.image_size, fdx, fdy, fb),
                      out_dir / face_name);
            std::snprintf(buf, sizeof(buf), "subj%03d", s);
            m.entries.push_back({stem, buf, ear_name, face_name});
        }
    }
    save_manifest(m, out_dir / "manifest.csv");
    return m;
}

}  // namespace earface
