#pragma once

/// @file
/// Dataset manifests, synthetic data, and the two evaluation protocols:
/// repeated random t-per-subject splits, and gallery/probe matching with
/// subjects that may be absent from training.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mscfb/error.hpp"
#include "mscfb/filterbank.hpp"
#include "mscfb/imaging.hpp"
#include "mscfb/io.hpp"
#include "mscfb/parallel.hpp"
#include "mscfb/random.hpp"
#include "mscfb/recognition.hpp"
#include "mscfb/report.hpp"

namespace mscfb {

struct ManifestEntry {
    std::string path; // as written in the manifest
    std::string label;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Ordered (path, label) pairs. Relative paths resolve against `base_dir`,
/// the directory holding the manifest file.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;

    std::size_t size() const noexcept { return entries.size(); }

    std::filesystem::path resolve(const ManifestEntry& e) const {
        std::filesystem::path p(e.path);
        return p.is_absolute() ? p : base_dir / p;
    }

    /// Distinct labels in first-seen order.
    std::vector<std::string> subjects() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& e : entries)
            if (seen.insert(e.label).second) out.push_back(e.label);
        return out;
    }

    /// Contiguous class index per entry, numbered in first-seen order.
    std::vector<std::size_t> class_indices() const {
        std::map<std::string, std::size_t> index;
        std::vector<std::size_t> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(index.emplace(e.label, index.size()).first->second);
        return out;
    }
};

inline DatasetManifest parse_manifest(std::string_view text, std::filesystem::path base_dir = {}) {
    DatasetManifest m;
    m.base_dir = std::move(base_dir);
    std::set<std::string> paths;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw Error(ErrorCode::MalformedRow, "manifest line " + std::to_string(line_no) + ": expected 'path,label'");
        if (!paths.insert(fields[0]).second)
            throw Error(ErrorCode::DuplicatePath, "manifest line " + std::to_string(line_no) + ": '" + fields[0] + "'");
        m.entries.push_back({fields[0], fields[1]});
    }
    return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, path.string());
    return parse_manifest(read_file_text(path), path.parent_path());
}

inline std::string manifest_to_csv(const DatasetManifest& m) {
    std::string out;
    for (const auto& e : m.entries) out += e.path + "," + e.label + "\n";
    return out;
}

/// Decodes every manifest image; all must share one geometry.
inline std::vector<GrayImage> load_images(const DatasetManifest& m) {
    std::vector<GrayImage> images;
    images.reserve(m.size());
    for (const auto& e : m.entries) {
        try {
            images.push_back(load_pgm(read_file_bytes(m.resolve(e))));
        } catch (const Error& err) {
            throw Error(err.code(), e.path + ": " + err.what());
        }
        const auto& first = images.front();
        const auto& last = images.back();
        if (last.width != first.width || last.height != first.height)
            throw Error(ErrorCode::InvalidGeometry, e.path + " is " + std::to_string(last.width) + "x" +
                                                        std::to_string(last.height) + ", expected " +
                                                        std::to_string(first.width) + "x" + std::to_string(first.height));
    }
    return images;
}

inline std::vector<SubregionSample> preprocess_all(const DatasetManifest& m, const std::vector<GrayImage>& images,
                                                   const BlockSpec& spec, std::size_t workers = 1) {
    std::vector<SubregionSample> out(images.size());
    parallel_for(images.size(), workers, [&](std::size_t i) {
        out[i] = preprocess(images[i], spec);
        out[i].label = m.entries[i].label;
        out[i].source_id = m.entries[i].path;
    });
    return out;
}

inline BlockSpec block_spec_for(const std::vector<GrayImage>& images, std::uint32_t bw, std::uint32_t bh) {
    if (images.empty()) throw Error(ErrorCode::InvalidGeometry, "dataset is empty");
    BlockSpec spec{bw, bh, images.front().width, images.front().height};
    spec.validate();
    return spec;
}

// --- synthetic data ---------------------------------------------------------

struct SyntheticParams {
    std::uint32_t classes = 10;
    std::uint32_t per_class = 10;
    std::uint32_t width = 40;
    std::uint32_t height = 44;
    double separation = 50.0; // std of template pixels around mid-gray
    double noise = 5.0;       // std of per-sample noise
    std::uint64_t seed = 0;
};

struct LabeledImage {
    GrayImage image;
    std::string label;
    std::string name;
};

/// Each class gets a template with pixels 128 + separation * N(0,1); each
/// sample adds independent noise * N(0,1), then clamps to [0,255] and rounds.
/// All draws come from one SplitMix64 stream: every template first, then the
/// samples class by class.
inline std::vector<LabeledImage> generate_synthetic(const SyntheticParams& p) {
    if (p.classes < 2 || p.per_class < 1)
        throw Error(ErrorCode::InvalidGeometry, "synthetic data needs classes >= 2 and per_class >= 1");
    if (p.width < 1 || p.height < 1) throw Error(ErrorCode::InvalidGeometry, "image dimensions must be positive");
    if (!(p.separation >= 0.0) || !(p.noise >= 0.0))
        throw Error(ErrorCode::Usage, "separation and noise must be non-negative");
    SplitMix64 rng(p.seed);
    const std::size_t n = std::size_t{p.width} * p.height;
    std::vector<std::vector<double>> templates(p.classes, std::vector<double>(n));
    for (auto& t : templates)
        for (auto& v : t) v = 128.0 + p.separation * rng.normal();

    std::vector<LabeledImage> out;
    out.reserve(std::size_t{p.classes} * p.per_class);
    char name[64];
    for (std::uint32_t c = 0; c < p.classes; ++c) {
        char label[32];
        std::snprintf(label, sizeof label, "s%03u", c + 1);
        for (std::uint32_t j = 0; j < p.per_class; ++j) {
            std::vector<std::uint8_t> px(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double v = templates[c][k] + p.noise * rng.normal();
                px[k] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
            std::snprintf(name, sizeof name, "%s_%03u.pgm", label, j + 1);
            out.push_back({GrayImage(p.width, p.height, std::move(px)), label, name});
        }
    }
    return out;
}

/// Writes PGMs plus manifest.csv into `dir`; returns the manifest path.
inline std::filesystem::path write_dataset(const std::vector<LabeledImage>& images, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    DatasetManifest m;
    for (const auto& li : images) {
        write_file_bytes(dir / li.name, encode_pgm(li.image));
        m.entries.push_back({li.name, li.label});
    }
    const auto manifest = dir / "manifest.csv";
    write_file_text(manifest, manifest_to_csv(m));
    return manifest;
}

// --- random splits ----------------------------------------------------------

struct Split {
    std::vector<std::size_t> train; // manifest indices, ascending
    std::vector<std::size_t> test;
};

/// Takes exactly t entries per subject without replacement (partial
/// Fisher-Yates over each subject's entries in manifest order, subjects in
/// first-seen order, one SplitMix64 stream seeded with `seed`).
inline Split random_split(const DatasetManifest& m, std::uint32_t t, std::uint64_t seed) {
    const auto classes = m.class_indices();
    const auto subjects = m.subjects();
    std::vector<std::vector<std::size_t>> members(subjects.size());
    for (std::size_t i = 0; i < classes.size(); ++i) members[classes[i]].push_back(i);

    SplitMix64 rng(seed);
    Split split;
    for (std::size_t s = 0; s < members.size(); ++s) {
        auto& idx = members[s];
        if (idx.size() <= t)
            throw Error(ErrorCode::InsufficientSamples, "subject '" + subjects[s] + "' has " + std::to_string(idx.size()) +
                                                            " image(s), needs more than t = " + std::to_string(t));
        for (std::size_t k = 0; k < t; ++k) std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);
        split.train.insert(split.train.end(), idx.begin(), idx.begin() + t);
        split.test.insert(split.test.end(), idx.begin() + t, idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// --- protocols --------------------------------------------------------------

namespace detail {

template <class T>
std::vector<T> pick(const std::vector<T>& all, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(all[i]);
    return out;
}

struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

inline Tally score(const std::vector<SubregionSample>& probes, const Gallery& gallery, const FilterBankSet& banks,
                   Classifier classifier) {
    Tally tally;
    for (const auto& p : probes) {
        const auto f = extract_features(p, banks);
        std::optional<std::string> predicted;
        if (classifier == Classifier::max) predicted = banks.banks[classify_max(f)].class_id;
        else predicted = classify_cosine_nn(f, gallery).label;
        tally.correct += (predicted && p.label && *predicted == *p.label) ? 1 : 0;
        ++tally.total;
    }
    return tally;
}

} // namespace detail

/// One trial on already-preprocessed samples: split, train, featurize the
/// training set as the gallery, classify the rest.
inline TrialResult run_trial(const DatasetManifest& m, const std::vector<SubregionSample>& samples, const BlockSpec& spec,
                             const ExperimentConfig& config, std::uint32_t index) {
    TrialResult r;
    r.split_seed = trial_seed(config.seed, index);
    const Split split = random_split(m, config.t, r.split_seed);
    const auto train = detail::pick(samples, split.train);
    const auto test = detail::pick(samples, split.test);
    const TrainingView view(train, spec);
    const FilterBankSet banks = train_all(view, config.alpha, config.path);
    const Gallery gallery = config.classifier == Classifier::cosine ? featurize(train, banks) : Gallery{};
    const auto tally = detail::score(test, gallery, banks, config.classifier);
    r.correct = tally.correct;
    r.total = tally.total;
    r.accuracy = tally.accuracy();
    return r;
}

/// Trials run independently (optionally in parallel) and are aggregated in
/// trial order, so the report does not depend on the worker count.
inline ExperimentReport run_repeated_trials(const DatasetManifest& m, const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto images = load_images(m);
    const BlockSpec spec = block_spec_for(images, config.block_width, config.block_height);
    const auto samples = preprocess_all(m, images, spec, config.workers);

    ExperimentReport report;
    report.config = config;
    report.trials.resize(config.trials);
    parallel_for(config.trials, config.workers, [&](std::size_t i) {
        try {
            report.trials[i] = run_trial(m, samples, spec, config, static_cast<std::uint32_t>(i));
        } catch (const Error& e) {
            throw Error(e.code(), "trial " + std::to_string(i) + ": " + e.what());
        }
    });
    const auto s = summarize(report.accuracies());
    report.mean = s.mean;
    report.std = s.std;
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

struct NamedManifest {
    std::string name;
    DatasetManifest manifest;
};

/// Banks come from `train` only; gallery and probes are featurized with
/// them and each probe takes the label of its cosine-nearest gallery entry.
/// The max rule is rejected because gallery subjects need not be training
/// classes.
inline GalleryProbeReport run_gallery_probe(const DatasetManifest& train, const DatasetManifest& gallery,
                                            const std::vector<NamedManifest>& probes, const ExperimentConfig& config) {
    if (config.classifier == Classifier::max)
        throw Error(ErrorCode::UnseenSubjectsRequireNN,
                    "the max rule cannot label subjects absent from training; use the cosine classifier");
    require_design_alpha(config.alpha);
    const auto start = std::chrono::steady_clock::now();

    const auto train_images = load_images(train);
    const BlockSpec spec = block_spec_for(train_images, config.block_width, config.block_height);
    const auto train_samples = preprocess_all(train, train_images, spec, config.workers);
    const TrainingView view(train_samples, spec);
    const FilterBankSet banks = train_all(view, config.alpha, config.path, config.workers);

    const auto gallery_samples = preprocess_all(gallery, load_images(gallery), spec, config.workers);
    const Gallery gallery_features = featurize(gallery_samples, banks, config.workers);

    GalleryProbeReport report;
    report.config = config;
    report.train_classes = banks.class_count();
    report.gallery_size = gallery_features.size();
    for (const auto& probe : probes) {
        const auto probe_samples = preprocess_all(probe.manifest, load_images(probe.manifest), spec, config.workers);
        const auto tally = detail::score(probe_samples, gallery_features, banks, Classifier::cosine);
        report.probes.push_back({probe.name, tally.correct, tally.total, tally.accuracy()});
    }
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Trains banks on every manifest entry.
inline FilterBankSet train_from_manifest(const DatasetManifest& m, std::uint32_t bw, std::uint32_t bh, double alpha,
                                         SolvePath path, std::size_t workers = 1) {
    const auto images = load_images(m);
    const BlockSpec spec = block_spec_for(images, bw, bh);
    const auto samples = preprocess_all(m, images, spec, workers);
    return train_all(TrainingView(samples, spec), alpha, path, workers);
}

inline Gallery extract_from_manifest(const DatasetManifest& m, const FilterBankSet& banks, std::size_t workers = 1) {
    const auto images = load_images(m);
    for (const auto& img : images)
        if (img.width != banks.spec.image_width || img.height != banks.spec.image_height)
            throw Error(ErrorCode::SpecMismatch, "images do not match the model's " + std::to_string(banks.spec.image_width) +
                                                     "x" + std::to_string(banks.spec.image_height) + " geometry");
    return featurize(preprocess_all(m, images, banks.spec, workers), banks, workers);
}

} // namespace mscfb
