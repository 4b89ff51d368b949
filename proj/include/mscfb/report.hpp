#pragma once

/// @file
/// Experiment reports and their JSON / CSV encodings. Reals are written with
/// 17 significant digits and keys appear in a fixed order, so identical
/// reports serialize to identical bytes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mscfb/error.hpp"
#include "mscfb/filterbank.hpp"
#include "mscfb/io.hpp"
#include "mscfb/recognition.hpp"

namespace mscfb {

inline constexpr std::uint32_t kReportFormatVersion = 1;
inline constexpr std::string_view kPrngName = "splitmix64";

enum class Classifier { max, cosine };

inline std::string_view to_string(Classifier c) noexcept { return c == Classifier::max ? "max" : "cosine"; }

inline Classifier parse_classifier(std::string_view s) {
    if (s == "max") return Classifier::max;
    if (s == "cosine") return Classifier::cosine;
    throw Error(ErrorCode::Usage, "unknown classifier '" + std::string(s) + "'");
}

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw Error(ErrorCode::Usage, "unknown report format '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::uint32_t block_width = 16;
    std::uint32_t block_height = 11;
    double alpha = kDefaultAlpha;
    std::uint32_t t = 3;
    std::uint32_t trials = 20;
    std::uint64_t seed = 0;
    Classifier classifier = Classifier::cosine;
    SolvePath path = SolvePath::automatic;
    std::size_t workers = 1; // execution only; never part of a report

    void validate() const {
        if (t < 1) throw Error(ErrorCode::Usage, "t must be at least 1");
        if (trials < 1) throw Error(ErrorCode::Usage, "trials must be at least 1");
        require_design_alpha(alpha);
        if (block_width < 1 || block_height < 1) throw Error(ErrorCode::InvalidGeometry, "block size must be positive");
    }

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        return a.block_width == b.block_width && a.block_height == b.block_height && a.alpha == b.alpha && a.t == b.t &&
               a.trials == b.trials && a.seed == b.seed && a.classifier == b.classifier && a.path == b.path;
    }
};

struct TrialResult {
    std::uint64_t split_seed = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double std = 0.0; // population standard deviation
    double wall_clock_seconds = 0.0;

    std::vector<double> accuracies() const {
        std::vector<double> a;
        a.reserve(trials.size());
        for (const auto& t : trials) a.push_back(t.accuracy);
        return a;
    }
};

struct Summary {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation.
inline Summary summarize(const std::vector<double>& values) {
    if (values.empty()) return {};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

struct ProbeSetResult {
    std::string name;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
};

struct GalleryProbeReport {
    ExperimentConfig config;
    std::size_t train_classes = 0;
    std::size_t gallery_size = 0;
    std::vector<ProbeSetResult> probes;
    double wall_clock_seconds = 0.0;
};

namespace detail {

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline std::string json_reals(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_real(v[i]);
    }
    return out + "]";
}

template <class T>
std::string json_integers(const std::vector<T>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

inline std::string config_json(const ExperimentConfig& c, bool with_trials) {
    std::string out = "{\n";
    out += "    \"block_width\": " + std::to_string(c.block_width) + ",\n";
    out += "    \"block_height\": " + std::to_string(c.block_height) + ",\n";
    out += "    \"alpha\": " + format_real(c.alpha) + ",\n";
    if (with_trials) {
        out += "    \"t\": " + std::to_string(c.t) + ",\n";
        out += "    \"trials\": " + std::to_string(c.trials) + ",\n";
        out += "    \"seed\": " + std::to_string(c.seed) + ",\n";
    }
    out += "    \"classifier\": " + json_string(to_string(c.classifier)) + ",\n";
    out += "    \"path\": " + json_string(to_string(c.path)) + "\n";
    return out + "  }";
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.block_width = j.at("block_width").get<std::uint32_t>();
    c.block_height = j.at("block_height").get<std::uint32_t>();
    c.alpha = j.at("alpha").get<double>();
    if (j.contains("t")) c.t = j.at("t").get<std::uint32_t>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::uint32_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.classifier = parse_classifier(j.at("classifier").get<std::string>());
    c.path = parse_solve_path(j.at("path").get<std::string>());
    return c;
}

} // namespace detail

inline std::string report_to_json(const ExperimentReport& r) {
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> correct, total;
    for (const auto& t : r.trials) {
        seeds.push_back(t.split_seed);
        correct.push_back(t.correct);
        total.push_back(t.total);
    }
    std::string out = "{\n";
    out += "  \"format\": \"mscfb-report\",\n";
    out += "  \"format_version\": " + std::to_string(kReportFormatVersion) + ",\n";
    out += "  \"protocol\": \"repeated-trials\",\n";
    out += "  \"prng\": " + detail::json_string(kPrngName) + ",\n";
    out += "  \"config\": " + detail::config_json(r.config, true) + ",\n";
    out += "  \"split_seeds\": " + detail::json_integers(seeds) + ",\n";
    out += "  \"correct\": " + detail::json_integers(correct) + ",\n";
    out += "  \"total\": " + detail::json_integers(total) + ",\n";
    out += "  \"accuracies\": " + detail::json_reals(r.accuracies()) + ",\n";
    out += "  \"mean\": " + format_real(r.mean) + ",\n";
    out += "  \"std\": " + format_real(r.std) + ",\n";
    out += "  \"wall_clock_seconds\": " + format_real(r.wall_clock_seconds) + "\n";
    return out + "}\n";
}

inline ExperimentReport report_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("report json: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "mscfb-report" || j.at("protocol").get<std::string>() != "repeated-trials")
            throw Error(ErrorCode::MalformedRow, "not a repeated-trials report");
        ExperimentReport r;
        r.config = detail::config_from_json(j.at("config"));
        const auto& seeds = j.at("split_seeds");
        const auto& correct = j.at("correct");
        const auto& total = j.at("total");
        const auto& acc = j.at("accuracies");
        if (seeds.size() != acc.size() || correct.size() != acc.size() || total.size() != acc.size())
            throw Error(ErrorCode::MalformedRow, "per-trial arrays differ in length");
        for (std::size_t i = 0; i < acc.size(); ++i)
            r.trials.push_back({seeds[i].get<std::uint64_t>(), correct[i].get<std::size_t>(), total[i].get<std::size_t>(),
                                acc[i].get<double>()});
        r.mean = j.at("mean").get<double>();
        r.std = j.at("std").get<double>();
        r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("report json: ") + e.what());
    }
}

/// Key/value header section, then one row per trial under
/// `trial,split_seed,correct,total,accuracy`.
inline std::string report_to_csv(const ExperimentReport& r) {
    const auto& c = r.config;
    std::string out = "key,value\n";
    out += "format,mscfb-report\n";
    out += "format_version," + std::to_string(kReportFormatVersion) + "\n";
    out += "protocol,repeated-trials\n";
    out += "prng," + std::string(kPrngName) + "\n";
    out += "block_width," + std::to_string(c.block_width) + "\n";
    out += "block_height," + std::to_string(c.block_height) + "\n";
    out += "alpha," + format_real(c.alpha) + "\n";
    out += "t," + std::to_string(c.t) + "\n";
    out += "trials," + std::to_string(c.trials) + "\n";
    out += "seed," + std::to_string(c.seed) + "\n";
    out += "classifier," + std::string(to_string(c.classifier)) + "\n";
    out += "path," + std::string(to_string(c.path)) + "\n";
    out += "mean," + format_real(r.mean) + "\n";
    out += "std," + format_real(r.std) + "\n";
    out += "wall_clock_seconds," + format_real(r.wall_clock_seconds) + "\n";
    out += "trial,split_seed,correct,total,accuracy\n";
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& t = r.trials[i];
        out += std::to_string(i) + "," + std::to_string(t.split_seed) + "," + std::to_string(t.correct) + "," +
               std::to_string(t.total) + "," + format_real(t.accuracy) + "\n";
    }
    return out;
}

inline ExperimentReport report_from_csv(std::string_view text) {
    ExperimentReport r;
    bool in_trials = false;
    bool saw_header = false;
    std::size_t pos = 0;
    auto to_u64 = [](const std::string& s) {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw Error(ErrorCode::MalformedRow, "not an integer: '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    try {
        while (pos < text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            auto line = text.substr(pos, nl - pos);
            pos = nl + 1;
            if (line.empty()) continue;
            auto f = split_csv_line(line);
            if (!saw_header) {
                if (line != "key,value") throw Error(ErrorCode::MalformedRow, "missing key,value header");
                saw_header = true;
                continue;
            }
            if (line == "trial,split_seed,correct,total,accuracy") {
                in_trials = true;
                continue;
            }
            if (in_trials) {
                if (f.size() != 5) throw Error(ErrorCode::MalformedRow, "trial row");
                r.trials.push_back({to_u64(f[1]), static_cast<std::size_t>(to_u64(f[2])),
                                    static_cast<std::size_t>(to_u64(f[3])), parse_real(f[4])});
                continue;
            }
            if (f.size() != 2) throw Error(ErrorCode::MalformedRow, "key/value row");
            const auto& k = f[0];
            const auto& v = f[1];
            if (k == "block_width") r.config.block_width = static_cast<std::uint32_t>(to_u64(v));
            else if (k == "block_height") r.config.block_height = static_cast<std::uint32_t>(to_u64(v));
            else if (k == "alpha") r.config.alpha = parse_real(v);
            else if (k == "t") r.config.t = static_cast<std::uint32_t>(to_u64(v));
            else if (k == "trials") r.config.trials = static_cast<std::uint32_t>(to_u64(v));
            else if (k == "seed") r.config.seed = to_u64(v);
            else if (k == "classifier") r.config.classifier = parse_classifier(v);
            else if (k == "path") r.config.path = parse_solve_path(v);
            else if (k == "mean") r.mean = parse_real(v);
            else if (k == "std") r.std = parse_real(v);
            else if (k == "wall_clock_seconds") r.wall_clock_seconds = parse_real(v);
        }
    } catch (const std::logic_error& e) {
        throw Error(ErrorCode::MalformedRow, std::string("report csv: ") + e.what());
    }
    return r;
}

inline std::string gallery_probe_to_json(const GalleryProbeReport& r) {
    std::string out = "{\n";
    out += "  \"format\": \"mscfb-report\",\n";
    out += "  \"format_version\": " + std::to_string(kReportFormatVersion) + ",\n";
    out += "  \"protocol\": \"gallery-probe\",\n";
    out += "  \"config\": " + detail::config_json(r.config, false) + ",\n";
    out += "  \"train_classes\": " + std::to_string(r.train_classes) + ",\n";
    out += "  \"gallery_size\": " + std::to_string(r.gallery_size) + ",\n";
    out += "  \"probes\": [";
    for (std::size_t i = 0; i < r.probes.size(); ++i) {
        const auto& p = r.probes[i];
        out += i ? ",\n    " : "\n    ";
        out += "{\"name\": " + detail::json_string(p.name) + ", \"correct\": " + std::to_string(p.correct) +
               ", \"total\": " + std::to_string(p.total) + ", \"accuracy\": " + format_real(p.accuracy) + "}";
    }
    out += r.probes.empty() ? "],\n" : "\n  ],\n";
    out += "  \"wall_clock_seconds\": " + format_real(r.wall_clock_seconds) + "\n";
    return out + "}\n";
}

inline GalleryProbeReport gallery_probe_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("protocol").get<std::string>() != "gallery-probe")
            throw Error(ErrorCode::MalformedRow, "not a gallery-probe report");
        GalleryProbeReport r;
        r.config = detail::config_from_json(j.at("config"));
        r.train_classes = j.at("train_classes").get<std::size_t>();
        r.gallery_size = j.at("gallery_size").get<std::size_t>();
        for (const auto& p : j.at("probes"))
            r.probes.push_back({p.at("name").get<std::string>(), p.at("correct").get<std::size_t>(),
                                p.at("total").get<std::size_t>(), p.at("accuracy").get<double>()});
        r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("report json: ") + e.what());
    }
}

inline void emit_report(const ExperimentReport& r, const std::filesystem::path& path, ReportFormat format) {
    write_file_text(path, format == ReportFormat::json ? report_to_json(r) : report_to_csv(r));
}

inline void emit_report(const GalleryProbeReport& r, const std::filesystem::path& path) {
    write_file_text(path, gallery_probe_to_json(r));
}

} // namespace mscfb
