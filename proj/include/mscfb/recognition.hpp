#pragma once

/// @file
/// Class-similarity features and the two classification rules.
///
/// A sample's feature vector has one component per trained class: the sum
/// over blocks of the inner products between that class's filters and the
/// sample's block vectors (the summed origin correlation output).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mscfb/error.hpp"
#include "mscfb/filterbank.hpp"
#include "mscfb/imaging.hpp"
#include "mscfb/numerics.hpp"
#include "mscfb/parallel.hpp"

namespace mscfb {

struct FeatureVector {
    std::vector<double> values; // one per class, in FilterBankSet order

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct GalleryEntry {
    FeatureVector features;
    std::optional<std::string> label;
    std::string source_id;
};

using Gallery = std::vector<GalleryEntry>;

inline void require_matching_spec(const SubregionSample& sample, const FilterBankSet& banks) {
    if (sample.block_count() != banks.spec.block_count() || sample.block_size() != banks.spec.block_size())
        throw Error(ErrorCode::SpecMismatch, "sample '" + sample.source_id + "' is " + std::to_string(sample.block_count()) +
                                                 " blocks of " + std::to_string(sample.block_size()) + ", model expects " +
                                                 std::to_string(banks.spec.block_count()) + " of " +
                                                 std::to_string(banks.spec.block_size()));
    for (const auto& b : sample.blocks)
        if (b.size() != banks.spec.block_size()) throw Error(ErrorCode::SpecMismatch, "ragged sample blocks");
}

/// f[c] = sum over blocks m of <h_{m,c}, x_m>.
inline FeatureVector extract_features(const SubregionSample& sample, const FilterBankSet& banks) {
    require_matching_spec(sample, banks);
    FeatureVector f;
    f.values.reserve(banks.class_count());
    for (const auto& bank : banks.banks) {
        double total = 0.0;
        for (std::size_t m = 0; m < sample.block_count(); ++m) total += dot(bank.filter(m), sample.blocks[m].span());
        f.values.push_back(total);
    }
    return f;
}

/// Same quantity as a single inner product over the concatenated sample.
inline FeatureVector extract_features_concatenated(const SubregionSample& sample, const FilterBankSet& banks) {
    require_matching_spec(sample, banks);
    const RealVector x = sample.concatenated();
    FeatureVector f;
    f.values.reserve(banks.class_count());
    for (const auto& bank : banks.banks) f.values.push_back(dot(bank.g, x));
    return f;
}

inline Gallery featurize(const std::vector<SubregionSample>& samples, const FilterBankSet& banks, std::size_t workers = 1) {
    Gallery out(samples.size());
    parallel_for(samples.size(), workers, [&](std::size_t i) {
        out[i] = GalleryEntry{extract_features(samples[i], banks), samples[i].label, samples[i].source_id};
    });
    return out;
}

/// Index (0-based) of the largest component; ties go to the lowest index.
/// Not meaningful when the probe's subject was absent from training.
inline std::size_t classify_max(const FeatureVector& f) {
    if (f.values.empty()) throw Error(ErrorCode::DimensionMismatch, "empty feature vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
        if (f[i] > f[best]) best = i;
    return best;
}

inline constexpr double kMinFeatureNorm = 1e-300;

inline double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    const double na = norm2(a.values), nb = norm2(b.values);
    if (!(na > kMinFeatureNorm) || !(nb > kMinFeatureNorm))
        throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero-norm feature vector");
    return dot(a.values, b.values) / (na * nb);
}

struct Match {
    std::size_t index = 0;
    std::optional<std::string> label;
    double similarity = 0.0;
};

/// Nearest gallery entry by cosine similarity; ties go to the earliest entry.
inline Match classify_cosine_nn(const FeatureVector& probe, const Gallery& gallery) {
    if (gallery.empty()) throw Error(ErrorCode::EmptyGallery, "cannot classify against an empty gallery");
    Match best{0, gallery[0].label, cosine_similarity(probe, gallery[0].features)};
    for (std::size_t i = 1; i < gallery.size(); ++i) {
        const double s = cosine_similarity(probe, gallery[i].features);
        if (s > best.similarity) best = {i, gallery[i].label, s};
    }
    return best;
}

/// Formats a real with 17 significant digits, enough to round-trip a double.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size())
        throw Error(ErrorCode::MalformedRow, "not a real number: '" + tmp + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

/// One row per entry: source_id, label (empty when absent), C components.
inline std::string features_to_csv(const Gallery& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.source_id;
        out += ',';
        if (row.label) out += *row.label;
        for (double v : row.features.values) {
            out += ',';
            out += format_real(v);
        }
        out += '\n';
    }
    return out;
}

inline Gallery features_from_csv(std::string_view text) {
    Gallery rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 3) throw Error(ErrorCode::MalformedRow, "feature row " + std::to_string(line_no));
        GalleryEntry e;
        e.source_id = fields[0];
        if (!fields[1].empty()) e.label = fields[1];
        for (std::size_t i = 2; i < fields.size(); ++i) e.features.values.push_back(parse_real(fields[i]));
        if (!rows.empty() && rows.front().features.size() != e.features.size())
            throw Error(ErrorCode::MalformedRow, "feature row " + std::to_string(line_no) + " has a different width");
        rows.push_back(std::move(e));
    }
    return rows;
}

} // namespace mscfb
