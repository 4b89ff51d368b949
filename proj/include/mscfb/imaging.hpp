#pragma once

/// @file
/// Grayscale images, binary PGM I/O, histogram equalization, and the block
/// partition that turns an image into M subregion vectors of length D.

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mscfb/error.hpp"
#include "mscfb/numerics.hpp"

namespace mscfb {

struct GrayImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels; // row-major, top-left first

    GrayImage() = default;
    GrayImage(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> px)
        : width(w), height(h), pixels(std::move(px)) {
        validate();
    }
    GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill) : width(w), height(h), pixels(std::size_t{w} * h, fill) {
        validate();
    }

    std::size_t size() const noexcept { return pixels.size(); }
    std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }

    void validate() const {
        detail::require(width >= 1 && height >= 1, ErrorCode::InvalidGeometry, "image must be at least 1x1");
        detail::require(pixels.size() == std::size_t{width} * height, ErrorCode::DimensionMismatch,
                        "pixel count does not match " + std::to_string(width) + "x" + std::to_string(height));
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Geometry of the block grid. M = (iw/bw)*(ih/bh), D = bw*bh.
struct BlockSpec {
    std::uint32_t block_width = 16;
    std::uint32_t block_height = 11;
    std::uint32_t image_width = 80;
    std::uint32_t image_height = 88;

    void validate() const {
        detail::require(block_width >= 1 && block_height >= 1 && image_width >= 1 && image_height >= 1,
                        ErrorCode::InvalidGeometry, "block and image dimensions must be positive");
        if (image_width % block_width != 0 || image_height % block_height != 0)
            throw Error(ErrorCode::NonDivisibleGeometry,
                        std::to_string(image_width) + "x" + std::to_string(image_height) + " image is not divisible into " +
                            std::to_string(block_width) + "x" + std::to_string(block_height) + " blocks");
    }

    std::size_t blocks_x() const noexcept { return image_width / block_width; }
    std::size_t blocks_y() const noexcept { return image_height / block_height; }
    std::size_t block_count() const noexcept { return blocks_x() * blocks_y(); }
    std::size_t block_size() const noexcept { return std::size_t{block_width} * block_height; }
    std::size_t total_size() const noexcept { return block_count() * block_size(); }

    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// One image as M block vectors (row-major over the grid, row-major within
/// each block).
struct SubregionSample {
    std::vector<RealVector> blocks;
    std::optional<std::string> label;
    std::string source_id;

    std::size_t block_count() const noexcept { return blocks.size(); }
    std::size_t block_size() const noexcept { return blocks.empty() ? 0 : blocks.front().size(); }

    /// Blocks laid end to end, length M*D.
    RealVector concatenated() const {
        std::vector<double> out;
        out.reserve(block_count() * block_size());
        for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
        return RealVector(std::move(out));
    }
};

namespace detail {

class PgmHeaderReader {
public:
    explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string_view magic() {
        if (bytes_.size() < 2) throw Error(ErrorCode::BadMagic, "input shorter than the PGM magic");
        pos_ = 2;
        return {reinterpret_cast<const char*>(bytes_.data()), 2};
    }

    std::uint64_t number() {
        skip_whitespace_and_comments();
        if (pos_ >= bytes_.size()) throw Error(ErrorCode::MalformedHeader, "header ends early");
        if (!std::isdigit(bytes_[pos_])) throw Error(ErrorCode::MalformedHeader, "expected a decimal field");
        std::uint64_t v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 0xFFFFFFFFull) throw Error(ErrorCode::MalformedHeader, "header field too large");
            ++pos_;
        }
        return v;
    }

    /// Consumes the single whitespace byte that separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw Error(ErrorCode::MalformedHeader, "missing whitespace before raster");
        return pos_ + 1;
    }

private:
    void skip_whitespace_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Decodes a binary (P5) PGM with maxval 255.
inline GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
    detail::PgmHeaderReader reader(bytes);
    if (reader.magic() != "P5") throw Error(ErrorCode::BadMagic, "not a binary PGM (P5)");
    const auto width = reader.number();
    const auto height = reader.number();
    const auto maxval = reader.number();
    if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "zero image dimension");
    if (maxval != 255) throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval));
    const std::size_t offset = reader.raster_offset();
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() < offset + count)
        throw Error(ErrorCode::TruncatedData,
                    "expected " + std::to_string(count) + " pixels, found " + std::to_string(bytes.size() - std::min(bytes.size(), offset)));
    std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return GrayImage(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height), std::move(px));
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    img.validate();
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

/// Maps v to round((cdf(v) - cdf_min) / (N - cdf_min) * 255) with
/// half-up rounding in exact integer arithmetic. A single-intensity image
/// (cdf_min == N) comes back unchanged.
inline std::array<std::uint8_t, 256> equalization_table(const GrayImage& img) {
    img.validate();
    std::array<std::uint64_t, 256> hist{};
    for (auto p : img.pixels) ++hist[p];
    std::array<std::uint8_t, 256> table{};
    const std::uint64_t n = img.pixels.size();
    std::uint64_t cdf_min = 0;
    for (auto h : hist) {
        if (h != 0) {
            cdf_min = h;
            break;
        }
    }
    if (cdf_min == n) {
        for (int v = 0; v < 256; ++v) table[v] = static_cast<std::uint8_t>(v);
        return table;
    }
    const std::uint64_t denom = n - cdf_min;
    std::uint64_t cdf = 0;
    for (int v = 0; v < 256; ++v) {
        cdf += hist[v];
        const std::uint64_t num = cdf >= cdf_min ? cdf - cdf_min : 0;
        table[v] = static_cast<std::uint8_t>((2 * num * 255 + denom) / (2 * denom));
    }
    return table;
}

inline GrayImage equalize_histogram(const GrayImage& img) {
    const auto table = equalization_table(img);
    GrayImage out = img;
    for (auto& p : out.pixels) p = table[p];
    return out;
}

namespace detail {
template <class Pixel>
std::vector<RealVector> split_blocks(std::span<const Pixel> pixels, const BlockSpec& spec) {
    const std::size_t bw = spec.block_width, bh = spec.block_height, iw = spec.image_width;
    std::vector<RealVector> blocks;
    blocks.reserve(spec.block_count());
    for (std::size_t r = 0; r < spec.blocks_y(); ++r) {
        for (std::size_t c = 0; c < spec.blocks_x(); ++c) {
            RealVector block(spec.block_size());
            std::size_t k = 0;
            for (std::size_t y = r * bh; y < (r + 1) * bh; ++y)
                for (std::size_t x = c * bw; x < (c + 1) * bw; ++x) block[k++] = static_cast<double>(pixels[y * iw + x]);
            blocks.push_back(std::move(block));
        }
    }
    return blocks;
}
} // namespace detail

inline SubregionSample partition(const GrayImage& img, const BlockSpec& spec) {
    img.validate();
    spec.validate();
    if (img.width != spec.image_width || img.height != spec.image_height)
        throw Error(ErrorCode::DimensionMismatch,
                    "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) + ", block spec expects " +
                        std::to_string(spec.image_width) + "x" + std::to_string(spec.image_height));
    SubregionSample s;
    s.blocks = detail::split_blocks(std::span<const std::uint8_t>(img.pixels), spec);
    return s;
}

/// Histogram equalization followed by block partition.
inline SubregionSample preprocess(const GrayImage& img, const BlockSpec& spec) {
    return partition(equalize_histogram(img), spec);
}

} // namespace mscfb
