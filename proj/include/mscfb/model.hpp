#pragma once

/// @file
/// Binary persistence for a FilterBankSet.
///
///   "MSCFB1"                          6 bytes
///   version                           u32 (= 1)
///   C, M, D, bw, bh, iw, ih           u32 each
///   alpha                             f64
///   C class ids                       u32 byte length + UTF-8 bytes
///   C*M*D coefficients                f64, bank-major, then block, then pixel
///
/// All integers and reals are little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mscfb/error.hpp"
#include "mscfb/filterbank.hpp"
#include "mscfb/io.hpp"

namespace mscfb {

inline constexpr char kModelMagic[6] = {'M', 'S', 'C', 'F', 'B', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class LittleEndianWriter {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class LittleEndianReader {
public:
    explicit LittleEndianReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::span<const std::uint8_t> bytes(std::size_t n) {
        if (in_.size() - pos_ < n) throw Error(ErrorCode::BadModel, "model file is truncated");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        auto b = bytes(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
        return v;
    }
    double f64() {
        auto b = bytes(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return std::bit_cast<double>(v);
    }
    bool at_end() const noexcept { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<std::uint8_t> encode_model(const FilterBankSet& set) {
    const auto& spec = set.spec;
    const std::size_t md = spec.total_size();
    detail::LittleEndianWriter w;
    w.bytes(kModelMagic, sizeof kModelMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(set.banks.size()));
    w.u32(static_cast<std::uint32_t>(spec.block_count()));
    w.u32(static_cast<std::uint32_t>(spec.block_size()));
    w.u32(spec.block_width);
    w.u32(spec.block_height);
    w.u32(spec.image_width);
    w.u32(spec.image_height);
    w.f64(set.alpha);
    for (const auto& bank : set.banks) {
        w.u32(static_cast<std::uint32_t>(bank.class_id.size()));
        w.bytes(bank.class_id.data(), bank.class_id.size());
    }
    for (const auto& bank : set.banks) {
        if (bank.g.size() != md)
            throw Error(ErrorCode::SpecMismatch, "bank '" + bank.class_id + "' has length " + std::to_string(bank.g.size()));
        for (double v : bank.g) w.f64(v);
    }
    return w.take();
}

inline FilterBankSet decode_model(std::span<const std::uint8_t> bytes) {
    detail::LittleEndianReader r(bytes);
    auto magic = r.bytes(sizeof kModelMagic);
    if (std::memcmp(magic.data(), kModelMagic, sizeof kModelMagic) != 0)
        throw Error(ErrorCode::BadMagic, "not an MSCFB1 model file");
    const auto version = r.u32();
    if (version != kModelVersion) throw Error(ErrorCode::BadModel, "unsupported model version " + std::to_string(version));
    const std::uint32_t classes = r.u32();
    const std::uint32_t m = r.u32();
    const std::uint32_t d = r.u32();
    FilterBankSet set;
    set.spec.block_width = r.u32();
    set.spec.block_height = r.u32();
    set.spec.image_width = r.u32();
    set.spec.image_height = r.u32();
    set.spec.validate();
    if (set.spec.block_count() != m || set.spec.block_size() != d)
        throw Error(ErrorCode::BadModel, "stored M/D disagree with the block geometry");
    set.alpha = r.f64();
    set.banks.resize(classes);
    for (auto& bank : set.banks) {
        const auto len = r.u32();
        auto id = r.bytes(len);
        bank.class_id.assign(reinterpret_cast<const char*>(id.data()), id.size());
        bank.spec = set.spec;
    }
    const std::size_t md = std::size_t{m} * d;
    for (auto& bank : set.banks) {
        bank.g = RealVector(md);
        for (std::size_t k = 0; k < md; ++k) bank.g[k] = r.f64();
    }
    if (!r.at_end()) throw Error(ErrorCode::BadModel, "trailing bytes after coefficients");
    return set;
}

inline void save_model(const FilterBankSet& set, const std::filesystem::path& path) {
    write_file_bytes(path, encode_model(set));
}

inline FilterBankSet load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

} // namespace mscfb
