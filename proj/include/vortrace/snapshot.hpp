#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortrace/field.hpp"
#include "vortrace/rng.hpp"

namespace vortrace {

class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Binary state snapshot, format "VTRC" v1, little-endian:
///   magic[4] | version u32 | cutoff i32 | time f64 | mode_count u32 |
///   mode_count x { k1 i32, k2 i32, re f64, im f64 }   (half-lattice order) |
///   rng block { algorithm tag char[16], seed u64, stream u64, counter u64 }
struct Snapshot {
    int cutoff = 0;
    double time = 0.0;
    SpectralField field;
    RngState rng;

    static constexpr char kMagic[4] = {'V', 'T', 'R', 'C'};
    static constexpr std::uint32_t kVersion = 1;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}
inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

class Reader {
  public:
    Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void bytes(std::uint8_t* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, data_ + pos_, n);
        pos_ += n;
    }
    bool exhausted() const { return pos_ == size_; }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > size_) throw FormatError("snapshot truncated");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> snapshot_serialize(const Snapshot& s) {
    std::vector<std::uint8_t> out;
    out.reserve(32 + s.field.mode_count() * 24 + 40);
    for (char c : Snapshot::kMagic) out.push_back(static_cast<std::uint8_t>(c));
    detail::put_u32(out, Snapshot::kVersion);
    detail::put_i32(out, s.cutoff);
    detail::put_f64(out, s.time);
    detail::put_u32(out, static_cast<std::uint32_t>(s.field.mode_count()));
    for (std::size_t i = 0; i < s.field.mode_count(); ++i) {
        const Wavevector& k = s.field.table()[i];
        detail::put_i32(out, k.k1);
        detail::put_i32(out, k.k2);
        detail::put_f64(out, s.field[i].real());
        detail::put_f64(out, s.field[i].imag());
    }
    char tag[16] = {};
    std::strncpy(tag, kRngAlgorithm, sizeof(tag) - 1);
    for (char c : tag) out.push_back(static_cast<std::uint8_t>(c));
    detail::put_u64(out, s.rng.seed);
    detail::put_u64(out, s.rng.stream);
    detail::put_u64(out, s.rng.counter);
    return out;
}

inline Snapshot snapshot_deserialize(const std::vector<std::uint8_t>& bytes) {
    detail::Reader r(bytes.data(), bytes.size());
    std::uint8_t magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, Snapshot::kMagic, 4) != 0)
        throw FormatError("snapshot magic mismatch (not a VTRC file)");
    const std::uint32_t version = r.u32();
    if (version != Snapshot::kVersion)
        throw FormatError("snapshot version " + std::to_string(version) + " unsupported");
    Snapshot s;
    s.cutoff = r.i32();
    if (s.cutoff < 1 || s.cutoff > 4096) throw FormatError("snapshot cutoff out of range");
    s.time = r.f64();
    const std::uint32_t count = r.u32();
    s.field = SpectralField(s.cutoff);
    if (count != s.field.mode_count())
        throw FormatError("snapshot mode count does not match cutoff");
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::int32_t k1 = r.i32();
        const std::int32_t k2 = r.i32();
        const double re = r.f64();
        const double im = r.f64();
        const Wavevector& expect = s.field.table()[i];
        if (expect.k1 != k1 || expect.k2 != k2)
            throw FormatError("snapshot mode order mismatch at record " + std::to_string(i));
        s.field[i] = Complex{re, im};
    }
    char tag[16];
    r.bytes(reinterpret_cast<std::uint8_t*>(tag), 16);
    tag[15] = '\0';
    if (std::string(tag) != kRngAlgorithm)
        throw FormatError("snapshot rng algorithm '" + std::string(tag) + "' unsupported");
    s.rng.seed = r.u64();
    s.rng.stream = r.u64();
    s.rng.counter = r.u64();
    if (!r.exhausted()) throw FormatError("snapshot has trailing bytes");
    return s;
}

inline void snapshot_save(const Snapshot& s, const std::string& path) {
    const auto bytes = snapshot_serialize(s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("snapshot_save: cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("snapshot_save: write failed for " + path);
}

inline Snapshot snapshot_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot_load: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return snapshot_deserialize(bytes);
}

}  // namespace vortrace
