#pragma once

// "SIZF1" binary field files. All integers and doubles little-endian.
//
//   magic        5 bytes  "SIZF1"
//   name_len     u16, then name_len bytes of group name
//   r, d, S      u32 each
//   j_min, j_max r x i32 each
//   q            u32
//   mask         ceil(slots / 8) bytes, slot i -> bit (i % 8) of byte i / 8
//   data         per slot (sigma lexicographic, then j lexicographic), the
//                q^d x q^d matrix row-major, each entry as (re, im) f64
//
// slots = S^r * |box|. Masked slots are stored as zeros.

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/transform.hpp"

namespace sis {

inline constexpr char sizf_magic[5] = {'S', 'I', 'Z', 'F', '1'};

/// Header fields of a field file.
struct SizfHeader {
  std::string group;
  std::uint32_t r = 0, d = 0, S = 0, q = 0;
  std::vector<std::int32_t> j_min, j_max;
  std::vector<char> mask;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  const std::string& str() const { return out_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& buf) : buf_(buf) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n)
      throw InputError("SIZF1: truncated file at byte offset " + std::to_string(pos_) + " (need " +
                       std::to_string(n) + " more bytes, file has " + std::to_string(buf_.size()) +
                       ")");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_sizf(const OperatorField& f) {
  const Layout& l = *f.layout;
  detail::ByteWriter w;
  w.bytes(sizf_magic, sizeof sizf_magic);
  const auto name = l.group().name();
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u32(static_cast<std::uint32_t>(l.r()));
  w.u32(static_cast<std::uint32_t>(l.group().d));
  w.u32(static_cast<std::uint32_t>(l.S()));
  for (int v : l.box().j_min) w.i32(v);
  for (int v : l.box().j_max) w.i32(v);
  w.u32(static_cast<std::uint32_t>(l.space().samples()));
  const auto& mask = l.mask();
  for (std::size_t byte = 0; byte < (mask.size() + 7) / 8; ++byte) {
    std::uint8_t b = 0;
    for (std::size_t bit = 0; bit < 8 && byte * 8 + bit < mask.size(); ++bit)
      if (mask[byte * 8 + bit]) b |= static_cast<std::uint8_t>(1u << bit);
    w.u8(b);
  }
  for (const auto& op : f.data)
    for (Eigen::Index i = 0; i < op.rows(); ++i)
      for (Eigen::Index k = 0; k < op.cols(); ++k) {
        w.f64(op(i, k).real());
        w.f64(op(i, k).imag());
      }
  return w.str();
}

/// Parses a file image. The result's layout is rebuilt from the header and
/// must then be checked against the caller's layout (see decode_sizf).
inline SizfHeader read_sizf_header(detail::ByteReader& rd) {
  const auto magic = rd.bytes(sizeof sizf_magic);
  if (magic != std::string(sizf_magic, sizeof sizf_magic))
    throw InputError("SIZF1: bad magic at byte offset 0");
  SizfHeader h;
  const auto len = rd.u16();
  h.group = rd.bytes(len);
  h.r = rd.u32();
  h.d = rd.u32();
  h.S = rd.u32();
  if (h.r == 0 || h.r > 8 || h.d > 8 || h.S < 2)
    throw InputError("SIZF1: implausible dimensions (r=" + std::to_string(h.r) + ", d=" +
                     std::to_string(h.d) + ", S=" + std::to_string(h.S) + ")");
  for (std::uint32_t i = 0; i < h.r; ++i) h.j_min.push_back(rd.i32());
  for (std::uint32_t i = 0; i < h.r; ++i) h.j_max.push_back(rd.i32());
  h.q = rd.u32();
  std::size_t slots = 1;
  for (std::uint32_t i = 0; i < h.r; ++i) {
    if (h.j_max[i] < h.j_min[i]) throw InputError("SIZF1: empty fiber box in header");
    slots *= h.S * static_cast<std::size_t>(h.j_max[i] - h.j_min[i] + 1);
    if (slots > (std::size_t{1} << 26)) throw InputError("SIZF1: header describes too many slots");
  }
  h.mask.resize(slots);
  for (std::size_t byte = 0; byte < (slots + 7) / 8; ++byte) {
    const auto b = rd.u8();
    for (std::size_t bit = 0; bit < 8 && byte * 8 + bit < slots; ++bit)
      h.mask[byte * 8 + bit] = (b >> bit) & 1u ? 1 : 0;
  }
  return h;
}

/// Decodes a file image against an expected layout; any header field that
/// disagrees with the layout is a dimension mismatch.
inline OperatorField decode_sizf(const std::string& image, const LayoutPtr& layout) {
  detail::ByteReader rd(image);
  const auto h = read_sizf_header(rd);
  const Layout& l = *layout;
  auto mismatch = [](const std::string& what, const std::string& file, const std::string& want) {
    return InputError("SIZF1: dimension mismatch in " + what + ": file has " + file +
                      ", config expects " + want);
  };
  if (h.group != l.group().name()) throw mismatch("group", h.group, l.group().name());
  if (h.r != static_cast<std::uint32_t>(l.r()))
    throw mismatch("r", std::to_string(h.r), std::to_string(l.r()));
  if (h.d != static_cast<std::uint32_t>(l.group().d))
    throw mismatch("d", std::to_string(h.d), std::to_string(l.group().d));
  if (h.S != static_cast<std::uint32_t>(l.S()))
    throw mismatch("S", std::to_string(h.S), std::to_string(l.S()));
  if (h.q != static_cast<std::uint32_t>(l.space().samples()))
    throw mismatch("q", std::to_string(h.q), std::to_string(l.space().samples()));
  for (std::size_t a = 0; a < h.j_min.size(); ++a)
    if (h.j_min[a] != l.box().j_min[a] || h.j_max[a] != l.box().j_max[a])
      throw mismatch("fiber box", std::to_string(h.j_min[a]) + ".." + std::to_string(h.j_max[a]),
                     std::to_string(l.box().j_min[a]) + ".." + std::to_string(l.box().j_max[a]));
  if (h.mask != l.mask()) throw InputError("SIZF1: mask bitmap differs from the config's pf_eps mask");

  OperatorField f = OperatorField::zeros(layout, Measure::plancherel);
  for (auto& op : f.data)
    for (Eigen::Index i = 0; i < op.rows(); ++i)
      for (Eigen::Index k = 0; k < op.cols(); ++k) {
        const double re = rd.f64();
        const double im = rd.f64();
        op(i, k) = {re, im};
      }
  if (!rd.done())
    throw InputError("SIZF1: trailing bytes after data at byte offset " + std::to_string(rd.offset()));
  return f;
}

inline void write_sizf(const std::string& path, const OperatorField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  const auto image = encode_sizf(f);
  out.write(image.data(), static_cast<std::streamsize>(image.size()));
  if (!out) throw InputError("write to '" + path + "' failed");
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline OperatorField read_sizf(const std::string& path, const LayoutPtr& layout) {
  return decode_sizf(read_file_bytes(path), layout);
}

}  // namespace sis
