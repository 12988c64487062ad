#include "inclab/binary_io.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "inclab/errors.hpp"

namespace inclab::binary {

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw DomainError("truncated binary file");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void write_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t read_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

void write_magic(std::ostream& out, const std::array<char, 8>& magic) { out.write(magic.data(), 8); }

void expect_magic(std::istream& in, const std::array<char, 8>& magic, const std::filesystem::path& path) {
  std::array<char, 8> got{};
  in.read(got.data(), 8);
  if (!in || got != magic) throw DomainError("bad magic in " + path.string());
}

}  // namespace inclab::binary
