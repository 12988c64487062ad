#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace inclab::binary {

// Little-endian primitives for the columnar files, independent of host order.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

void write_magic(std::ostream& out, const std::array<char, 8>& magic);
// Throws DomainError with the path when the magic does not match.
void expect_magic(std::istream& in, const std::array<char, 8>& magic, const std::filesystem::path& path);

}  // namespace inclab::binary
