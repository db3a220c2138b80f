#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "fluxswarm/core/errors.hpp"

namespace fluxswarm::io {

/// Little-endian encoding of floats and doubles, independent of the host.
template <class F, class U>
void append_le(std::string& out, F value) {
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

inline void append_f64(std::string& out, double v) { append_le<double, std::uint64_t>(out, v); }
inline void append_f32(std::string& out, float v) { append_le<float, std::uint32_t>(out, v); }

template <class F, class U>
F read_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw IoError("binary data truncated");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += sizeof(U);
  return std::bit_cast<F>(bits);
}

inline double read_f64(const std::string& in, std::size_t& pos) { return read_le<double, std::uint64_t>(in, pos); }
inline float read_f32(const std::string& in, std::size_t& pos) { return read_le<float, std::uint32_t>(in, pos); }

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fluxswarm::io
