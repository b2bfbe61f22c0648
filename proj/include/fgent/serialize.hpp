#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "fgent/errors.hpp"
#include "fgent/matrix.hpp"

namespace fgent {

// Versioned binary container for model parameters: string metadata plus named
// matrices of raw doubles. Little-endian on disk; write/read round-trips are
// bit-exact, including non-finite values.
struct ParamContainer {
  static constexpr char kMagic[4] = {'F', 'G', 'P', 'C'};
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> matrices;

  void save(std::ostream& os) const {
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(meta.size()));
    for (const auto& [k, v] : meta) {
      write_str(os, k);
      write_str(os, v);
    }
    write_u32(os, static_cast<std::uint32_t>(matrices.size()));
    for (const auto& [k, m] : matrices) {
      write_str(os, k);
      write_u64(os, m.rows());
      write_u64(os, m.cols());
      for (double d : m.data()) write_u64(os, std::bit_cast<std::uint64_t>(d));
    }
  }

  static ParamContainer load(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
      throw data_error("not a parameter container (bad magic)");
    std::uint32_t version = read_u32(is);
    if (version != kVersion)
      throw data_error("unsupported container version " + std::to_string(version));
    ParamContainer c;
    std::uint32_t n_meta = read_u32(is);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
      std::string k = read_str(is);
      c.meta[k] = read_str(is);
    }
    std::uint32_t n_mat = read_u32(is);
    for (std::uint32_t i = 0; i < n_mat; ++i) {
      std::string k = read_str(is);
      std::uint64_t rows = read_u64(is);
      std::uint64_t cols = read_u64(is);
      Matrix m(rows, cols);
      for (auto& d : m.data()) d = std::bit_cast<double>(read_u64(is));
      if (!is) throw data_error("truncated parameter container");
      c.matrices[k] = std::move(m);
    }
    return c;
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot write '" + path + "'");
    save(os);
    if (!os) throw data_error("failed writing '" + path + "'");
  }

  static ParamContainer load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot read '" + path + "'");
    return load(is);
  }

  const std::string& require_meta(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw data_error("container is missing metadata '" + key + "'");
    return it->second;
  }

  const Matrix& require_matrix(const std::string& key) const {
    auto it = matrices.find(key);
    if (it == matrices.end()) throw data_error("container is missing matrix '" + key + "'");
    return it->second;
  }

 private:
  static void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 4);
  }
  static void write_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 8);
  }
  static void write_str(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  static std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  static std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  static std::string read_str(std::istream& is) {
    std::uint32_t len = read_u32(is);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw data_error("truncated parameter container");
    return s;
  }
};

}  // namespace fgent
