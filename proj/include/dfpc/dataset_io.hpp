#pragma once

// DFPC-DATA v1 dataset files.
//
//   magic=DFPC-DATA
//   version=1
//   n=<N>  m=<M>  k=<K>  l=<L>  seed=<seed>   (one key per line)
//   <blank line>
//   payload, little-endian:
//     Phi        float64 row-major      (M*N)
//     X          float64 column-major   (N*L)
//     pre_quant  float64 column-major   (M*L)
//     signs      int8                   (M*L, column-major)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "dfpc/model_core.hpp"

namespace dfpc {

void write_dataset(const std::filesystem::path& path, const ProblemInstance& inst);
ProblemInstance read_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& os, const ProblemInstance& inst);
ProblemInstance read_dataset(std::istream& is);

namespace io {

// key=value header terminated by an empty line.
std::map<std::string, std::string> read_header(std::istream& is);
std::uint64_t header_uint(const std::map<std::string, std::string>& h, const std::string& key);
const std::string& header_str(const std::map<std::string, std::string>& h,
                              const std::string& key);

void write_f64(std::ostream& os, std::span<const double> values);
void read_f64(std::istream& is, std::span<double> values);

}  // namespace io
}  // namespace dfpc
