#pragma once

// DFPC-MODEL v1 weight files.
//
//   magic=DFPC-MODEL
//   version=1
//   variant=l1|l2
//   layers=<R>
//   n=<N>
//   m=<M>
//   tied=0|1
//   <blank line>
//   per parameter set: A (n x m) row-major, Bbar (m x n) row-major, nu,
//   all little-endian float64. Untied models store R sets, tied models one.

#include <filesystem>
#include <iosfwd>

#include "dfpc/unfolded.hpp"

namespace dfpc {

void write_model(std::ostream& os, const UnfoldedModel& model);
UnfoldedModel read_model(std::istream& is);

void write_model(const std::filesystem::path& path, const UnfoldedModel& model);
UnfoldedModel read_model(const std::filesystem::path& path);

}  // namespace dfpc
