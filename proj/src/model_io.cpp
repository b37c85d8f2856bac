#include "dfpc/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dfpc/dataset_io.hpp"

namespace dfpc {

void write_model(std::ostream& os, const UnfoldedModel& model) {
  os << "magic=DFPC-MODEL\n"
     << "version=1\n"
     << "variant=" << to_string(model.variant()) << "\n"
     << "layers=" << model.depth() << "\n"
     << "n=" << model.n() << "\n"
     << "m=" << model.m() << "\n"
     << "tied=" << (model.tied() ? 1 : 0) << "\n\n";
  for (const auto& p : model.parameter_sets()) {
    io::write_f64(os, p.a.flat());
    io::write_f64(os, p.bbar.flat());
    io::write_f64(os, std::span<const double>(&p.nu, 1));
  }
  if (!os) throw FormatError("write_model: stream error");
}

UnfoldedModel read_model(std::istream& is) {
  const auto h = io::read_header(is);
  if (io::header_str(h, "magic") != "DFPC-MODEL") throw FormatError("not a DFPC-MODEL file");
  if (io::header_uint(h, "version") != 1) throw FormatError("unsupported DFPC-MODEL version");
  const Variant variant = parse_variant(io::header_str(h, "variant"));
  const std::size_t depth = io::header_uint(h, "layers"), n = io::header_uint(h, "n"),
                    m = io::header_uint(h, "m");
  const std::uint64_t tied = io::header_uint(h, "tied");
  if (tied > 1) throw FormatError("tied must be 0 or 1");
  if (depth == 0 || n == 0 || m == 0) throw FormatError("DFPC-MODEL dimensions are empty");

  std::vector<LayerParams> sets(tied ? 1 : depth);
  for (auto& p : sets) {
    p.a = Matrix(n, m);
    p.bbar = Matrix(m, n);
    io::read_f64(is, p.a.flat());
    io::read_f64(is, p.bbar.flat());
    io::read_f64(is, std::span<double>(&p.nu, 1));
  }
  return UnfoldedModel(variant, depth, tied == 1, std::move(sets));
}

void write_model(const std::filesystem::path& path, const UnfoldedModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_model(os, model);
}

UnfoldedModel read_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path.string() + "'");
  return read_model(is);
}

}  // namespace dfpc
