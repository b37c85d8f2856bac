#include "dfpc/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace dfpc {
namespace io {

std::map<std::string, std::string> read_header(std::istream& is) {
  std::map<std::string, std::string> h;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) return h;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header line '" + line + "'");
    h[line.substr(0, eq)] = line.substr(eq + 1);
  }
  throw FormatError("header not terminated by a blank line");
}

const std::string& header_str(const std::map<std::string, std::string>& h,
                              const std::string& key) {
  const auto it = h.find(key);
  if (it == h.end()) throw FormatError("header missing key '" + key + "'");
  return it->second;
}

std::uint64_t header_uint(const std::map<std::string, std::string>& h, const std::string& key) {
  const std::string& s = header_str(h, key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("header key '" + key + "' is not an unsigned integer: '" + s + "'");
  return v;
}

namespace {
std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
}
}  // namespace

void write_f64(std::ostream& os, std::span<const double> values) {
  std::vector<char> buf(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(buf.data() + 8 * i, &bits, 8);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_f64(std::istream& is, std::span<double> values) {
  std::vector<char> buf(values.size() * 8);
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size())
    throw FormatError("payload truncated");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf.data() + 8 * i, 8);
    values[i] = std::bit_cast<double>(to_le(bits));
  }
}

}  // namespace io

void write_dataset(std::ostream& os, const ProblemInstance& inst) {
  const std::size_t n = inst.n(), m = inst.m(), l = inst.signals.count();
  if (!inst.measurements.has_pre_quant())
    throw InvalidState("write_dataset: measurements lack pre-quantization values");
  require_shape(inst.signals.values, l, n, "write_dataset signals");
  require_shape(inst.measurements.signs, l, m, "write_dataset signs");
  os << "magic=DFPC-DATA\n"
     << "version=1\n"
     << "n=" << n << "\n"
     << "m=" << m << "\n"
     << "k=" << inst.signals.k << "\n"
     << "l=" << l << "\n"
     << "seed=" << inst.seed << "\n\n";
  io::write_f64(os, inst.phi.flat());
  // Batches are stored one sample per row, which is the column-major layout.
  io::write_f64(os, inst.signals.values.flat());
  io::write_f64(os, inst.measurements.pre_quant.flat());
  std::vector<char> signs(m * l);
  auto s = inst.measurements.signs.flat();
  for (std::size_t i = 0; i < s.size(); ++i) signs[i] = static_cast<char>(s[i] > 0 ? 1 : -1);
  os.write(signs.data(), static_cast<std::streamsize>(signs.size()));
  if (!os) throw FormatError("write_dataset: stream error");
}

ProblemInstance read_dataset(std::istream& is) {
  const auto h = io::read_header(is);
  if (io::header_str(h, "magic") != "DFPC-DATA") throw FormatError("not a DFPC-DATA file");
  if (io::header_uint(h, "version") != 1) throw FormatError("unsupported DFPC-DATA version");
  const std::size_t n = io::header_uint(h, "n"), m = io::header_uint(h, "m"),
                    k = io::header_uint(h, "k"), l = io::header_uint(h, "l");
  if (n == 0 || m == 0 || l == 0 || k == 0 || k > n)
    throw FormatError("DFPC-DATA header dimensions are inconsistent");

  ProblemInstance inst;
  inst.seed = io::header_uint(h, "seed");
  inst.phi = Matrix(m, n);
  io::read_f64(is, inst.phi.flat());
  inst.signals.n = n;
  inst.signals.k = k;
  inst.signals.values = Matrix(l, n);
  io::read_f64(is, inst.signals.values.flat());
  inst.signals.supports.resize(l);
  for (std::size_t j = 0; j < l; ++j) {
    const auto x = inst.signals.values.row(j);
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] != 0.0) inst.signals.supports[j].push_back(i);
  }
  inst.measurements.pre_quant = Matrix(l, m);
  io::read_f64(is, inst.measurements.pre_quant.flat());
  std::vector<char> signs(m * l);
  is.read(signs.data(), static_cast<std::streamsize>(signs.size()));
  if (static_cast<std::size_t>(is.gcount()) != signs.size())
    throw FormatError("sign payload truncated");
  inst.measurements.signs = Matrix(l, m);
  auto s = inst.measurements.signs.flat();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (signs[i] != 1 && signs[i] != -1) throw FormatError("sign byte outside {-1, +1}");
    s[i] = signs[i];
  }
  return inst;
}

void write_dataset(const std::filesystem::path& path, const ProblemInstance& inst) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_dataset(os, inst);
}

ProblemInstance read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path.string() + "'");
  return read_dataset(is);
}

}  // namespace dfpc
