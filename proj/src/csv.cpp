#include <fstream>

#include "dfpc/error.hpp"
#include "dfpc/experiments.hpp"

namespace dfpc {
namespace {

std::ofstream open_csv(const std::filesystem::path& path, bool append = false) {
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw FormatError("cannot write '" + path.string() + "'");
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw FormatError("write error on '" + path.string() + "'");
}

}  // namespace

void write_samples_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto os = open_csv(path);
  os << "experiment,method,sweep_param,sweep_value,seed,sample_index,nmse_db\n";
  for (const auto& row : r.rows)
    for (std::size_t i = 0; i < row.per_sample_db.size(); ++i)
      os << r.experiment << ',' << row.method << ',' << row.sweep_param << ','
         << format_double(row.sweep_value) << ',' << r.seed << ',' << i << ','
         << format_double(clamp_nmse(row.per_sample_db[i])) << '\n';
  finish(os, path);
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto os = open_csv(path);
  os << "experiment,method,sweep_param,sweep_value,seed,mean_nmse_db,n_samples\n";
  for (const auto& row : r.rows)
    os << r.experiment << ',' << row.method << ',' << row.sweep_param << ','
       << format_double(row.sweep_value) << ',' << r.seed << ',' << format_double(row.mean_db)
       << ',' << row.per_sample_db.size() << '\n';
  finish(os, path);
}

void write_table1_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto os = open_csv(path);
  os << "depth,fpc_l2_nmse_db,deepfpc_l2_nmse_db\n";
  for (const auto& row : r.rows) {
    if (row.method != "FPC-l2") continue;
    os << format_double(row.sweep_value) << ',' << format_double(row.mean_db) << ',';
    for (const auto& other : r.rows)
      if (other.method == "DeepFPC-l2" && other.sweep_value == row.sweep_value)
        os << format_double(other.mean_db);
    os << '\n';
  }
  finish(os, path);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<TrainRecord>& h,
                       bool append) {
  const bool header = !append || !std::filesystem::exists(path) ||
                      std::filesystem::file_size(path) == 0;
  auto os = open_csv(path, append);
  if (header) os << "step,epoch,effective_lr,train_loss,val_nmse_db\n";
  for (const auto& rec : h)
    os << rec.step << ',' << rec.epoch << ',' << format_double(rec.effective_lr) << ','
       << format_double(rec.train_loss) << ',' << format_double(rec.val_nmse_db) << '\n';
  finish(os, path);
}

}  // namespace dfpc
