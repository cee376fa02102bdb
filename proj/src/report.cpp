#include "ifspec/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace ifspec::report {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double signed_db(double x) {
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return std::copysign(to_db(std::abs(x)), x);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Stamp& stamp, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  buffer_ += "# config_hash=" + stamp.config_hash + " seed=" + std::to_string(stamp.seed);
  if (!stamp.scenario.empty()) buffer_ += " scenario=" + stamp.scenario;
  buffer_ += "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) buffer_ += (i ? "," : "") + columns[i];
  buffer_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> s;
  s.reserve(values.size());
  for (double v : values) s.push_back(fmt(v));
  row(s);
}

void CsvWriter::row(const std::vector<std::string>& values) {
  if (values.size() != columns_) throw std::logic_error("CSV row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < values.size(); ++i) buffer_ += (i ? "," : "") + values[i];
  buffer_ += "\n";
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  write_text(path_, buffer_);
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_field_csv(const std::filesystem::path& path, const pulse::PulseField& field, const Stamp& stamp) {
  CsvWriter w(path, stamp, {"t_s", "re", "im"});
  for (std::size_t i = 0; i < field.size(); ++i)
    w.row(std::vector<double>{field.time(i), field.samples[i].real(), field.samples[i].imag()});
  w.close();
}

void write_spectrum_csv(const std::filesystem::path& path, const RVector& freqs, const RVector& power,
                        const Stamp& stamp) {
  CsvWriter w(path, stamp, {"f_Hz", "magnitude2"});
  for (std::size_t i = 0; i < freqs.size(); ++i) w.row(std::vector<double>{freqs[i], power[i]});
  w.close();
}

void write_stream_csv(const std::filesystem::path& path, const shaping::ShapedBlockStream& stream,
                      const shaping::Constellation& c, const Stamp& stamp, std::size_t max_blocks) {
  CsvWriter w(path, stamp, {"block", "symbols", "block_energy"});
  const std::size_t blocks = max_blocks ? std::min(max_blocks, stream.block_count()) : stream.block_count();
  for (std::size_t k = 0; k < blocks; ++k) {
    std::string syms;
    double e = 0.0;
    for (int s : stream.block(k)) {
      syms += (syms.empty() ? "" : " ") + std::to_string(s);
      e += std::norm(c.points[static_cast<std::size_t>(s)]);
    }
    w.row(std::vector<std::string>{std::to_string(k), syms, fmt(e)});
  }
  w.close();
}

void write_decomposition_csv(const std::filesystem::path& path, const psd::PsdDecomposition& d,
                             const std::vector<std::pair<std::string, const psd::PsdCurve*>>& extra,
                             const Stamp& stamp) {
  std::vector<std::string> cols{"f_Hz", "total_dB", "self_dB", "shaping_dB_signed", "neighbor_dB"};
  for (const auto& [name, curve] : extra) cols.push_back(name + "_dB");
  CsvWriter w(path, stamp, cols);
  for (std::size_t i = 0; i < d.freqs.size(); ++i) {
    std::vector<double> r{d.freqs[i], signed_db(d.total[i]), signed_db(d.self_beating[i]),
                          signed_db(d.shaping_correction[i]), signed_db(d.neighbor_beating[i])};
    for (const auto& [name, curve] : extra) r.push_back(signed_db(curve->values.at(i)));
    w.row(r);
  }
  w.close();
}

void write_lines_csv(const std::filesystem::path& path, const std::vector<psd::SpectralLine>& lines,
                     const Stamp& stamp) {
  CsvWriter w(path, stamp, {"f_Hz", "weight"});
  for (const auto& l : lines) w.row(std::vector<double>{l.frequency, l.weight});
  w.close();
}

}  // namespace ifspec::report
