#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ifspec/block_stream.hpp"
#include "ifspec/psd_model.hpp"
#include "ifspec/pulsefield.hpp"

namespace ifspec::report {

/// Provenance stamped on every output file.
struct Stamp {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scenario;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// Shortest round-trip text for a double.
std::string fmt(double v);

/// 10 log10 |x| with the sign of x kept; zero maps to -inf text "-inf".
double signed_db(double x);

class CsvWriter {
 public:
  /// Buffers rows; close() writes the file and reports errors. A writer
  /// destroyed without close() still writes, silently.
  CsvWriter(const std::filesystem::path& path, const Stamp& stamp, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& values);
  void close();

 private:
  bool closed_ = false;
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t columns_;
};

/// t, Re, Im rows.
void write_field_csv(const std::filesystem::path& path, const pulse::PulseField& field, const Stamp& stamp);

/// f, |X|^2 rows over an ascending grid.
void write_spectrum_csv(const std::filesystem::path& path, const RVector& freqs, const RVector& power,
                        const Stamp& stamp);

/// block index, symbol indices, block energy.
void write_stream_csv(const std::filesystem::path& path, const shaping::ShapedBlockStream& stream,
                      const shaping::Constellation& c, const Stamp& stamp, std::size_t max_blocks = 0);

/// f, total, self, signed shaping, neighbor (all dB) plus extra named curves.
void write_decomposition_csv(const std::filesystem::path& path, const psd::PsdDecomposition& d,
                             const std::vector<std::pair<std::string, const psd::PsdCurve*>>& extra,
                             const Stamp& stamp);

void write_lines_csv(const std::filesystem::path& path, const std::vector<psd::SpectralLine>& lines,
                     const Stamp& stamp);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ifspec::report
