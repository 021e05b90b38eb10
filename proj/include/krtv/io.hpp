#pragma once

// File formats: PGM images (P2/P5), two-column signal files, point-measure
// CSV and JSON run reports.

#include <map>
#include <string>
#include <vector>

#include "krtv/grid.hpp"

namespace krtv {

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Reads a P2 or P5 image with maxval <= 65535; samples become value / maxval.
GridFunction read_pgm(const std::string& path, double spacing = 1.0);

enum class PgmScaling {
  /// Clamp to [0, 1].
  clamp,
  /// Map [min, max] affinely onto [0, 1]; constant images map to 0.
  stretch,
};

/// Writes binary P5 with maxval 255, rounding v * 255 half-up.
void write_pgm(const std::string& path, const GridFunction& u,
               PgmScaling scaling = PgmScaling::clamp);

/// Quantizes to the 8-bit levels write_pgm would store, as values in [0, 1].
GridFunction quantize_8bit(const GridFunction& u, PgmScaling scaling = PgmScaling::clamp);

struct Signal {
  GridFunction values;
  /// x coordinate of the first sample.
  double origin = 0.0;

  double x(std::size_t i) const { return origin + static_cast<double>(i) * values.shape().spacing(); }
};

/// Two whitespace-separated columns "x value"; x must be uniform and
/// strictly increasing. Blank lines and '#' comments are skipped.
Signal read_signal(const std::string& path);
void write_signal(const std::string& path, const Signal& s);

/// CSV rows "x,weight" or "x,y,weight"; a non-numeric first row is a header.
DiscreteMeasure read_points(const std::string& path);

struct RunReport {
  std::string command;
  std::map<std::string, std::string> params;
  int iterations = 0;
  double final_gap = 0.0;
  double objective = 0.0;
  double mass_in = 0.0;
  double mass_out = 0.0;
  double wall_time_ms = 0.0;
  bool converged = false;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

/// Appends the report as one JSON line.
void append_report(const std::string& path, const RunReport& report);

/// Formats with %.9g; used wherever output must be byte-stable.
std::string format_number(double v);

}  // namespace krtv
