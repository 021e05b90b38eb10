#include "krtv/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace krtv {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

// Cursor over PGM header tokens; '#' starts a comment running to end of line.
class PgmHeader {
 public:
  PgmHeader(const std::string& bytes, const std::string& path) : b_(bytes), path_(path) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < b_.size() && !std::isspace(static_cast<unsigned char>(b_[pos_])) && b_[pos_] != '#') {
      ++pos_;
    }
    if (start == pos_) fail("unexpected end of header");
    return b_.substr(start, pos_ - start);
  }

  unsigned long number(const char* what) {
    const std::string t = token();
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) fail(std::string("bad ") + what + " '" + t + "'");
    }
    if (t.size() > 9) fail(std::string(what) + " out of range");
    return std::stoul(t);
  }

  // The binary raster starts after exactly one whitespace byte.
  std::size_t raster_start() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      fail("missing whitespace before raster");
    }
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("PGM '" + path_ + "': " + msg);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& b_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (std::string& s : out) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

GridFunction read_pgm(const std::string& path, double spacing) {
  const std::string bytes = read_file(path);
  PgmHeader hdr(bytes, path);
  const std::string magic = hdr.token();
  if (magic != "P2" && magic != "P5") hdr.fail("unsupported magic '" + magic + "'");
  const unsigned long width = hdr.number("width");
  const unsigned long height = hdr.number("height");
  const unsigned long maxval = hdr.number("maxval");
  if (width == 0 || height == 0) hdr.fail("empty image");
  if (maxval == 0 || maxval > 65535) hdr.fail("maxval must lie in [1, 65535]");
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> values(count);

  if (magic == "P2") {
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned long v = hdr.number("sample");
      if (v > maxval) hdr.fail("sample exceeds maxval");
      values[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    const std::size_t start = hdr.raster_start();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() < start + count * bps) hdr.fail("truncated raster");
    for (std::size_t k = 0; k < count; ++k) {
      unsigned long v = static_cast<unsigned char>(bytes[start + k * bps]);
      if (bps == 2) v = (v << 8) | static_cast<unsigned char>(bytes[start + k * bps + 1]);
      if (v > maxval) hdr.fail("sample exceeds maxval");
      values[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return GridFunction(Shape::plane(height, width, spacing), std::move(values));
}

namespace {

std::vector<unsigned> pgm_levels(const GridFunction& u, PgmScaling scaling) {
  double lo = 0.0;
  double span = 1.0;
  if (scaling == PgmScaling::stretch) {
    lo = u.min();
    span = u.max() - lo;
  }
  std::vector<unsigned> levels(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    double v = span > 0.0 ? (u[k] - lo) / span : 0.0;
    v = std::clamp(v, 0.0, 1.0);
    levels[k] = static_cast<unsigned>(std::floor(v * 255.0 + 0.5));
  }
  return levels;
}

}  // namespace

void write_pgm(const std::string& path, const GridFunction& u, PgmScaling scaling) {
  const Shape& s = u.shape();
  std::string bytes = "P5\n" + std::to_string(s.width()) + " " + std::to_string(s.height()) + "\n255\n";
  for (unsigned v : pgm_levels(u, scaling)) bytes += static_cast<char>(v);
  write_file(path, bytes);
}

GridFunction quantize_8bit(const GridFunction& u, PgmScaling scaling) {
  GridFunction q(u.shape());
  const std::vector<unsigned> levels = pgm_levels(u, scaling);
  for (std::size_t k = 0; k < u.size(); ++k) q[k] = levels[k] / 255.0;
  return q;
}

Signal read_signal(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> xs, vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    double x = 0.0, v = 0.0;
    if (!(ls >> b) || (ls >> extra) || !parse_double(a, x) || !parse_double(b, v)) {
      throw ParseError("signal '" + path + "' line " + std::to_string(lineno) +
                       ": expected two numeric columns");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.empty()) throw ParseError("signal '" + path + "' has no samples");
  double h = 1.0;
  if (xs.size() > 1) {
    h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    if (!(h > 0.0)) throw ParseError("signal '" + path + "': x must be strictly increasing");
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double step = xs[i] - xs[i - 1];
      if (!(step > 0.0)) throw ParseError("signal '" + path + "': x must be strictly increasing");
      if (std::abs(step - h) > 1e-6 * h + 1e-9 * std::abs(xs[i])) {
        throw ParseError("signal '" + path + "': x is not uniformly spaced near sample " +
                         std::to_string(i));
      }
    }
  }
  const Shape shape = Shape::line(vs.size(), h);
  return Signal{GridFunction(shape, std::move(vs)), xs.front()};
}

void write_signal(const std::string& path, const Signal& s) {
  if (s.values.shape().dim() != 1) throw ShapeMismatch("write_signal needs a 1D grid function");
  std::string out;
  const double h = s.values.shape().spacing();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    double x = s.x(i);
    // Cancellation residue near the origin would print as e.g. -1.1e-16.
    if (std::abs(x) <= 1e-9 * h) x = 0.0;
    out += format_number(x) + " " + format_number(s.values[i]) + "\n";
  }
  write_file(path, out);
}

DiscreteMeasure read_points(const std::string& path) {
  std::istringstream in(read_file(path));
  DiscreteMeasure mu;
  std::string line;
  int lineno = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = split_fields(line, ',');
    std::vector<double> nums(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c) numeric = numeric && parse_double(fields[c], nums[c]);
    if (!numeric) {
      if (columns == 0 && mu.size() == 0 && lineno == 1) continue;
      throw ParseError("points '" + path + "' line " + std::to_string(lineno) + ": not numeric");
    }
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError("points '" + path + "' line " + std::to_string(lineno) +
                       ": expected x,weight or x,y,weight");
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw ParseError("points '" + path + "' line " + std::to_string(lineno) +
                       ": inconsistent column count");
    }
    mu.points.emplace_back(nums.begin(), nums.end() - 1);
    mu.weights.push_back(nums.back());
  }
  if (mu.size() == 0) throw ParseError("points '" + path + "' has no rows");
  mu.validate();
  return mu;
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = p;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["final_gap"] = final_gap;
  j["objective"] = objective;
  j["mass_in"] = mass_in;
  j["mass_out"] = mass_out;
  j["wall_time_ms"] = wall_time_ms;
  j["outputs"] = outputs;
  return j.dump();
}

void append_report(const std::string& path, const RunReport& report) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open report file '" + path + "'");
  out << report.to_json() << '\n';
}

}  // namespace krtv
