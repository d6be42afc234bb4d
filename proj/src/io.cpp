// SPDX-License-Identifier: Apache-2.0
#include "phasegate/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <unistd.h>

namespace phasegate::io {

using nlohmann::json;

std::string to_string(DType d) {
  switch (d) {
    case DType::f64: return "f64";
    case DType::c128: return "c128";
    case DType::u8: return "u8";
  }
  return "?";
}

std::size_t dtype_size(DType d) {
  switch (d) {
    case DType::f64: return 8;
    case DType::c128: return 16;
    case DType::u8: return 1;
  }
  return 0;
}

std::size_t Array::count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char b[8];
  std::memcpy(b, &bits, 8);
  out.append(b, 8);
}

double get_f64(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

DType dtype_from_string(const std::string& s) {
  if (s == "f64") return DType::f64;
  if (s == "c128") return DType::c128;
  if (s == "u8") return DType::u8;
  throw IoError("ARR1: unsupported dtype '" + s + "'");
}

}  // namespace

std::string encode_arr1(const Array& a) {
  const std::size_t n = a.count();
  const std::size_t have = a.dtype == DType::f64 ? a.f64.size() : a.dtype == DType::c128 ? a.c128.size() : a.u8.size();
  if (have != n) throw ParameterError("ARR1: payload does not match the shape");
  json header = {{"dtype", to_string(a.dtype)}, {"shape", a.shape}, {"order", "row-major"}};
  std::string out = "ARR1" + header.dump() + "\n";
  out.reserve(out.size() + n * dtype_size(a.dtype));
  switch (a.dtype) {
    case DType::f64:
      for (double v : a.f64) put_f64(out, v);
      break;
    case DType::c128:
      for (const auto& v : a.c128) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
      }
      break;
    case DType::u8:
      out.append(reinterpret_cast<const char*>(a.u8.data()), a.u8.size());
      break;
  }
  return out;
}

Array decode_arr1(const std::string& bytes) {
  if (bytes.size() < 5 || bytes.compare(0, 4, "ARR1") != 0) throw IoError("ARR1: bad magic");
  const auto nl = bytes.find('\n', 4);
  if (nl == std::string::npos) throw IoError("ARR1: header is not newline-terminated");
  Array a;
  try {
    const json h = json::parse(bytes.substr(4, nl - 4));
    a.dtype = dtype_from_string(h.at("dtype").get<std::string>());
    if (h.at("order").get<std::string>() != "row-major") throw IoError("ARR1: only row-major order is supported");
    a.shape = h.at("shape").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw IoError(std::string("ARR1: malformed header: ") + e.what());
  }
  if (a.shape.empty()) throw IoError("ARR1: empty shape");
  std::size_t n = 1;
  for (auto s : a.shape) {
    if (s != 0 && n > SIZE_MAX / s) throw IoError("ARR1: shape overflows");
    n *= s;
  }
  const std::size_t payload = bytes.size() - nl - 1;
  if (n > SIZE_MAX / dtype_size(a.dtype) || payload != n * dtype_size(a.dtype))
    throw IoError("ARR1: payload length " + std::to_string(payload) + " does not match the shape");
  const char* p = bytes.data() + nl + 1;
  switch (a.dtype) {
    case DType::f64:
      a.f64.resize(n);
      for (std::size_t i = 0; i < n; ++i) a.f64[i] = get_f64(p + 8 * i);
      break;
    case DType::c128:
      a.c128.resize(n);
      for (std::size_t i = 0; i < n; ++i) a.c128[i] = {get_f64(p + 16 * i), get_f64(p + 16 * i + 8)};
      break;
    case DType::u8:
      a.u8.assign(reinterpret_cast<const std::uint8_t*>(p), reinterpret_cast<const std::uint8_t*>(p) + n);
      break;
  }
  return a;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

Array read_arr1(const std::filesystem::path& path) { return decode_arr1(read_file(path)); }
void write_arr1(const std::filesystem::path& path, const Array& a) { write_atomic(path, encode_arr1(a)); }

Array from_grid(const Grid2C& g) {
  Array a;
  a.dtype = DType::c128;
  a.shape = {g.rows(), g.cols()};
  a.c128 = g.data();
  return a;
}

Array from_grid(const Grid2R& g) {
  Array a;
  a.dtype = DType::f64;
  a.shape = {g.rows(), g.cols()};
  a.f64 = g.data();
  return a;
}

Array from_mask(const Mask& m) {
  Array a;
  a.dtype = DType::u8;
  a.shape = {m.rows(), m.cols()};
  a.u8 = m.grid().data();
  return a;
}

Array from_stack(const std::vector<Grid2C>& grids) {
  if (grids.empty()) throw ParameterError("empty stack");
  Array a;
  a.dtype = DType::c128;
  a.shape = {grids.size(), grids.front().rows(), grids.front().cols()};
  for (const auto& g : grids) {
    if (!g.same_shape(grids.front())) throw ParameterError("stack grids differ in shape");
    a.c128.insert(a.c128.end(), g.data().begin(), g.data().end());
  }
  return a;
}

std::vector<Grid2C> to_grids(const Array& a) {
  if (a.shape.size() != 2 && a.shape.size() != 3) throw IoError("expected a 2D or 3D array");
  const std::size_t n = a.shape.size() == 3 ? a.shape[0] : 1;
  const std::size_t rows = a.shape[a.shape.size() - 2], cols = a.shape.back();
  if (n == 0 || rows == 0 || cols == 0) throw IoError("array has an empty axis");
  std::vector<Grid2C> out;
  for (std::size_t s = 0; s < n; ++s) {
    Grid2C g(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const std::size_t j = s * rows * cols + i;
      switch (a.dtype) {
        case DType::f64: g[i] = a.f64[j]; break;
        case DType::c128: g[i] = a.c128[j]; break;
        case DType::u8: g[i] = static_cast<double>(a.u8[j]); break;
      }
      if (!std::isfinite(g[i].real()) || !std::isfinite(g[i].imag())) throw IoError("array contains non-finite values");
    }
    out.push_back(std::move(g));
  }
  return out;
}

Mask to_mask(const Array& a) {
  if (a.dtype != DType::u8 || a.shape.size() != 2) throw IoError("mask must be a 2D u8 array");
  return Mask(Grid2<std::uint8_t>(a.shape[0], a.shape[1], a.u8));
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // fold -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// --- CSV -------------------------------------------------------------------

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (in_row_ == columns_) throw Error("CSV row has too many cells");
  if (in_row_ > 0) out_ += ',';
  if (text.find_first_of(",\"\n") != std::string::npos) {
    out_ += '"';
    for (char c : text) {
      if (c == '"') out_ += '"';
      out_ += c;
    }
    out_ += '"';
  } else {
    out_ += text;
  }
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::add(const std::string& s) { return cell(s); }
CsvWriter& CsvWriter::add(double v) { return cell(format_double(v)); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error("CSV row has too few cells");
  out_ += '\n';
  in_row_ = 0;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) throw IoError("CSV row width differs from the header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw IoError("CSV is empty");
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParameterError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) {
    double v = 0.0;
    const auto& s = r[c];
    if (s == "nan") {
      v = std::nan("");
    } else if (s == "inf" || s == "-inf") {
      v = s[0] == '-' ? -INFINITY : INFINITY;
    } else {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParameterError("CSV column '" + name + "' has a non-numeric value '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

// --- SVG -------------------------------------------------------------------

namespace {

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string render_svg(const ScatterPlot& plot, const std::string& timestamp_comment) {
  constexpr double W = 480, H = 360, L = 60, R = 20, T = 30, B = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < plot.xs.size() && i < plot.ys.size(); ++i)
    if (std::isfinite(plot.xs[i]) && std::isfinite(plot.ys[i])) pts.emplace_back(plot.xs[i], plot.ys[i]);
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  if (!timestamp_comment.empty()) s << "<!-- " << esc(timestamp_comment) << " -->\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(plot.title) << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\" font-size=\"10\">" << fixed(x0, 3) << "</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(x1, 3)
    << "</text>\n";
  s << "<text x=\"" << L - 5 << "\" y=\"" << H - B << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(y0, 3)
    << "</text>\n";
  s << "<text x=\"" << L - 5 << "\" y=\"" << T + 10 << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(y1, 3)
    << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << esc(plot.x_label) << "</text>\n";
  s << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
    << (T + H - B) / 2 << ")\">" << esc(plot.y_label) << "</text>\n";
  for (auto [x, y] : pts)
    s << "<circle cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  if (plot.has_fit) {
    s << "<line x1=\"" << fixed(px(x0)) << "\" y1=\"" << fixed(py(plot.intercept + plot.slope * x0)) << "\" x2=\""
      << fixed(px(x1)) << "\" y2=\"" << fixed(py(plot.intercept + plot.slope * x1))
      << "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace phasegate::io
