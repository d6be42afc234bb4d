// SPDX-License-Identifier: Apache-2.0
// ARR1 arrays, CSV tables, atomic file output, SHA-256 digests, minimal SVG scatter plots.
//
// ARR1 layout: "ARR1" magic, one line of JSON {"dtype","order","shape"} ending in '\n',
// then the little-endian payload (c128 interleaves re, im).
#pragma once

#include <concepts>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "phasegate/masks.hpp"
#include "phasegate/numerics.hpp"

namespace phasegate::io {

enum class DType { f64, c128, u8 };
std::string to_string(DType d);
std::size_t dtype_size(DType d);

struct Array {
  DType dtype = DType::f64;
  std::vector<std::size_t> shape;
  std::vector<double> f64;
  std::vector<cplx> c128;
  std::vector<std::uint8_t> u8;

  std::size_t count() const;
};

std::string encode_arr1(const Array& a);
Array decode_arr1(const std::string& bytes);
Array read_arr1(const std::filesystem::path& path);
void write_arr1(const std::filesystem::path& path, const Array& a);

Array from_grid(const Grid2C& g);
Array from_grid(const Grid2R& g);
Array from_mask(const Mask& m);
Array from_stack(const std::vector<Grid2C>& grids);  // shape [n, rows, cols]
// 2D arrays become one grid; 3D arrays become a stack along axis 0. Real data is promoted.
std::vector<Grid2C> to_grids(const Array& a);
Mask to_mask(const Array& a);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string sha256_hex(const std::string& bytes);

// Shortest round-trip decimal, locale independent; non-finite values print as nan/inf/-inf.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& add(const std::string& s);
  CsvWriter& add(double v);
  template <std::integral T>
  CsvWriter& add(T v) {
    return cell(std::to_string(v));
  }
  void end_row();
  std::string str() const { return out_; }

 private:
  CsvWriter& cell(const std::string& text);
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool has_fit = false;
  double slope = 0.0;
  double intercept = 0.0;
};
std::string render_svg(const ScatterPlot& plot, const std::string& timestamp_comment = "");

}  // namespace phasegate::io
