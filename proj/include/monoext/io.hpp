#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoext/gridfn.hpp"

namespace monoext {

// 17 significant digits, locale independent; "0" for both zeros.
std::string format_double(double v);

// Header "dims=<d1>x<d2>...", then one line per run of the last axis (rank 1
// is a single line), row-major overall.
std::string grid_csv(const GridFunction& f);
// Same layout for arrays that are not restricted to [0, 1], such as transfers.
std::string grid_csv(const Shape& shape, std::span<const double> values);
// Throws InvalidArgument with a line number on malformed input.
GridFunction parse_grid_csv(std::string_view text);

// One value per line.
std::string column_csv(const std::vector<double>& values);
std::vector<double> parse_column_csv(std::string_view text);

// Two columns "x,G(x)" per line, optional header line.
QuantileTransform parse_cdf_csv(std::string_view text);

struct CellBox {
  int lo[2] = {0, 0};
  int hi[2] = {-1, -1};  // inclusive
};

struct HeatmapOptions {
  int cell_px = 12;
  std::string title;
  std::optional<CellBox> outline;
};
// Axis 0 runs left to right, axis 1 bottom to top. 0 is white, 1 is red and
// anything strictly between is a shade of blue (darker for larger values).
std::string heatmap_svg(const GridFunction& f, const HeatmapOptions& opt = {});

std::string read_text_file(const std::string& path);

}  // namespace monoext
