#include "monoext/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

namespace monoext {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw InvalidArgument("line " + std::to_string(line) + ": not a number: '" + std::string(field) + "'");
  return v;
}

std::vector<double> parse_row(std::string_view line, std::size_t lineno) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(parse_number(line.substr(start, comma - start), lineno));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string grid_csv(const Shape& shape, std::span<const double> values) {
  if (values.size() != shape.size()) throw LengthMismatch("values do not fill the grid " + shape.to_string());
  std::string out = "dims=" + shape.to_string() + "\n";
  const std::size_t row = shape.rank() == 1 ? shape.size() : static_cast<std::size_t>(shape.dim(shape.rank() - 1));
  for (std::size_t x = 0; x < values.size(); ++x) {
    out += format_double(values[x]);
    out += (x + 1) % row == 0 ? '\n' : ',';
  }
  return out;
}

std::string grid_csv(const GridFunction& f) { return grid_csv(f.shape(), f.values()); }

GridFunction parse_grid_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InvalidArgument("line 1: empty grid file");
  const std::string_view head = trim(lines[0]);
  if (head.substr(0, 5) != "dims=") throw InvalidArgument("line 1: expected 'dims=<d1>x<d2>...'");
  Shape shape;
  try {
    shape = Shape::parse(head.substr(5));
  } catch (const Error& e) {
    throw InvalidArgument(std::string("line 1: ") + e.what());
  }
  const std::size_t row_len = shape.rank() == 1 ? shape.size() : static_cast<std::size_t>(shape.dim(shape.rank() - 1));
  std::vector<double> values;
  values.reserve(shape.size());
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) continue;
    const auto row = parse_row(lines[l], l + 1);
    if (row.size() != row_len)
      throw InvalidArgument("line " + std::to_string(l + 1) + ": expected " + std::to_string(row_len) + " values, got " +
                            std::to_string(row.size()));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (values.size() != shape.size())
    throw InvalidArgument("grid has " + std::to_string(values.size()) + " values, dims ask for " +
                          std::to_string(shape.size()));
  return GridFunction(shape, std::move(values));
}

std::string column_csv(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += format_double(v) + "\n";
  return out;
}

std::vector<double> parse_column_csv(std::string_view text) {
  std::vector<double> out;
  const auto lines = split_lines(text);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) continue;
    out.push_back(parse_number(lines[l], l + 1));
  }
  return out;
}

QuantileTransform parse_cdf_csv(std::string_view text) {
  std::vector<double> xs, cdf;
  const auto lines = split_lines(text);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const std::string_view line = trim(lines[l]);
    if (line.empty()) continue;
    if (l == 0 && !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' || line[0] == '.')) continue;
    const auto row = parse_row(line, l + 1);
    if (row.size() != 2) throw InvalidArgument("line " + std::to_string(l + 1) + ": expected two columns");
    xs.push_back(row[0]);
    cdf.push_back(row[1]);
  }
  return QuantileTransform::tabulated(std::move(xs), std::move(cdf));
}

std::string heatmap_svg(const GridFunction& f, const HeatmapOptions& opt) {
  const Shape& shape = f.shape();
  if (shape.rank() != 2) throw InvalidArgument("heatmaps need a two-axis grid");
  const int m0 = shape.dim(0), m1 = shape.dim(1), px = opt.cell_px;
  const int margin = 4, title_h = opt.title.empty() ? 0 : 18;
  const int width = m0 * px + 2 * margin, height = m1 * px + 2 * margin + title_h;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  if (!opt.title.empty()) {
    std::string title;
    for (char c : opt.title) {
      if (c == '<') title += "&lt;";
      else if (c == '>') title += "&gt;";
      else if (c == '&') title += "&amp;";
      else title += c;
    }
    svg << "<text x=\"" << margin << "\" y=\"14\" font-family=\"sans-serif\" font-size=\"12\">" << title
        << "</text>\n";
  }
  const int top = margin + title_h;
  for (int i = 0; i < m0; ++i) {
    for (int j = 0; j < m1; ++j) {
      const double v = f.at({i, j});
      std::string fill;
      if (v <= 1e-9) {
        fill = "#ffffff";
      } else if (v >= 1.0 - 1e-9) {
        fill = "#d62728";
      } else {
        // light blue at 0 to deep blue at 1
        const int r = static_cast<int>(std::lround(198 - 190 * v));
        const int g = static_cast<int>(std::lround(219 - 171 * v));
        const int b = static_cast<int>(std::lround(239 - 82 * v));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        fill = buf;
      }
      svg << "<rect x=\"" << margin + i * px << "\" y=\"" << top + (m1 - 1 - j) * px << "\" width=\"" << px
          << "\" height=\"" << px << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  svg << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\"" << m0 * px << "\" height=\"" << m1 * px
      << "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"1\"/>\n";
  if (opt.outline && opt.outline->lo[0] <= opt.outline->hi[0] && opt.outline->lo[1] <= opt.outline->hi[1]) {
    const CellBox& b = *opt.outline;
    svg << "<rect x=\"" << margin + b.lo[0] * px << "\" y=\"" << top + (m1 - 1 - b.hi[1]) * px << "\" width=\""
        << (b.hi[0] - b.lo[0] + 1) * px << "\" height=\"" << (b.hi[1] - b.lo[1] + 1) * px
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace monoext
