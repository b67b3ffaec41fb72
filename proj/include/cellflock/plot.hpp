#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cellflock/metrics.hpp"

namespace cellflock {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  double number(std::size_t row, std::size_t col) const {
    try {
      return std::stod(rows[row][col]);
    } catch (const std::exception&) {
      return std::nan("");
    }
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      cells.resize(t.header.size());
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

namespace detail {

// Minimal SVG canvas with a single data viewport.
class Svg {
 public:
  Svg(double width, double height) : w_(width), h_(height) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_
        << "\" height=\"" << h_ << "\" viewBox=\"0 0 " << w_ << " " << h_
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void set_viewport(double x0, double x1, double y0, double y1, double ml,
                    double mr, double mt, double mb) {
    x0_ = x0; x1_ = x1; y0_ = y0; y1_ = y1;
    ml_ = ml; mr_ = mr; mt_ = mt; mb_ = mb;
    if (x1_ == x0_) x1_ = x0_ + 1.0;
    if (y1_ == y0_) y1_ = y0_ + 1.0;
  }

  double px(double x) const {
    return ml_ + (x - x0_) / (x1_ - x0_) * (w_ - ml_ - mr_);
  }
  double py(double y) const {
    return h_ - mb_ - (y - y0_) / (y1_ - y0_) * (h_ - mt_ - mb_);
  }

  void axes(const std::string& xlabel, const std::string& ylabel) {
    os_ << "<rect x=\"" << ml_ << "\" y=\"" << mt_ << "\" width=\""
        << w_ - ml_ - mr_ << "\" height=\"" << h_ - mt_ - mb_
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    text(ml_, h_ - mb_ + 16, fmt(x0_));
    text(w_ - mr_ - 30, h_ - mb_ + 16, fmt(x1_));
    text(4, h_ - mb_, fmt(y0_));
    text(4, mt_ + 12, fmt(y1_));
    text((ml_ + w_ - mr_) / 2, h_ - 6, xlabel);
    text(4, mt_ - 6, ylabel);
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color) {
    os_ << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(y[i])) continue;
      os_ << px(x[i]) << "," << py(y[i]) << " ";
    }
    os_ << "\"/>\n";
  }

  void band(const std::vector<double>& x, const std::vector<double>& lo,
            const std::vector<double>& hi, const std::string& color) {
    os_ << "<polygon fill=\"" << color << "\" fill-opacity=\"0.3\" "
        << "stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isnan(lo[i])) os_ << px(x[i]) << "," << py(lo[i]) << " ";
    }
    for (std::size_t i = x.size(); i-- > 0;) {
      if (!std::isnan(hi[i])) os_ << px(x[i]) << "," << py(hi[i]) << " ";
    }
    os_ << "\"/>\n";
  }

  void cell(double x, double y, double w, double h, const std::string& color) {
    os_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
        << "\" height=\"" << h << "\" fill=\"" << color << "\"/>\n";
  }

  void bar(double x, double y_top, double w, const std::string& color) {
    os_ << "<rect x=\"" << px(x) << "\" y=\"" << py(y_top) << "\" width=\""
        << w << "\" height=\"" << (py(y0_) - py(y_top)) << "\" fill=\"" << color
        << "\"/>\n";
  }

  void text(double x, double y, const std::string& s) {
    os_ << "<text x=\"" << x << "\" y=\"" << y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s
        << "</text>\n";
  }

  void save(const std::filesystem::path& path) {
    std::ofstream(path) << os_.str() << "</svg>\n";
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

 private:
  double w_, h_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  double ml_ = 50, mr_ = 15, mt_ = 25, mb_ = 35;
  std::ostringstream os_;
};

inline std::string heat_color(double v) {
  // 0 -> dark blue, 1 -> yellow
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(255 * v);
  const int g = static_cast<int>(220 * v);
  const int b = static_cast<int>(130 * (1.0 - v) + 30);
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace detail

// One band plot (quartile band + median line) per metric of an aggregates
// table with a single numeric axis.
inline std::vector<std::filesystem::path> plot_bands(
    const CsvTable& agg, const std::string& axis,
    const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto xcol = agg.column(axis);
  if (!xcol) {
    std::cerr << "[cellflock] plot: missing column '" << axis << "', skipping\n";
    return written;
  }
  for (const std::string metric : {"tail_phi", "tail_vbar", "tail_phi_rot"}) {
    const auto q1c = agg.column(metric + "_q1");
    const auto q2c = agg.column(metric + "_median");
    const auto q3c = agg.column(metric + "_q3");
    if (!q1c || !q2c || !q3c) {
      std::cerr << "[cellflock] plot: missing quartiles for " << metric
                << ", skipping\n";
      continue;
    }
    std::vector<double> x, q1, q2, q3;
    for (std::size_t r = 0; r < agg.rows.size(); ++r) {
      x.push_back(agg.number(r, *xcol));
      q1.push_back(agg.number(r, *q1c));
      q2.push_back(agg.number(r, *q2c));
      q3.push_back(agg.number(r, *q3c));
    }
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const auto perm = [&](std::vector<double>& v) {
      std::vector<double> out;
      for (const std::size_t i : order) out.push_back(v[i]);
      v = std::move(out);
    };
    perm(x); perm(q1); perm(q2); perm(q3);

    double ylo = 0.0, yhi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isnan(q1[i])) ylo = std::min(ylo, q1[i]);
      if (!std::isnan(q3[i])) yhi = std::max(yhi, q3[i]);
    }
    detail::Svg svg(480, 320);
    svg.set_viewport(x.front(), x.back(), ylo, std::max(yhi, 1.0), 50, 15, 25, 35);
    svg.band(x, q1, q3, "steelblue");
    svg.polyline(x, q2, "steelblue");
    svg.axes(axis, metric);
    const fs::path out = out_dir / ("band_" + metric + ".svg");
    svg.save(out);
    written.push_back(out);

    std::ofstream csv(out_dir / ("band_" + metric + ".csv"));
    csv << axis << ",q1,median,q3\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
      csv << x[i] << "," << q1[i] << "," << q2[i] << "," << q3[i] << "\n";
    }
  }
  return written;
}

// Heatmap of the per-point means over two numeric axes.
inline std::vector<std::filesystem::path> plot_heatmaps(
    const CsvTable& agg, const std::string& ax, const std::string& ay,
    const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto xc = agg.column(ax), yc = agg.column(ay);
  if (!xc || !yc) {
    std::cerr << "[cellflock] plot: missing axis columns, skipping heatmap\n";
    return written;
  }
  for (const std::string metric : {"tail_phi", "tail_vbar", "tail_phi_rot"}) {
    const auto mc = agg.column(metric + "_mean");
    if (!mc) {
      std::cerr << "[cellflock] plot: missing " << metric << "_mean, skipping\n";
      continue;
    }
    std::vector<double> xs, ys;
    std::map<std::pair<double, double>, double> grid;
    for (std::size_t r = 0; r < agg.rows.size(); ++r) {
      const double x = agg.number(r, *xc), y = agg.number(r, *yc);
      xs.push_back(x);
      ys.push_back(y);
      grid[{x, y}] = agg.number(r, *mc);
    }
    const auto uniq = [](std::vector<double>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xs); uniq(ys);

    const double w = 480, h = 360, ml = 60, mt = 30, mr = 20, mb = 45;
    detail::Svg svg(w, h);
    const double cw = (w - ml - mr) / static_cast<double>(xs.size());
    const double ch = (h - mt - mb) / static_cast<double>(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const auto it = grid.find({xs[i], ys[j]});
        if (it == grid.end()) continue;
        // map [-1, 1] style metrics by magnitude
        const double v = metric == "tail_phi_rot" ? std::abs(it->second)
                                                  : it->second;
        svg.cell(ml + cw * static_cast<double>(i),
                 h - mb - ch * static_cast<double>(j + 1), cw, ch,
                 detail::heat_color(v));
      }
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      svg.text(ml + cw * (static_cast<double>(i) + 0.3), h - mb + 14,
               detail::Svg::fmt(xs[i]));
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      svg.text(8, h - mb - ch * (static_cast<double>(j) + 0.4),
               detail::Svg::fmt(ys[j]));
    }
    svg.text((ml + w - mr) / 2, h - 8, ax);
    svg.text(8, mt - 10, ay + "  (" + metric + ")");
    const fs::path out = out_dir / ("heatmap_" + metric + ".svg");
    svg.save(out);
    written.push_back(out);
  }
  return written;
}

// Time-series panels for a metrics file: phi, vbar, phi_rot against t.
inline std::vector<std::filesystem::path> plot_timeseries(
    const CsvTable& metrics, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto tc = metrics.column("t");
  if (!tc) {
    std::cerr << "[cellflock] plot: metrics file lacks a 't' column\n";
    return written;
  }
  for (const std::string metric : {"phi", "vbar", "phi_rot"}) {
    const auto mc = metrics.column(metric);
    if (!mc) {
      std::cerr << "[cellflock] plot: missing column '" << metric
                << "', skipping\n";
      continue;
    }
    std::vector<double> t, v;
    for (std::size_t r = 0; r < metrics.rows.size(); ++r) {
      t.push_back(metrics.number(r, *tc));
      v.push_back(metrics.number(r, *mc));
    }
    double lo = 0.0, hi = 1.0;
    for (const double y : v) {
      if (!std::isnan(y)) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    detail::Svg svg(480, 240);
    svg.set_viewport(t.front(), t.back(), lo, hi, 50, 15, 25, 35);
    svg.polyline(t, v, "firebrick");
    svg.axes("t (h)", metric);
    const fs::path out = out_dir / ("timeseries_" + metric + ".svg");
    svg.save(out);
    written.push_back(out);
  }
  return written;
}

// Pair-distance histogram of the final frame of a trajectory file.
inline std::vector<std::filesystem::path> plot_histogram(
    const CsvTable& traj, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const auto sc = traj.column("step");
  const auto xc = traj.column("x");
  const auto yc = traj.column("y");
  if (!sc || !xc || !yc) {
    std::cerr << "[cellflock] plot: trajectory file lacks step/x/y columns\n";
    return written;
  }
  double last = -1.0;
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    last = std::max(last, traj.number(r, *sc));
  }
  std::vector<Vec2> x;
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    if (traj.number(r, *sc) == last) {
      x.push_back({traj.number(r, *xc), traj.number(r, *yc)});
    }
  }
  const double r_max = 60.0, bin = 1.0;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(r_max / bin), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double r = (x[i] - x[j]).norm();
      if (r < r_max) ++counts[static_cast<std::size_t>(r / bin)];
    }
  }
  std::uint64_t peak = 1;
  for (const auto c : counts) peak = std::max(peak, c);

  detail::Svg svg(480, 280);
  svg.set_viewport(0.0, r_max, 0.0, static_cast<double>(peak), 50, 15, 25, 35);
  const double bw = (480.0 - 65.0) / (r_max / bin);
  for (std::size_t b = 0; b < counts.size(); ++b) {
    svg.bar(static_cast<double>(b) * bin, static_cast<double>(counts[b]),
            bw * 0.9, "darkseagreen");
  }
  svg.axes("pair distance (um)", "count");
  const fs::path out = out_dir / "histogram.svg";
  svg.save(out);
  written.push_back(out);

  std::ofstream csv(out_dir / "histogram.csv");
  csv << "r_lo,r_hi,count\n";
  for (std::size_t b = 0; b < counts.size(); ++b) {
    csv << static_cast<double>(b) * bin << "," << static_cast<double>(b + 1) * bin
        << "," << counts[b] << "\n";
  }
  return written;
}

// Dispatch on the input: a sweep directory or aggregates table gets band
// plots or a heatmap, a metrics file gets time-series panels, a trajectory
// file gets the final-frame distance histogram.
inline std::vector<std::filesystem::path> emit_plots(
    const std::filesystem::path& input, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  fs::path target = input;
  if (fs::is_directory(target)) {
    if (fs::exists(target / "aggregates.csv")) {
      target = target / "aggregates.csv";
    } else if (fs::exists(target / "metrics.csv")) {
      target = target / "metrics.csv";
    } else {
      throw std::runtime_error("no aggregates.csv or metrics.csv in '" +
                               target.string() + "'");
    }
  }
  const CsvTable table = read_csv(target);

  if (table.column("phi") && table.column("t")) {
    auto written = plot_timeseries(table, out_dir);
    const fs::path traj = target.parent_path() / "trajectory.csv";
    if (fs::exists(traj)) {
      const auto hist = plot_histogram(read_csv(traj), out_dir);
      written.insert(written.end(), hist.begin(), hist.end());
    }
    return written;
  }
  if (table.column("x") && table.column("theta")) {
    return plot_histogram(table, out_dir);
  }
  // aggregates: axis columns come before n_ok
  std::vector<std::string> axes;
  for (const std::string& col : table.header) {
    if (col == "n_ok") break;
    axes.push_back(col);
  }
  if (axes.size() == 1) return plot_bands(table, axes[0], out_dir);
  if (axes.size() == 2) return plot_heatmaps(table, axes[0], axes[1], out_dir);
  throw std::runtime_error("unsupported table layout in '" + target.string() +
                           "'");
}

}  // namespace cellflock
