#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepadmr/common/format.hpp"
#include "deepadmr/experiments/roc.hpp"
#include "deepadmr/monitor/detector.hpp"

namespace deepadmr::experiments {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> trace_columns{"slot", "node", "delta", "knn_stat", "p", "ell", "g", "alarm"};
inline const std::vector<std::string> aggregate_columns{"slot", "g"};
inline const std::vector<std::string> roc_columns{"h", "fpr", "tpr"};

namespace detail {

inline void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

}  // namespace detail

inline void write_trace_csv(std::ostream& os, const std::vector<monitor::TraceRow>& rows) {
  detail::write_header(os, trace_columns);
  for (const auto& r : rows)
    os << r.slot << ',' << r.node << ',' << format_double(r.delta) << ',' << format_double(r.knn_stat) << ','
       << format_double(r.p) << ',' << format_double(r.ell) << ',' << format_double(r.g) << ',' << (r.alarm ? 1 : 0)
       << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<double>& aggregate) {
  detail::write_header(os, aggregate_columns);
  for (std::size_t t = 0; t < aggregate.size(); ++t) os << t << ',' << format_double(aggregate[t]) << '\n';
}

inline void write_roc_csv(std::ostream& os, const std::vector<RocPoint>& points) {
  detail::write_header(os, roc_columns);
  for (const auto& p : points) os << format_double(p.h) << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

/// Numeric CSV with a header line.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw CsvError("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline CsvTable read_csv(std::istream& is, const std::vector<std::string>& expected = {}) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(is, line)) throw CsvError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line);
  if (!expected.empty() && t.columns != expected) throw CsvError("CSV header '" + line + "' is not the expected one");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw CsvError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(t.columns.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    try {
      for (const auto& c : cells) row.push_back(parse_double(c));
    } catch (const std::runtime_error& e) {
      throw CsvError("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::vector<RocPoint> roc_from_csv(const CsvTable& t) {
  const auto h = t.column("h"), f = t.column("fpr"), p = t.column("tpr");
  std::vector<RocPoint> out;
  for (const auto& r : t.rows) {
    RocPoint pt;
    pt.h = r[h];
    pt.fpr = r[f];
    pt.tpr = r[p];
    if (pt.fpr < 0 || pt.fpr > 1 || pt.tpr < 0 || pt.tpr > 1) throw CsvError("ROC rates must lie in [0,1]");
    out.push_back(pt);
  }
  return out;
}

/// Minimal SVG line-plot builder.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, double x0, double x1, double y0, double y1)
      : title_(std::move(title)), xl_(std::move(x_label)), yl_(std::move(y_label)), x0_(x0), x1_(x1), y0_(y0),
        y1_(y1 > y0 ? y1 : y0 + 1.0) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
  }

  double x_min() const { return x0_; }
  double x_max() const { return x1_; }

  void line(const std::vector<std::pair<double, double>>& pts, const std::string& color, double width = 1.0,
            bool dashed = false) {
    if (pts.empty()) return;
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << '"';
    if (dashed) s << " stroke-dasharray=\"4 3\"";
    s << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
    s << "\"/>\n";
    body_ += s.str();
  }

  void legend(const std::string& text, const std::string& color) {
    const double y = top + 14.0 * static_cast<double>(++legend_count_);
    body_ += "<text x=\"" + num(left + 8) + "\" y=\"" + num(y) + "\" font-size=\"11\" fill=\"" + color + "\">" + text + "</text>\n";
  }

  std::string str() const {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title_ << "</text>\n";
    s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(width - left - right) << "\" height=\""
      << num(height - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0, fy = y0_ + (y1_ - y0_) * i / 4.0;
      s << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(height - bottom + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
        << tick(fx) << "</text>\n";
      s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(fy) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
        << tick(fy) << "</text>\n";
    }
    s << "<text x=\"" << num(width / 2) << "\" y=\"" << num(height - 8) << "\" text-anchor=\"middle\" font-size=\"12\">" << xl_
      << "</text>\n";
    s << "<text x=\"14\" y=\"" << num(height / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
      << num(height / 2) << ")\">" << yl_ << "</text>\n";
    s << body_ << "</svg>\n";
    return s.str();
  }

  static constexpr double width = 640, height = 400, left = 60, right = 20, top = 34, bottom = 46;

 private:
  double px(double x) const { return left + (x - x0_) / (x1_ - x0_) * (width - left - right); }
  double py(double y) const { return height - bottom - (std::clamp(y, y0_, y1_) - y0_) / (y1_ - y0_) * (height - top - bottom); }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  std::string title_, xl_, yl_;
  double x0_, x1_, y0_, y1_;
  std::string body_;
  int legend_count_ = 0;
};

/// Score-trace plot from an aggregate CSV and a per-node trace CSV. The x-range is the
/// aggregate's slot range, i.e. [0, T_max].
inline std::string trace_svg(const CsvTable& aggregate, const CsvTable& trace, const std::string& title) {
  const auto as = aggregate.column("slot"), ag = aggregate.column("g");
  if (aggregate.rows.empty()) throw CsvError("aggregate CSV has no rows");
  const double x0 = aggregate.rows.front()[as], x1 = aggregate.rows.back()[as];
  double y1 = 0.0;
  std::vector<std::pair<double, double>> agg;
  for (const auto& r : aggregate.rows) {
    agg.emplace_back(r[as], r[ag]);
    y1 = std::max(y1, r[ag]);
  }
  const auto ts = trace.column("slot"), tn = trace.column("node"), tg = trace.column("g");
  std::map<long, std::vector<std::pair<double, double>>> per_node;
  for (const auto& r : trace.rows) {
    per_node[static_cast<long>(r[tn])].emplace_back(r[ts], r[tg]);
    y1 = std::max(y1, r[tg]);
  }
  SvgPlot plot(title, "slot", "g", x0, x1, 0.0, y1 * 1.05);
  for (const auto& [node, pts] : per_node) plot.line(pts, "#b0b0b0", 0.8);
  plot.line(agg, "#c0392b", 1.8);
  plot.legend("per-node g", "#808080");
  plot.legend("mean over nodes", "#c0392b");
  return plot.str();
}

inline std::string roc_svg(const CsvTable& roc, const std::string& title) {
  auto points = roc_from_csv(roc);
  std::vector<std::pair<double, double>> xy{{0.0, 0.0}, {1.0, 1.0}};
  for (const auto& p : points) xy.emplace_back(p.fpr, p.tpr);
  std::sort(xy.begin(), xy.end());
  SvgPlot plot(title, "false positive rate", "true positive rate", 0.0, 1.0, 0.0, 1.0);
  plot.line({{0.0, 0.0}, {1.0, 1.0}}, "#999999", 1.0, true);
  plot.line(xy, "#1f4e9c", 2.0);
  plot.legend("AUC " + format_double(std::round(auc(points) * 1000.0) / 1000.0), "#1f4e9c");
  return plot.str();
}

}  // namespace deepadmr::experiments
