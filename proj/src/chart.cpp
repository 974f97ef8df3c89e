#include "weakal/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "weakal/errors.hpp"

namespace weakal {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::pair<double, double> chart_y_range(const std::vector<AggregateRow>& table) {
  if (table.empty()) throw DomainError("chart table must be non-empty");
  double lo = table[0].mean_accuracy - table[0].std_accuracy;
  double hi = table[0].mean_accuracy + table[0].std_accuracy;
  for (const auto& row : table) {
    lo = std::min(lo, row.mean_accuracy - row.std_accuracy);
    hi = std::max(hi, row.mean_accuracy + row.std_accuracy);
  }
  double pad = 0.05 * (hi - lo);
  if (pad == 0.0) pad = 0.05 * std::max(std::abs(hi), 1e-3);
  return {lo - pad, hi + pad};
}

void render_chart(const std::vector<AggregateRow>& table, const std::string& path) {
  if (table.empty()) throw DomainError("chart table must be non-empty");

  std::map<Method, std::vector<AggregateRow>> by_method;
  int min_round = table[0].round, max_round = table[0].round;
  for (const auto& row : table) {
    by_method[row.method].push_back(row);
    min_round = std::min(min_round, row.round);
    max_round = std::max(max_round, row.round);
  }
  for (auto& [m, rows] : by_method)
    std::sort(rows.begin(), rows.end(),
              [](const AggregateRow& a, const AggregateRow& b) { return a.round < b.round; });

  const auto [y_lo, y_hi] = chart_y_range(table);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto x_of = [&](double round) {
    if (max_round == min_round) return kMarginLeft + plot_w / 2.0;
    return kMarginLeft + plot_w * (round - min_round) / (max_round - min_round);
  };
  const auto y_of = [&](double acc) {
    return kMarginTop + plot_h * (1.0 - (acc - y_lo) / (y_hi - y_lo));
  };

  std::ofstream out(path);
  if (!out) throw ParseError("cannot write chart file: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // Axes.
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
      << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"black\"/>\n";
  for (int r = min_round; r <= max_round; ++r) {
    const double x = x_of(r);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kMarginTop + plot_h)
        << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(kMarginTop + plot_h + 5)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kMarginTop + plot_h + 20)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << r << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double acc = y_lo + (y_hi - y_lo) * i / 5.0;
    const double y = y_of(acc);
    out << "<line x1=\"" << fmt(kMarginLeft - 5) << "\" y1=\"" << fmt(y)
        << "\" x2=\"" << fmt(kMarginLeft) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(kMarginLeft - 10) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(acc) << "</text>\n";
  }
  out << "<text x=\"" << fmt(kMarginLeft + plot_w / 2) << "\" y=\""
      << fmt(kHeight - 15) << "\" text-anchor=\"middle\" font-size=\"14\">round</text>\n";
  out << "<text x=\"20\" y=\"" << fmt(kMarginTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << fmt(kMarginTop + plot_h / 2) << ")\">accuracy</text>\n";

  int color_idx = 0;
  for (const auto& [method, rows] : by_method) {
    const char* color = kPalette[color_idx % 6];
    if (rows.size() > 1) {
      // +/- 1 std band.
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (const auto& row : rows)
        out << fmt(x_of(row.round)) << "," << fmt(y_of(row.mean_accuracy + row.std_accuracy)) << " ";
      for (auto it = rows.rbegin(); it != rows.rend(); ++it)
        out << fmt(x_of(it->round)) << "," << fmt(y_of(it->mean_accuracy - it->std_accuracy)) << " ";
      out << "\"/>\n";
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& row : rows)
        out << fmt(x_of(row.round)) << "," << fmt(y_of(row.mean_accuracy)) << " ";
      out << "\"/>\n";
    }
    for (const auto& row : rows)
      out << "<circle cx=\"" << fmt(x_of(row.round)) << "\" cy=\""
          << fmt(y_of(row.mean_accuracy)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = kMarginTop + 20.0 * color_idx;
    out << "<rect x=\"" << fmt(kWidth - kMarginRight + 10) << "\" y=\"" << fmt(ly - 8)
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(kWidth - kMarginRight + 28) << "\" y=\"" << fmt(ly + 2)
        << "\" font-size=\"12\">" << method_name(method) << "</text>\n";
    ++color_idx;
  }
  out << "</svg>\n";
}

}  // namespace weakal
