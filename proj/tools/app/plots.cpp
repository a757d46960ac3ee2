#include "app/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace graphletqa::app {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12,
                 const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\"" + extra + ">" + escape(s) + "</text>\n";
}

std::string frame(const std::string& title, const std::string& x_label, const std::string& y_label) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += text(kWidth / 2, 24, title, "middle", 15);
  out += text(kWidth / 2, kHeight - 12, x_label);
  out += text(18, kHeight / 2, y_label, "middle", 12,
              " transform=\"rotate(-90 18 " + num(kHeight / 2) + ")\"");
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  return out;
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<std::string>& labels, const std::vector<double>& values) {
  std::string out = frame(title, x_label, y_label);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  double max_v = 0.0;
  for (double v : values) max_v = std::max(max_v, v);
  if (max_v <= 0.0) max_v = 1.0;
  out += text(kLeft - 6, kTop + 4, num(max_v), "end", 10);
  out += text(kLeft - 6, kHeight - kBottom + 4, "0", "end", 10);
  const std::size_t n = std::min(labels.size(), values.size());
  if (n == 0) {
    out += text(kWidth / 2, kHeight / 2, "no data");
  }
  const double slot = n ? plot_w / static_cast<double>(n) : plot_w;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = plot_h * values[i] / max_v;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.1;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" + num(slot * 0.8) +
           "\" height=\"" + num(h) + "\" fill=\"#4878a8\"/>\n";
    if (n <= 40) out += text(x + slot * 0.4, kHeight - kBottom + 14, labels[i], "middle", 9);
  }
  return out + "</svg>\n";
}

std::string loglog_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  std::string out = frame(title, x_label, y_label);
  double max_x = 1.0, max_y = 1.0;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (x > 0 && y > 0) {
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
      }
    }
  }
  const double lx = std::log10(max_x) > 0 ? std::log10(max_x) : 1.0;
  const double ly = std::log10(max_y) > 0 ? std::log10(max_y) : 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  out += text(kLeft - 6, kTop + 4, num(max_y), "end", 10);
  out += text(kLeft - 6, kHeight - kBottom + 4, "1", "end", 10);
  out += text(kWidth - kRight, kHeight - kBottom + 14, num(max_x), "end", 10);
  out += text(kLeft, kHeight - kBottom + 14, "1", "middle", 10);
  double legend_y = kTop + 10;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (x <= 0 || y <= 0) continue;
      const double px = kLeft + plot_w * std::log10(x) / lx;
      const double py = kHeight - kBottom - plot_h * std::log10(y) / ly;
      out += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"2.5\" fill=\"" + s.color + "\"/>\n";
    }
    out += "<rect x=\"" + num(kWidth - 190) + "\" y=\"" + num(legend_y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
           s.color + "\"/>\n";
    out += text(kWidth - 174, legend_y, s.name, "start", 11);
    legend_y += 16;
  }
  return out + "</svg>\n";
}

}  // namespace graphletqa::app
