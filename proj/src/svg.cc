#include "naclab/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace naclab {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#e6a700", "#7b3294",
                                "#2ca02c", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void panel_svg(std::string& out, const Panel& p, double top, int width, int height,
               std::size_t max_points) {
  const double left = 70, right = 160, pad_top = 28, pad_bottom = 40;
  const double pw = width - left - right, ph = height - pad_top - pad_bottom;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymin -= 0.5, ymax += 0.5;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + pad_top + (ymax - y) / (ymax - ymin) * ph; };

  out += "<text x=\"" + num(left) + "\" y=\"" + num(top + 18) +
         "\" font-size=\"14\" font-weight=\"bold\">" + escape(p.title) + "</text>\n";
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top + pad_top) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    out += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(top + pad_top + ph + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
    out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(sy(yv) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num(yv) + "</text>\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(left + pw) +
           "\" y2=\"" + num(sy(yv)) + "\" stroke=\"#ddd\"/>\n";
  }
  if (ymin < 0 && ymax > 0)
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(0)) + "\" x2=\"" + num(left + pw) +
           "\" y2=\"" + num(sy(0)) + "\" stroke=\"#999\"/>\n";
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(top + height - 6) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(p.xlabel) + "</text>\n";
  out += "<text x=\"14\" y=\"" + num(top + pad_top + ph / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num(top + pad_top + ph / 2) + ")\">" + escape(p.ylabel) + "</text>\n";

  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const Series& s = p.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    const std::size_t n = s.x.size();
    const std::size_t stride = n > max_points ? (n + max_points - 1) / max_points : 1;
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"";
    if (s.dashed) out += " stroke-dasharray=\"6 4\"";
    out += " points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      out += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
      if (i + stride >= n && i + 1 != n)
        out += num(sx(s.x[n - 1])) + "," + num(sy(s.y[n - 1])) + " ";
    }
    out += "\"/>\n";
    const double ly = top + pad_top + 14 + 18.0 * static_cast<double>(si);
    out += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(left + pw + 36) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    out += "<text x=\"" + num(left + pw + 42) + "\" y=\"" + num(ly + 4) + "\" font-size=\"12\">" +
           escape(s.label) + "</text>\n";
  }
}

std::vector<double> channel(const std::vector<Eigen::VectorXd>& rows, int i, double sign = 1.0) {
  std::vector<double> v(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) v[k] = sign * rows[k](i);
  return v;
}

std::vector<double> norms(const std::vector<Eigen::VectorXd>& rows) {
  std::vector<double> v(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) v[k] = rows[k].norm();
  return v;
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height,
                       std::size_t max_points) {
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(1, panels.size()));
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
                    std::to_string(width) + " " + std::to_string(height) +
                    "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    panel_svg(out, panels[i], static_cast<double>(i) * panel_height, width, panel_height,
              std::max<std::size_t>(2, max_points));
  out += "</svg>\n";
  return out;
}

Panel output_panel(const Trajectory& tr, const std::string& title) {
  Panel p{title, "t", "y", {}};
  const int m = tr.size() ? static_cast<int>(tr.outputs[0].size()) : 0;
  for (int i = 0; i < m; ++i)
    p.series.push_back({"y" + std::to_string(i + 1), tr.times, channel(tr.outputs, i), false});
  return p;
}

std::vector<Panel> input_panels(const Trajectory& tr) {
  std::vector<Panel> panels;
  const int m = tr.size() ? static_cast<int>(tr.outputs[0].size()) : 0;
  for (int i = 0; i < m; ++i) {
    const std::string k = std::to_string(i + 1);
    Panel p{"input " + k + " against negative output " + k, "t", "value", {}};
    p.series.push_back({"u" + k, tr.times, channel(tr.actions, i), false});
    p.series.push_back({"-y" + k, tr.times, channel(tr.outputs, i, -1.0), true});
    panels.push_back(std::move(p));
  }
  return panels;
}

Panel overlay_panel(const Trajectory& a, const std::string& label_a, const Trajectory& b,
                    const std::string& label_b) {
  Panel p{"output norm", "t", "|y|", {}};
  p.series.push_back({label_a, a.times, norms(a.outputs), false});
  p.series.push_back({label_b, b.times, norms(b.outputs), true});
  return p;
}

}  // namespace naclab
