#pragma once

// Static SVG figures: network graphs in the embedding space and unit scatter
// plots with group centroids. Every figure has a fixed 600x600 canvas; model
// coordinates map to pixels through SvgFrame so tests can recompute them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cowrite/ena.hpp"

namespace cowrite::report {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string xml_escape(std::string_view s) {
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

/// Affine map from the first two model dimensions to pixels, symmetric about
/// the origin so both axes share one scale.
struct SvgFrame {
  double size = 600.0;
  double margin = 60.0;
  double scale = 1.0;

  double x(double v) const { return size / 2.0 + scale * v; }
  double y(double v) const { return size / 2.0 - scale * v; }

  static SvgFrame fit(const std::vector<Eigen::Vector2d>& points, double size = 600.0, double margin = 60.0) {
    SvgFrame f;
    f.size = size;
    f.margin = margin;
    double bound = 0.0;
    for (const auto& p : points) bound = std::max({bound, std::abs(p.x()), std::abs(p.y())});
    f.scale = bound > 0.0 ? (size / 2.0 - margin) / bound : 1.0;
    return f;
  }
};

inline Eigen::Vector2d xy(const Eigen::MatrixXd& m, Eigen::Index row) {
  return {m(row, 0), m.cols() > 1 ? m(row, 1) : 0.0};
}

inline std::string axis_label(const std::vector<double>& variance, std::size_t d) {
  std::string s = "Dim " + std::to_string(d + 1);
  if (d < variance.size()) s += " (" + fmt(100.0 * variance[d]) + "%)";
  return s;
}

inline void svg_open(std::ostringstream& o, const SvgFrame& f, const std::string& title,
                     const std::vector<double>& variance) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(f.size) << "\" height=\"" << fmt(f.size)
    << "\" viewBox=\"0 0 " << fmt(f.size) << ' ' << fmt(f.size) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(f.size / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  o << "<g class=\"axes\" stroke=\"#999\" stroke-dasharray=\"4 3\">\n";
  o << "<line x1=\"" << fmt(f.margin / 2) << "\" y1=\"" << fmt(f.size / 2) << "\" x2=\"" << fmt(f.size - f.margin / 2)
    << "\" y2=\"" << fmt(f.size / 2) << "\"/>\n";
  o << "<line x1=\"" << fmt(f.size / 2) << "\" y1=\"" << fmt(f.margin / 2) << "\" x2=\"" << fmt(f.size / 2)
    << "\" y2=\"" << fmt(f.size - f.margin / 2) << "\"/>\n</g>\n";
  o << "<text class=\"axis-label\" x=\"" << fmt(f.size - f.margin / 2) << "\" y=\"" << fmt(f.size / 2 - 6)
    << "\" text-anchor=\"end\">" << axis_label(variance, 0) << "</text>\n";
  o << "<text class=\"axis-label\" x=\"" << fmt(f.size / 2 + 6) << "\" y=\"" << fmt(f.margin / 2 + 10) << "\">"
    << axis_label(variance, 1) << "</text>\n";
}

inline constexpr const char* kPositiveColor = "#1f5fbf";
inline constexpr const char* kNegativeColor = "#c0392b";
inline constexpr const char* kMeanColor = "#555555";

/// Nodes at their co-registered positions, radius by incident weight; edges
/// with width by |weight|. Difference graphs colour edges by sign. Zero
/// weights draw nothing.
inline std::string render_network_svg(const ena::NetworkGraph& g, const std::vector<double>& variance,
                                      std::optional<SvgFrame> frame = std::nullopt) {
  const auto k = g.codes.size();
  std::vector<Eigen::Vector2d> pts;
  for (std::size_t i = 0; i < k; ++i) pts.push_back(xy(g.node_positions, static_cast<Eigen::Index>(i)));
  const SvgFrame f = frame ? *frame : SvgFrame::fit(pts);

  std::ostringstream o;
  svg_open(o, f, g.label, variance);

  double max_w = 0.0;
  for (double w : g.weights) max_w = std::max(max_w, std::abs(w));
  o << "<g class=\"edges\" stroke-linecap=\"round\">\n";
  const auto ps = ena::pairs(k);
  for (std::size_t p = 0; p < ps.size(); ++p) {
    const double w = g.weights[p];
    if (w == 0.0 || max_w == 0.0) continue;
    const auto& a = pts[ps[p].first];
    const auto& b = pts[ps[p].second];
    const char* colour = g.difference ? (w > 0 ? kPositiveColor : kNegativeColor) : kMeanColor;
    o << "<line data-pair=\"" << xml_escape(g.codes[ps[p].first]) << "&amp;" << xml_escape(g.codes[ps[p].second])
      << "\" x1=\"" << fmt(f.x(a.x())) << "\" y1=\"" << fmt(f.y(a.y())) << "\" x2=\"" << fmt(f.x(b.x())) << "\" y2=\""
      << fmt(f.y(b.y())) << "\" stroke=\"" << colour << "\" stroke-width=\"" << fmt(0.5 + 8.0 * std::abs(w) / max_w)
      << "\" stroke-opacity=\"0.7\"/>\n";
  }
  o << "</g>\n";

  double max_n = 0.0;
  for (double w : g.node_weights) max_n = std::max(max_n, w);
  o << "<g class=\"nodes\">\n";
  for (std::size_t i = 0; i < k; ++i) {
    const double r = 3.0 + (max_n > 0.0 ? 12.0 * g.node_weights[i] / max_n : 0.0);
    o << "<circle data-code=\"" << xml_escape(g.codes[i]) << "\" cx=\"" << fmt(f.x(pts[i].x())) << "\" cy=\""
      << fmt(f.y(pts[i].y())) << "\" r=\"" << fmt(r) << "\" fill=\"black\"/>\n";
    o << "<text x=\"" << fmt(f.x(pts[i].x()) + r + 2) << "\" y=\"" << fmt(f.y(pts[i].y()) - 2) << "\">"
      << xml_escape(g.codes[i]) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

struct ScatterGroup {
  std::string label;
  std::vector<std::size_t> members;  // rows of the score matrix
};

/// Unit scores as points and each group's mean score as a square.
inline std::string render_scatter_svg(const Eigen::MatrixXd& scores, const std::vector<ScatterGroup>& groups,
                                      const std::vector<double>& variance, const std::string& title) {
  static const char* palette[] = {kPositiveColor, kNegativeColor, "#2e8b57", "#8e44ad", "#d4a017"};
  std::vector<Eigen::Vector2d> pts;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) pts.push_back(xy(scores, r));
  const SvgFrame f = SvgFrame::fit(pts);
  std::ostringstream o;
  svg_open(o, f, title, variance);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const char* colour = palette[gi % 5];
    o << "<g class=\"group\" data-label=\"" << xml_escape(groups[gi].label) << "\" fill=\"" << colour << "\">\n";
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (auto u : groups[gi].members) {
      const auto p = pts[u];
      mean += p;
      o << "<circle cx=\"" << fmt(f.x(p.x())) << "\" cy=\"" << fmt(f.y(p.y())) << "\" r=\"2.5\" fill-opacity=\"0.5\"/>\n";
    }
    if (!groups[gi].members.empty()) {
      mean /= static_cast<double>(groups[gi].members.size());
      o << "<rect class=\"centroid\" x=\"" << fmt(f.x(mean.x()) - 6) << "\" y=\"" << fmt(f.y(mean.y()) - 6)
        << "\" width=\"12\" height=\"12\" stroke=\"black\"/>\n";
      o << "<text x=\"" << fmt(f.x(mean.x()) + 9) << "\" y=\"" << fmt(f.y(mean.y()) + 4) << "\" fill=\"black\">"
        << xml_escape(groups[gi].label) << "</text>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace cowrite::report
