#include <regex>

#include <gtest/gtest.h>

#include "cowrite/report.hpp"

using namespace cowrite;

namespace {

ena::NetworkGraph graph(std::vector<double> weights, bool difference = false) {
  ena::NetworkGraph g;
  g.label = "g";
  g.codes = {"A", "B", "C"};
  g.weights = std::move(weights);
  g.node_weights = ena::incident_weights(g.weights, 3);
  g.node_positions.resize(3, 2);
  g.node_positions << 0.5, -0.25, -1.0, 0.75, 0.2, 0.1;
  g.centroid = Eigen::Vector2d::Zero();
  g.difference = difference;
  return g;
}

std::vector<std::array<double, 2>> attr_pairs(const std::string& svg, const std::string& tag, const std::string& ax,
                                              const std::string& ay) {
  std::vector<std::array<double, 2>> out;
  const std::regex re("<" + tag + "[^>]*" + ax + "=\"([-0-9.]+)\"[^>]*" + ay + "=\"([-0-9.]+)\"");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it)
    out.push_back({std::stod((*it)[1]), std::stod((*it)[2])});
  return out;
}

}  // namespace

TEST(Svg, NodeCoordinatesAreAnAffineMapOfPositions) {
  const auto g = graph({1, 0.5, 0.25});
  const auto svg = report::render_network_svg(g, {0.4, 0.2});
  const auto nodes = attr_pairs(svg, "circle", "cx", "cy");
  ASSERT_EQ(nodes.size(), 3u);
  // Recover scale and offset from two nodes and check the third.
  const double sx = (nodes[1][0] - nodes[0][0]) / (g.node_positions(1, 0) - g.node_positions(0, 0));
  const double sy = (nodes[1][1] - nodes[0][1]) / (g.node_positions(1, 1) - g.node_positions(0, 1));
  const double ox = nodes[0][0] - sx * g.node_positions(0, 0);
  const double oy = nodes[0][1] - sy * g.node_positions(0, 1);
  EXPECT_NEAR(nodes[2][0], ox + sx * g.node_positions(2, 0), 0.5);
  EXPECT_NEAR(nodes[2][1], oy + sy * g.node_positions(2, 1), 0.5);
  EXPECT_NEAR(sx, -sy, 0.5);
}

TEST(Svg, SingleEdgeEndsAtItsNodes) {
  const auto g = graph({0, 0.7, 0});
  const auto svg = report::render_network_svg(g, {});
  const auto ends1 = attr_pairs(svg, "line data-pair", "x1", "y1");
  const auto ends2 = attr_pairs(svg, "line data-pair", "x2", "y2");
  const auto nodes = attr_pairs(svg, "circle", "cx", "cy");
  ASSERT_EQ(ends1.size(), 1u);
  ASSERT_EQ(ends2.size(), 1u);
  EXPECT_EQ(ends1[0], nodes[0]);  // pair A&C
  EXPECT_EQ(ends2[0], nodes[2]);
  EXPECT_NE(svg.find("data-pair=\"A&amp;C\""), std::string::npos);
}

TEST(Svg, ZeroDifferenceDrawsNoEdges) {
  const auto svg = report::render_network_svg(graph({0, 0, 0}, true), {});
  EXPECT_EQ(svg.find("<line data-pair"), std::string::npos);
  EXPECT_EQ(attr_pairs(svg, "circle", "cx", "cy").size(), 3u);
}

TEST(Svg, DifferenceEdgesAreColouredBySign) {
  const auto svg = report::render_network_svg(graph({0.3, -0.2, 0}, true), {});
  EXPECT_NE(svg.find(report::kPositiveColor), std::string::npos);
  EXPECT_NE(svg.find(report::kNegativeColor), std::string::npos);
}

TEST(Svg, FrameFitsTheFarthestPointInsideTheMargin) {
  auto f = report::SvgFrame::fit({{2.0, -1.0}, {-0.5, 4.0}});
  EXPECT_DOUBLE_EQ(f.y(4.0), f.margin);
  EXPECT_DOUBLE_EQ(f.x(0.0), 300.0);
}

TEST(Svg, ScatterDrawsOnePointPerMemberAndOneCentroidPerGroup) {
  Eigen::MatrixXd s(4, 2);
  s << 1, 0, 0, 1, -1, 0, 0, -1;
  const auto svg = report::render_scatter_svg(s, {{"x", {0, 1}}, {"y", {2, 3}}}, {0.5, 0.5}, "t");
  EXPECT_EQ(attr_pairs(svg, "circle", "cx", "cy").size(), 4u);
  std::size_t rects = 0;
  for (auto p = svg.find("class=\"centroid\""); p != std::string::npos; p = svg.find("class=\"centroid\"", p + 1)) ++rects;
  EXPECT_EQ(rects, 2u);
}

TEST(Svg, LabelsAreEscaped) {
  auto g = graph({1, 0, 0});
  g.codes[0] = "A<&>";
  const auto svg = report::render_network_svg(g, {});
  EXPECT_NE(svg.find("A&lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("A<&>"), std::string::npos);
}
