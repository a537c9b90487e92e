#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "aislab/cli.hpp"

namespace aislab::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') {
      out += "&lt;";
    } else if (c == '>') {
      out += "&gt;";
    } else if (c == '&') {
      out += "&amp;";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_chart(const std::vector<Curve>& curves, const std::string& title, const std::string& y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Curve& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min({y0, c.q25[i], c.median[i]});
      y1 = std::max({y1, c.q75[i], c.median[i]});
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" "
    << "font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft) << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
    << fmt(kTop + ph) << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(kTop + ph)
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5.0;
    const double yv = y0 + (y1 - y0) * t / 5.0;
    o << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(sx(xv)) << "\" y2=\""
      << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(sy(yv)) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
      << fmt(sy(yv)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(sy(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 10) << "\" text-anchor=\"middle\">iteration</text>\n";
  o << "<text transform=\"translate(16," << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Curve& c = curves[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    if (!c.x.empty()) {
      o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < c.x.size(); ++i) o << fmt(sx(c.x[i])) << ',' << fmt(sy(c.q75[i])) << ' ';
      for (std::size_t i = c.x.size(); i-- > 0;) o << fmt(sx(c.x[i])) << ',' << fmt(sy(c.q25[i])) << ' ';
      o << "\"/>\n";
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < c.x.size(); ++i) o << fmt(sx(c.x[i])) << ',' << fmt(sy(c.median[i])) << ' ';
      o << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << fmt(kLeft + pw + 15) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(kLeft + pw + 35)
      << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>";
    o << "<text x=\"" << fmt(kLeft + pw + 40) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(c.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace aislab::cli
