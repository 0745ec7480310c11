#include "pbcert/region_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace pbcert::goodwin {

namespace {

std::string num(double v, const char* fmt = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

const char* color(PointLabel label) {
  switch (label) {
    case PointLabel::StablePoint: return "#1f77b4";
    case PointLabel::StablePeriodicOrbit: return "#ff7f0e";
    case PointLabel::Uncertified: return "#cccccc";
  }
  return "#cccccc";
}

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 70, kRight = 600, kTop = 30, kBottom = 540;

}  // namespace

void write_region_csv(const RegionGrid& grid, std::ostream& out) {
  out << "tau,lambda,label,witness_rho,witness_beta,margin\n";
  for (int j = 0; j < grid.lambda.n; ++j) {
    for (int i = 0; i < grid.tau.n; ++i) {
      const RegionCell& c = grid.cell(i, j);
      out << num(grid.tau.at(i)) << ',' << num(grid.lambda.at(j)) << ',' << to_string(c.label) << ',';
      if (c.witness)
        out << num(c.witness->rho, "%.17g") << ',' << num(c.witness->beta, "%.17g");
      else
        out << ',';
      out << ',' << (c.label == PointLabel::Uncertified ? std::string() : num(c.margin, "%.17g")) << '\n';
    }
  }
}

void write_region_svg(const RegionGrid& grid, std::ostream& out) {
  const double dt = grid.tau.n > 1 ? grid.tau.spacing() : std::max(grid.tau.hi - grid.tau.lo, 1e-3);
  const double dl = grid.lambda.n > 1 ? grid.lambda.spacing() : std::max(grid.lambda.hi - grid.lambda.lo, 1e-3);
  const double t0 = grid.tau.at(0) - 0.5 * dt, t1 = grid.tau.at(grid.tau.n - 1) + 0.5 * dt;
  const double l0 = grid.lambda.at(0) - 0.5 * dl, l1 = grid.lambda.at(grid.lambda.n - 1) + 0.5 * dl;
  auto px = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * (kRight - kLeft); };
  auto py = [&](double l) { return kBottom - (l - l0) / (l1 - l0) * (kBottom - kTop); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<g shape-rendering=\"crispEdges\">\n";
  for (int j = 0; j < grid.lambda.n; ++j) {
    for (int i = 0; i < grid.tau.n; ++i) {
      const double t = grid.tau.at(i), l = grid.lambda.at(j);
      const double x = px(t - 0.5 * dt), y = py(l + 0.5 * dl);
      out << "<rect x=\"" << num(x, "%.3f") << "\" y=\"" << num(y, "%.3f") << "\" width=\""
          << num(px(t + 0.5 * dt) - x, "%.3f") << "\" height=\"" << num(py(l - 0.5 * dl) - y, "%.3f")
          << "\" fill=\"" << color(grid.cell(i, j).label) << "\"/>\n";
    }
  }
  out << "</g>\n";

  // kappa0 tau^3 e^{lambda tau} = 84.2 solved for lambda.
  const double k0 = compute_kappa0();
  std::string path;
  bool pen = false;
  for (int s = 0; s <= 400; ++s) {
    const double t = t0 + (t1 - t0) * s / 400.0;
    const double l = t > 0.0 ? std::log(kFrequencyBound / (k0 * t * t * t)) / t : l1 + 1.0;
    if (l < l0 || l > l1) {
      pen = false;
      continue;
    }
    path += (pen ? " L" : " M") + num(px(t), "%.2f") + ' ' + num(py(l), "%.2f");
    pen = true;
  }
  if (!path.empty()) out << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft << "\" height=\""
      << kBottom - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = t0 + (t1 - t0) * k / 5.0, l = l0 + (l1 - l0) * k / 5.0;
    out << "<line x1=\"" << num(px(t), "%.2f") << "\" y1=\"" << kBottom << "\" x2=\"" << num(px(t), "%.2f")
        << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(t), "%.2f") << "\" y=\"" << kBottom + 20 << "\" text-anchor=\"middle\">"
        << num(t, "%.2f") << "</text>\n";
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(l), "%.2f") << "\" x2=\"" << kLeft << "\" y2=\""
        << num(py(l), "%.2f") << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(l) + 4, "%.2f") << "\" text-anchor=\"end\">"
        << num(l, "%.2f") << "</text>\n";
  }
  out << "<text x=\"" << 0.5 * (kLeft + kRight) << "\" y=\"" << kBottom + 45
      << "\" text-anchor=\"middle\" font-size=\"16\">&#964;</text>\n";
  out << "<text x=\"20\" y=\"" << 0.5 * (kTop + kBottom) << "\" text-anchor=\"middle\" font-size=\"16\">&#955;</text>\n";

  const struct {
    const char* fill;
    const char* text;
  } legend[] = {{"#1f77b4", "StablePoint"}, {"#ff7f0e", "StablePeriodicOrbit"}, {"#cccccc", "Uncertified"}};
  double y = kTop + 10;
  for (const auto& e : legend) {
    out << "<rect x=\"615\" y=\"" << y << "\" width=\"14\" height=\"14\" fill=\"" << e.fill << "\" stroke=\"black\"/>\n";
    out << "<text x=\"635\" y=\"" << y + 12 << "\">" << e.text << "</text>\n";
    y += 22;
  }
  out << "<line x1=\"615\" y1=\"" << y + 7 << "\" x2=\"629\" y2=\"" << y + 7 << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  out << "<text x=\"635\" y=\"" << y + 12 << "\">&#954;&#8320;&#964;&#179;e^(&#955;&#964;) = 84.2</text>\n";
  out << "</g>\n</svg>\n";
}

}  // namespace pbcert::goodwin
