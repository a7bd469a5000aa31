#include "mmab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmab {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Round tick step to 1/2/5 * 10^n.
double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step = 10.0;
    if (norm <= 1.0) step = 1.0;
    else if (norm <= 2.0) step = 2.0;
    else if (norm <= 5.0) step = 5.0;
    return step * mag;
}

} // namespace

void emit_plot(const AggregateCurve& curve, const std::string& path, const std::string& title) {
    if (curve.slots.empty()) throw IoError("emit_plot: empty curve");
    if (path.size() < 4 || path.substr(path.size() - 4) != ".svg")
        throw ConfigError("emit_plot: unsupported plot format (use a .svg path): " + path);

    const double x_max = static_cast<double>(curve.slots.back());
    double y_max = 0.0;
    for (double v : curve.upper95) y_max = std::max(y_max, v);
    for (double v : curve.mean) y_max = std::max(y_max, v);
    if (y_max <= 0.0) y_max = 1.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double slot) { return kLeft + slot / x_max * plot_w; };
    auto sy = [&](double v) { return kTop + plot_h - v / (y_max * 1.05) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // confidence band
    if (curve.ci_defined) {
        svg << "<polygon fill=\"#4682b4\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < curve.slots.size(); ++i)
            svg << sx(static_cast<double>(curve.slots[i])) << ',' << sy(curve.upper95[i]) << ' ';
        for (std::size_t i = curve.slots.size(); i-- > 0;)
            svg << sx(static_cast<double>(curve.slots[i])) << ',' << sy(curve.lower95[i]) << ' ';
        svg << "\"/>\n";
    }

    // mean curve
    svg << "<polyline fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < curve.slots.size(); ++i)
        svg << sx(static_cast<double>(curve.slots[i])) << ',' << sy(curve.mean[i]) << ' ';
    svg << "\"/>\n";

    // axes
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";

    const double x_step = nice_step(x_max, 6);
    for (double x = 0.0; x <= x_max * 1.0001; x += x_step) {
        svg << "<line x1=\"" << sx(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << sx(x)
            << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << sx(x) << "\" y=\"" << kTop + plot_h + 22
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << label(x) << "</text>\n";
    }
    const double y_step = nice_step(y_max * 1.05, 6);
    for (double y = 0.0; y <= y_max * 1.05; y += y_step) {
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(y) << "\" x2=\"" << kLeft
            << "\" y2=\"" << sy(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 10 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << label(y)
            << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">slot</text>\n";
    svg << "<text x=\"22\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        << "transform=\"rotate(-90 22 " << kTop + plot_h / 2
        << ")\">cumulative regret</text>\n";
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << svg.str();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace mmab
