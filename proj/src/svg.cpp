#include "hypatk/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <utility>

namespace hypatk::svg {

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::string raster_svg(const analysis::Raster& raster, int cell_px) {
    const int n = raster.resolution;
    const int size = n * cell_px;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
                      std::to_string(size) + "\" viewBox=\"0 0 " + std::to_string(size) + ' ' +
                      std::to_string(size) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int r = 0; r < n; ++r) {
        // Runs of equal labels become one rectangle.
        int c = 0;
        while (c < n) {
            const int label = raster.label(r, c);
            int end = c + 1;
            while (end < n && raster.label(r, end) == label) ++end;
            if (label >= 0) {
                out += "<rect x=\"" + std::to_string(c * cell_px) + "\" y=\"" + std::to_string(r * cell_px) +
                       "\" width=\"" + std::to_string((end - c) * cell_px) + "\" height=\"" +
                       std::to_string(cell_px) + "\" fill=\"" +
                       kPalette[static_cast<std::size_t>(label) % kPaletteSize] + "\"/>\n";
            }
            c = end;
        }
    }
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (!raster.trace(r, c)) continue;
            out += "<rect x=\"" + std::to_string(c * cell_px) + "\" y=\"" + std::to_string(r * cell_px) +
                   "\" width=\"" + std::to_string(cell_px) + "\" height=\"" + std::to_string(cell_px) +
                   "\" fill=\"black\" fill-opacity=\"0.6\"/>\n";
        }
    }
    const double half = size / 2.0;
    out += "<circle cx=\"" + num(half) + "\" cy=\"" + num(half) + "\" r=\"" + num(half) +
           "\" fill=\"none\" stroke=\"black\"/>\n</svg>\n";
    return out;
}

std::string sweep_chart_svg(const analysis::SweepResult& sweep) {
    constexpr double width = 640, height = 420, left = 60, right = 200, top = 20, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double eps_max = 0.0;
    for (const auto& row : sweep.rows) eps_max = std::max(eps_max, row.epsilon);
    if (eps_max <= 0.0) eps_max = 1.0;
    auto px = [&](double eps) { return left + plot_w * eps / eps_max; };
    auto py = [&](double acc) { return top + plot_h * (1.0 - acc); };

    // Series keep first-appearance order.
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
    std::map<std::string, std::size_t> index;
    for (const auto& row : sweep.rows) {
        const std::string key =
            std::string(attacks::family_name(row.family)) + " / " + std::string(model::objective_name(row.objective));
        auto [it, inserted] = index.emplace(key, series.size());
        if (inserted) series.emplace_back(key, std::vector<std::pair<double, double>>{});
        series[it->second].second.emplace_back(row.epsilon, row.accuracy);
    }

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\" "
                      "font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(left + plot_w) + "\" y2=\"" +
           num(top + plot_h) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
           num(top + plot_h) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double acc = t / 4.0;
        out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(acc) + 4) + "\" text-anchor=\"end\">" + num(acc) +
               "</text>\n";
        const double eps = eps_max * t / 4.0;
        out += "<text x=\"" + num(px(eps)) + "\" y=\"" + num(top + plot_h + 16) + "\" text-anchor=\"middle\">" +
               num(eps) + "</text>\n";
    }
    out += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(height - 10) +
           "\" text-anchor=\"middle\">epsilon</text>\n";
    out += "<text x=\"14\" y=\"" + num(top + plot_h / 2) + "\" transform=\"rotate(-90 14 " + num(top + plot_h / 2) +
           ")\" text-anchor=\"middle\">accuracy</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        std::string points;
        for (const auto& [eps, acc] : series[s].second) {
            if (!points.empty()) points += ' ';
            points += num(px(eps)) + ',' + num(py(acc));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        const double ly = top + 12 + 14.0 * static_cast<double>(s);
        out += "<line x1=\"" + num(left + plot_w + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
               num(left + plot_w + 28) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\"/>\n";
        out += "<text x=\"" + num(left + plot_w + 32) + "\" y=\"" + num(ly) + "\">" + series[s].first + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace hypatk::svg
