#include "tabsynth/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tabsynth {

namespace {

constexpr int kW = 720, kH = 480;
constexpr int kMargin = 60;

struct Scale {
    double lo, hi;
    double to_px(double v, int px_lo, int px_hi) const {
        const double t = (v - lo) / (hi - lo);
        return px_lo + t * (px_hi - px_lo);
    }
};

Scale nice_scale(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

void axes(std::ostringstream& svg, const Scale& xs, const Scale& ys, const std::string& xlabel,
          const std::string& ylabel) {
    svg << "<rect x='" << kMargin << "' y='" << kMargin << "' width='" << (kW - 2 * kMargin)
        << "' height='" << (kH - 2 * kMargin) << "' fill='none' stroke='#444'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xs.lo + (xs.hi - xs.lo) * i / 5.0;
        const double px = xs.to_px(fx, kMargin, kW - kMargin);
        svg << "<line x1='" << px << "' y1='" << (kH - kMargin) << "' x2='" << px << "' y2='"
            << (kH - kMargin + 5) << "' stroke='#444'/>\n";
        svg << "<text x='" << px << "' y='" << (kH - kMargin + 20)
            << "' font-size='11' text-anchor='middle'>" << num(fx) << "</text>\n";
        const double fy = ys.lo + (ys.hi - ys.lo) * i / 5.0;
        const double py = ys.to_px(fy, kH - kMargin, kMargin);
        svg << "<line x1='" << (kMargin - 5) << "' y1='" << py << "' x2='" << kMargin << "' y2='" << py
            << "' stroke='#444'/>\n";
        svg << "<text x='" << (kMargin - 8) << "' y='" << (py + 4)
            << "' font-size='11' text-anchor='end'>" << num(fy) << "</text>\n";
    }
    svg << "<text x='" << (kW / 2) << "' y='" << (kH - 15) << "' font-size='13' text-anchor='middle'>"
        << xlabel << "</text>\n";
    svg << "<text x='18' y='" << (kH / 2) << "' font-size='13' text-anchor='middle' transform='rotate(-90 18 "
        << (kH / 2) << ")'>" << ylabel << "</text>\n";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    std::ostringstream os;
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (const auto& [x, y] : pts) os << x << "," << y << " ";
    os << "'/>\n";
    return os.str();
}

}  // namespace

std::string render_curves_svg(const std::vector<CurveRow>& curves) {
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    if (curves.empty()) {
        svg << "<text x='20' y='30'>no data</text>\n</svg>\n";
        return svg.str();
    }
    double lo = 0.0, hi = 0.0;
    for (const auto& r : curves) {
        lo = std::min({lo, r.f_u, r.f_r});
        hi = std::max({hi, r.f_u, r.f_r});
    }
    const Scale ys = nice_scale(lo, hi);
    const Scale xs = nice_scale(1.0, static_cast<double>(curves.back().epoch));
    axes(svg, xs, ys, "epoch", "objective value");
    std::vector<std::pair<double, double>> pu, pr;
    for (const auto& r : curves) {
        const double x = xs.to_px(static_cast<double>(r.epoch), kMargin, kW - kMargin);
        pu.emplace_back(x, ys.to_px(r.f_u, kH - kMargin, kMargin));
        pr.emplace_back(x, ys.to_px(r.f_r, kH - kMargin, kMargin));
    }
    svg << polyline(pu, "#1f77b4") << polyline(pr, "#d62728");
    svg << "<text x='" << (kW - kMargin - 150) << "' y='" << (kMargin + 16)
        << "' font-size='12' fill='#1f77b4'>utility</text>\n";
    svg << "<text x='" << (kW - kMargin - 150) << "' y='" << (kMargin + 32)
        << "' font-size='12' fill='#d62728'>risk (norm. TCAP)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string render_population_svg(const std::vector<PopulationPoint>& points) {
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    if (points.empty()) {
        svg << "<text x='20' y='30'>no data</text>\n</svg>\n";
        return svg.str();
    }
    double xlo = points[0].f_r, xhi = points[0].f_r, ylo = points[0].f_u, yhi = points[0].f_u;
    for (const auto& p : points) {
        xlo = std::min(xlo, p.f_r);
        xhi = std::max(xhi, p.f_r);
        ylo = std::min(ylo, p.f_u);
        yhi = std::max(yhi, p.f_u);
    }
    const Scale xs = nice_scale(xlo, xhi);
    const Scale ys = nice_scale(ylo, yhi);
    axes(svg, xs, ys, "risk (normalized TCAP)", "utility");
    double best_imp = points[0].improvement;
    for (const auto& p : points) best_imp = std::max(best_imp, p.improvement);
    for (const auto& p : points) {
        const double x = xs.to_px(p.f_r, kMargin, kW - kMargin);
        const double y = ys.to_px(p.f_u, kH - kMargin, kMargin);
        const bool chosen = p.improvement == best_imp;
        svg << "<circle cx='" << x << "' cy='" << y << "' r='5' fill='"
            << (chosen ? "#e6b800" : "#1f77b4") << "'/>\n";
        if (p.rank == 1)
            svg << "<circle cx='" << x << "' cy='" << y << "' r='9' fill='none' stroke='#444'/>\n";
        svg << "<text x='" << (x + 10) << "' y='" << (y + 4) << "' font-size='10'>"
            << num(p.improvement) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_run_plots(const std::filesystem::path& run_dir) {
    // curves.csv -> curves.svg
    std::ifstream curves_in(run_dir / "curves.csv");
    if (!curves_in) throw ParseError("plot: cannot open " + (run_dir / "curves.csv").string());
    std::vector<CurveRow> curves;
    std::string line;
    std::getline(curves_in, line);  // header
    while (std::getline(curves_in, line)) {
        if (line.empty()) continue;
        CurveRow row;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        row.epoch = std::stoul(field);
        std::getline(ss, field, ',');
        row.f_u = std::stod(field);
        std::getline(ss, field, ',');
        row.f_r = std::stod(field);
        std::getline(ss, field, ',');
        row.improvement = std::stod(field);
        curves.push_back(row);
    }
    std::ofstream(run_dir / "curves.svg") << render_curves_svg(curves);

    // population.json -> population.svg
    std::ifstream pop_in(run_dir / "population.json");
    if (!pop_in) throw ParseError("plot: cannot open " + (run_dir / "population.json").string());
    nlohmann::json pj;
    pop_in >> pj;
    std::vector<PopulationPoint> points;
    for (const auto& item : pj) {
        PopulationPoint p;
        p.f_u = item.at("f_u").get<double>();
        p.f_r = item.at("f_r").get<double>();
        p.rank = item.at("rank").get<int>();
        p.improvement = item.at("improvement_score").get<double>();
        points.push_back(p);
    }
    std::ofstream(run_dir / "population.svg") << render_population_svg(points);
}

}  // namespace tabsynth
