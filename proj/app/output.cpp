#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace eqradar::cli {

std::size_t Dataset::column(const std::string& name) const
{
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError(fmt::format("no column '{}' in dataset", name));
    return static_cast<std::size_t>(it - columns.begin());
}

void write_csv(const Dataset& d, std::ostream& out)
{
    out << "# " << d.header << '\n';
    for (std::size_t i = 0; i < d.columns.size(); ++i) out << (i ? "," : "") << d.columns[i];
    out << '\n';
    for (const auto& c : d.curves) {
        out << "# series " << c.label << '\n';
        for (const auto& row : c.rows) {
            std::string line;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) line += ',';
                line += fmt::format("{:.17g}", row[i]);
            }
            out << line << '\n';
        }
    }
}

Dataset read_csv(std::istream& in)
{
    Dataset d;
    std::string line;
    int n = 0;
    auto fail = [&n](const std::string& what) { return IoError(fmt::format("malformed CSV, line {}: {}", n, what)); };
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# series ", 0) == 0) {
                if (d.columns.empty()) throw fail("series before the column header");
                d.curves.push_back({line.substr(9), {}, json::object()});
            } else if (d.header.empty() && d.columns.empty()) {
                d.header = line.size() > 2 ? line.substr(2) : "";
            }
            continue;
        }
        if (d.columns.empty()) {
            std::istringstream ss(line);
            std::string name;
            while (std::getline(ss, name, ',')) d.columns.push_back(name);
            continue;
        }
        if (d.curves.empty()) d.curves.push_back({"data", {}, json::object()});
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) throw fail(fmt::format("bad number '{}'", cell));
            row.push_back(v);
        }
        if (row.size() != d.columns.size())
            throw fail(fmt::format("{} fields for {} columns", row.size(), d.columns.size()));
        d.curves.back().rows.push_back(std::move(row));
    }
    if (d.columns.empty()) throw IoError("malformed CSV: no column header");
    return d;
}

std::vector<double> column_values(const Dataset& d, const Curve& c, const std::string& expr)
{
    const bool complement = expr.rfind("1-", 0) == 0;
    const std::size_t k = d.column(complement ? expr.substr(2) : expr);
    std::vector<double> v;
    v.reserve(c.rows.size());
    for (const auto& row : c.rows) v.push_back(complement ? 1.0 - row[k] : row[k]);
    return v;
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

std::vector<double> ticks(double lo, double hi)
{
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double x = std::ceil(lo / step) * step; x <= hi + 1e-9 * span; x += step) t.push_back(std::abs(x) < 1e-12 * span ? 0.0 : x);
    return t;
}

constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

}  // namespace

void write_svg(const Dataset& d, const PlotStyle& style, std::ostream& out)
{
    const std::string y_expr = style.y.empty() ? d.columns.back() : style.y;
    struct Line {
        std::vector<double> x, y;
        bool dashed;
        std::size_t color;
    };
    std::vector<Line> lines;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (std::size_t i = 0; i < d.curves.size(); ++i) {
        const auto& c = d.curves[i];
        if (c.rows.empty()) continue;
        const auto x = column_values(d, c, d.columns.front());
        std::vector<std::string> exprs{y_expr};
        if (!style.dashed.empty()) exprs.push_back(style.dashed);
        for (std::size_t k = 0; k < exprs.size(); ++k) {
            Line l{{}, {}, k == 1, i % std::size(palette)};
            const auto y = column_values(d, c, exprs[k]);
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (!std::isfinite(x[j]) || !std::isfinite(y[j])) continue;
                l.x.push_back(x[j]);
                l.y.push_back(y[j]);
                xlo = std::min(xlo, x[j]);
                xhi = std::max(xhi, x[j]);
                ylo = std::min(ylo, y[j]);
                yhi = std::max(yhi, y[j]);
            }
            if (!l.x.empty()) lines.push_back(std::move(l));
        }
    }
    if (lines.empty()) throw IoError("plot: no data");
    if (xhi == xlo) xlo -= 0.5, xhi += 0.5;
    if (yhi == ylo) {
        const double pad = std::max(0.5 * std::abs(ylo), 1e-12);
        ylo -= pad;
        yhi += pad;
    } else {
        const double pad = 0.04 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;
    }

    constexpr double W = 760, H = 500, left = 90, right = 200, top = 50, bottom = 70;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto sy = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };

    out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
                       "font-family=\"sans-serif\" font-size=\"12\">\n",
                       W, H, W, H);
    out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
    if (!style.title.empty())
        out << fmt::format("<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", left + pw / 2,
                           escape(style.title));

    out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    const auto xt = ticks(xlo, xhi), yt = ticks(ylo, yhi);
    for (double x : xt) out << fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\"/>\n", sx(x), top, top + ph);
    for (double y : yt) out << fmt::format("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\"/>\n", sy(y), left, left + pw);
    out << "</g>\n";
    out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                       pw, ph);
    for (double x : xt)
        out << fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", sx(x), top + ph + 18, x);
    for (double y : yt)
        out << fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", left - 6, sy(y) + 4, y);
    const std::string xl = style.x_label.empty() ? d.columns.front() : style.x_label;
    const std::string yl = style.y_label.empty() ? y_expr : style.y_label;
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, H - 25, escape(xl));
    out << fmt::format("<text transform=\"translate(22 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n", top + ph / 2,
                       escape(yl));

    for (const auto& l : lines) {
        std::string pts;
        for (std::size_t j = 0; j < l.x.size(); ++j) pts += fmt::format("{}{:.2f},{:.2f}", j ? " " : "", sx(l.x[j]), sy(l.y[j]));
        out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{} points=\"{}\"/>\n",
                           palette[l.color], l.dashed ? " stroke-dasharray=\"6 4\"" : "", pts);
    }

    const double lx = left + pw + 16;
    double ly = top + 8;
    for (std::size_t i = 0; i < d.curves.size(); ++i) {
        if (d.curves[i].rows.empty()) continue;
        out << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", lx, ly, lx + 24,
                           ly, palette[i % std::size(palette)]);
        out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 30, ly + 4, escape(d.curves[i].label));
        ly += 18;
    }
    if (!style.dashed.empty()) {
        out << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n", lx,
                           ly, lx + 24, ly);
        out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 30, ly + 4, escape(style.dashed));
    }
    out << "</svg>\n";
}

}  // namespace eqradar::cli
