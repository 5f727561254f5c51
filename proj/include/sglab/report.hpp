#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sglab {

// shortest round-trip decimal form; every numeric cell in the CSV output
// goes through here so reruns are byte identical
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows.push_back(std::move(row));
    }

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            out += columns[i];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += row[i];
            }
            out += '\n';
        }
        return out;
    }
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

struct SvgPlotOptions {
    std::string title;
    bool log_x = false;
    bool log_y = false;
};

// single-series line plot, 640 x 480, fixed margins; points with nonpositive
// coordinates are dropped when the corresponding axis is logarithmic
inline std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                                 const SvgPlotOptions& opts = {}) {
    if (xs.size() != ys.size()) throw std::invalid_argument("svg_line_plot: length mismatch");
    std::vector<double> px, py;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (opts.log_x && !(xs[i] > 0.0)) continue;
        if (opts.log_y && !(ys[i] > 0.0)) continue;
        px.push_back(opts.log_x ? std::log10(xs[i]) : xs[i]);
        py.push_back(opts.log_y ? std::log10(ys[i]) : ys[i]);
    }
    const double width = 640.0, height = 480.0, margin = 60.0;
    double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
    if (!px.empty()) {
        xlo = xhi = px[0];
        ylo = yhi = py[0];
        for (std::size_t i = 1; i < px.size(); ++i) {
            xlo = std::min(xlo, px[i]);
            xhi = std::max(xhi, px[i]);
            ylo = std::min(ylo, py[i]);
            yhi = std::max(yhi, py[i]);
        }
    }
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (yhi <= ylo) yhi = ylo + 1.0;
    const auto sx = [&](double x) {
        return margin + (x - xlo) / (xhi - xlo) * (width - 2.0 * margin);
    };
    const auto sy = [&](double y) {
        return height - margin - (y - ylo) / (yhi - ylo) * (height - 2.0 * margin);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        svg += "<text x=\"320\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">" +
               opts.title + "</text>\n";
    svg += "<line x1=\"" + format_g6(margin) + "\" y1=\"" + format_g6(height - margin) +
           "\" x2=\"" + format_g6(width - margin) + "\" y2=\"" + format_g6(height - margin) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_g6(margin) + "\" y1=\"" + format_g6(margin) + "\" x2=\"" +
           format_g6(margin) + "\" y2=\"" + format_g6(height - margin) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xlo + (xhi - xlo) * k / 4.0;
        const double fy = ylo + (yhi - ylo) * k / 4.0;
        const std::string lx = (opts.log_x ? "1e" : "") + format_g6(opts.log_x ? fx : fx);
        const std::string ly = (opts.log_y ? "1e" : "") + format_g6(opts.log_y ? fy : fy);
        svg += "<text x=\"" + format_g6(sx(fx)) + "\" y=\"" + format_g6(height - margin + 20.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + lx +
               "</text>\n";
        svg += "<text x=\"" + format_g6(margin - 8.0) + "\" y=\"" + format_g6(sy(fy) + 4.0) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + ly +
               "</text>\n";
    }
    if (!px.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < px.size(); ++i) {
            if (i) svg += ' ';
            svg += format_g6(sx(px[i])) + "," + format_g6(sy(py[i]));
        }
        svg += "\"/>\n";
        for (std::size_t i = 0; i < px.size(); ++i)
            svg += "<circle cx=\"" + format_g6(sx(px[i])) + "\" cy=\"" + format_g6(sy(py[i])) +
                   "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace sglab
