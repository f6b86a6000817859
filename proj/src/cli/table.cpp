#include "qdent/cli/table.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "qdent/errors.hpp"

namespace qdent::cli {

void CsvTable::add_row(std::vector<double> row) {
    if (row.size() != header.size())
        throw DimensionMismatch(fmt::format("row has {} cells, header has {}", row.size(), header.size()));
    rows.push_back(std::move(row));
}

std::string CsvTable::to_csv() const {
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out += fmt::format("{}{:.10g}", k ? "," : "", row[k]);
        out += '\n';
    }
    for (const auto& note : footnotes) out += "# " + note + '\n';
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument(fmt::format("no column named '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable CsvTable::parse(std::string_view text) {
    CsvTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            table.footnotes.push_back(line.substr(2));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        table.add_row(std::move(row));
    }
    return table;
}

std::string svg_line_chart(std::string_view csv_text, const std::string& x_column,
                           const std::vector<PlotSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    const CsvTable table = CsvTable::parse(csv_text);
    const std::size_t xc = table.column(x_column);
    constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 55;
    constexpr std::array<const char*, 6> colours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& row : table.rows) {
        x_min = std::min(x_min, row[xc]);
        x_max = std::max(x_max, row[xc]);
        for (const auto& s : series) {
            const double y = row[table.column(s.column)];
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (table.rows.empty()) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (width - left - right); };
    auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * (height - top - bottom); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{3}</text>\n",
        width, height, width / 2, title);
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                       top, width - left - right, height - top - bottom);
    for (int k = 0; k <= 4; ++k) {
        const double xv = x_min + (x_max - x_min) * k / 4.0;
        const double yv = y_min + (y_max - y_min) * k / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"middle\">{:.3g}</text>\n",
                           px(xv), height - bottom + 16, xv);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"end\">{:.3g}</text>\n",
                           left - 6, py(yv) + 4, yv);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"13\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       left + (width - left - right) / 2, height - 12, x_label);
    svg += fmt::format("<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"13\" "
                       "text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
                       top + (height - top - bottom) / 2, top + (height - top - bottom) / 2, y_label);

    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::size_t yc = table.column(series[s].column);
        std::string points;
        for (const auto& row : table.rows) points += fmt::format("{:.2f},{:.2f} ", px(row[xc]), py(row[yc]));
        const char* colour = colours[s % colours.size()];
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                           points);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
                           "fill=\"{}\">{}</text>\n",
                           width - right - 150, top + 16 + 16 * static_cast<double>(s), colour, series[s].label);
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace qdent::cli
