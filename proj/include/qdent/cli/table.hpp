#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qdent::cli {

/// Numeric CSV table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    /// Lines written verbatim after the data, each prefixed with "# ".
    std::vector<std::string> footnotes;

    void add_row(std::vector<double> row);
    std::string to_csv() const;
    std::size_t column(const std::string& name) const;

    /// Reads text produced by to_csv; footnote lines are kept.
    static CsvTable parse(std::string_view text);
};

struct PlotSeries {
    std::string column;
    std::string label;
};

/// Minimal SVG line chart of one or more columns against an x column, built
/// only from the CSV text it is given.
std::string svg_line_chart(std::string_view csv_text, const std::string& x_column,
                           const std::vector<PlotSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace qdent::cli
