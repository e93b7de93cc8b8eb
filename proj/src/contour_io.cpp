#include "piv/bounds.hpp"
#include "piv/json_writer.hpp"

namespace piv {

std::string contour_to_csv(const ContourGrid& grid) {
    std::string out = "y_t_un\\y_c_un";
    for (double c : grid.c_values) {
        out += ',';
        out += format_fixed(c, 6);
    }
    out += '\n';
    for (std::size_t i = 0; i < grid.t_values.size(); ++i) {
        out += format_fixed(grid.t_values[i], 6);
        for (std::size_t j = 0; j < grid.c_values.size(); ++j) {
            out += ',';
            out += format_fixed(grid.at(i, j), 6);
        }
        out += '\n';
    }
    return out;
}

std::string contour_to_json(const ContourGrid& grid) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.t_values.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < grid.c_values.size(); ++j) {
            row.push_back(grid.at(i, j));
        }
        rows.push_back(std::move(row));
    }
    nlohmann::json doc;
    doc["t_values"] = grid.t_values;
    doc["c_values"] = grid.c_values;
    doc["piv"] = std::move(rows);
    return dump_json(doc, 1) + "\n";
}

} // namespace piv
