#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geogauss/types.hpp"

namespace geogauss {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

std::string csv_string(const Matrix& rows, const std::vector<std::string>& header);
/// Header x1,...,xd.
std::string csv_string(const Matrix& rows);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  Matrix rows;
};
CsvTable read_csv(const std::string& path);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

/// Accepts a number (1-vector) or an array of numbers.
Vector vector_from_json(const nlohmann::json& j, const std::string& field);
/// Accepts a number (1x1) or an array of equal-length rows.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json vector_to_json(const VectorRef& v);
nlohmann::json matrix_to_json(const MatrixRef& m);

/// "1,2,3" -> {1,2,3}; "a:b:n" -> n points from a to b inclusive.
std::vector<double> parse_number_list(const std::string& text, const std::string& field);

}  // namespace geogauss
