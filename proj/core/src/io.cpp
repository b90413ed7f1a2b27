#include "geogauss/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "geogauss/errors.hpp"

namespace geogauss {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_string(const Matrix& rows, const std::vector<std::string>& header) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols()) {
    throw InvalidArgument("csv header has " + std::to_string(header.size()) + " columns, data has " +
                          std::to_string(rows.cols()));
  }
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) out += ',';
      out += format_double(rows(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string csv_string(const Matrix& rows) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  return csv_string(rows, header);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path, "empty csv file");
  {
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) table.header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw ConfigError(path, "non-numeric csv cell '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != table.header.size()) throw ConfigError(path, "ragged csv row");
    rows.push_back(std::move(row));
  }
  table.rows.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return table;
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

Vector vector_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a number or non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field, "expected numeric entries");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a number or array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ConfigError(field, "expected an array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(field, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(field, "expected numeric entries");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const VectorRef& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

nlohmann::json matrix_to_json(const MatrixRef& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  auto parse = [&](const std::string& cell) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first < last && *first == ' ') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw ConfigError(field, "cannot parse number '" + cell + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ':')) parts.push_back(cell);
    if (parts.size() != 3) throw ConfigError(field, "range must be start:stop:count");
    const double a = parse(parts[0]);
    const double b = parse(parts[1]);
    const double count = parse(parts[2]);
    if (count < 1 || count != std::floor(count)) throw ConfigError(field, "range count must be a positive integer");
    const int n = static_cast<int>(count);
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse(cell));
  if (out.empty()) throw ConfigError(field, "empty number list");
  return out;
}

}  // namespace geogauss
