#include "lpci/data_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lpci {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

// Counts a run of columns named prefix1, prefix2, ... starting at `pos`.
int count_block(const std::vector<std::string>& header, std::size_t& pos, char prefix) {
  int count = 0;
  while (pos < header.size()) {
    const std::string name = trim(header[pos]);
    if (name.size() < 2 || name[0] != prefix) break;
    const std::string index = name.substr(1);
    if (index != std::to_string(count + 1)) break;
    ++count;
    ++pos;
  }
  return count;
}

double parse_cell(const std::string& field, int data_row, const std::string& column) {
  const std::string text = trim(field);
  if (text.empty()) {
    throw DataFormatError("row " + std::to_string(data_row) + ", column " + column +
                          ": missing value");
  }
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw DataFormatError("row " + std::to_string(data_row) + ", column " + column +
                          ": cannot parse '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw DataFormatError("row " + std::to_string(data_row) + ", column " + column +
                          ": non-finite value");
  }
  return value;
}

}  // namespace

DataFile read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataFormatError("empty data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  std::size_t pos = 0;
  const int dx = count_block(header, pos, 'x');
  const int dz = count_block(header, pos, 'z');
  const int dy = count_block(header, pos, 'y');
  if (dx < 1 || dz < 1 || dy < 1 || pos != header.size()) {
    throw DataFormatError("header must name columns x1..x{dx}, z1..z{dz}, y1..y{dy}");
  }
  const int width = dx + dz + dy;

  std::vector<std::vector<double>> rows;
  int data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++data_row;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != width) {
      throw DataFormatError("row " + std::to_string(data_row) + ": expected " +
                            std::to_string(width) + " fields, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> parsed(static_cast<std::size_t>(width));
    for (int c = 0; c < width; ++c) {
      parsed[static_cast<std::size_t>(c)] =
          parse_cell(fields[static_cast<std::size_t>(c)], data_row, trim(header[c]));
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) throw DataFormatError("data file has no rows: " + path);

  DataFile data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.x.resize(n, dx);
  data.z.resize(n, dz);
  data.y.resize(n, dy);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int c = 0; c < dx; ++c) data.x(i, c) = row[static_cast<std::size_t>(c)];
    for (int c = 0; c < dz; ++c) data.z(i, c) = row[static_cast<std::size_t>(dx + c)];
    for (int c = 0; c < dy; ++c) data.y(i, c) = row[static_cast<std::size_t>(dx + dz + c)];
  }
  return data;
}

void write_data_csv(const std::string& path, const MatrixRef& x, const MatrixRef& z,
                    const MatrixRef& y) {
  if (x.rows() != z.rows() || x.rows() != y.rows()) {
    throw DimensionMismatch("write_data_csv: blocks have different row counts");
  }
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot open for writing: " + path);

  for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << 'x' << (c + 1);
  for (Eigen::Index c = 0; c < z.cols(); ++c) out << ",z" << (c + 1);
  for (Eigen::Index c = 0; c < y.cols(); ++c) out << ",y" << (c + 1);
  out << '\n';

  char buf[40];
  const auto put = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (lead_comma) out << ',';
    out << buf;
  };
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) put(x(i, c), c > 0);
    for (Eigen::Index c = 0; c < z.cols(); ++c) put(z(i, c), true);
    for (Eigen::Index c = 0; c < y.cols(); ++c) put(y(i, c), true);
    out << '\n';
  }
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig config;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataFormatError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw DataFormatError("config line " + std::to_string(line_no) + ": empty key");
    }
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw DataFormatError("missing required config key: " + key);
  }
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::vector<std::string> KeyValueConfig::split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace lpci
