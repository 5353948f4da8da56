#pragma once

#include <map>
#include <string>
#include <vector>

#include "lpci/common.hpp"

namespace lpci {

/// Columnar data file with header x1..x{dx}, z1..z{dz}, y1..y{dy}; all
/// values finite, comma-delimited, '.' decimal separator.
struct DataFile {
  Matrix x;
  Matrix z;
  Matrix y;
};

/// Parses a data CSV; throws DataFormatError naming the offending row or
/// column on malformed headers, missing values, or non-finite cells.
DataFile read_data_csv(const std::string& path);

/// Writes a dataset in the data CSV format with round-trip-exact doubles.
void write_data_csv(const std::string& path, const MatrixRef& x, const MatrixRef& z,
                    const MatrixRef& y);

/// Flat key = value configuration with '#' comments; lists are
/// comma-separated.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string require(const std::string& key) const;  // throws naming the key
  std::string get_or(const std::string& key, const std::string& fallback) const;

  static std::vector<std::string> split_list(const std::string& value);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace lpci
