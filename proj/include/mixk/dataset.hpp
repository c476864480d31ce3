// Apache License, Version 2.0, refer to LICENSE.txt
//
// Plain-text datasets (one value per line, '#' comments) and CSV output with
// a fixed, locale-independent number format.

#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

namespace mixk {

struct Dataset {
  std::string source;
  std::vector<double> values;
  double mean = 0.0;
  double variance = 0.0;  // sample variance s^2 with divisor n - 1

  int n() const { return static_cast<int>(values.size()); }
};

// Blank lines and lines starting with '#' are skipped. Throws
// std::runtime_error naming the line of any non-numeric or non-finite entry,
// and when fewer than two values are read.
Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset read_dataset(const std::filesystem::path& path);

// The sample mean rounded to one significant digit.
double default_mu(double mean);

// Decimal, 12 significant digits, '.' separator.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long value);
  CsvWriter& cell(int value) { return cell(static_cast<long>(value)); }
  void end_row();

 private:
  std::ofstream out_;
  std::string row_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
};

}  // namespace mixk
