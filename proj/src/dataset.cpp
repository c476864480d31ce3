// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/dataset.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "mixk/model.hpp"

namespace mixk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
  Dataset d;
  d.source = source;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": not a finite number: '" +
                               text + "'");
    d.values.push_back(v);
  }
  if (d.values.size() < 2)
    throw std::runtime_error(source + ": need at least 2 observations, found " +
                             std::to_string(d.values.size()));
  d.mean = sample_mean(d.values);
  d.variance = sample_variance(d.values);
  return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

double default_mu(double mean) {
  if (mean == 0.0) return 0.0;
  const double scale = std::pow(10.0, std::floor(std::log10(std::fabs(mean))));
  return std::round(mean / scale) * scale;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (filled_ > 0) row_ += ',';
  row_ += text;
  ++filled_;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_number(value)); }

CsvWriter& CsvWriter::cell(long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("csv row has the wrong number of cells");
  out_ << row_ << '\n';
  row_.clear();
  filled_ = 0;
}

}  // namespace mixk
