#include "admm/metrics.hpp"

#include "admm/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace admm {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

double parse_field(const std::string& field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad numeric field '" + field + "'");
  }
  return v;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_metrics_row(const IterationRecord& row) {
  std::string s = std::to_string(row.iteration) + ',' + format_double(row.wall_seconds) + ',' +
                  format_double(row.objective) + ',' + format_double(row.train_accuracy) + ',';
  if (row.test_accuracy) s += format_double(*row.test_accuracy);
  return s;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, bool with_method)
    : out_(path), with_method_(with_method) {
  if (!out_) throw InvalidArgument("cannot write '" + path.string() + "'");
  out_ << (with_method ? kCompareHeader : kMetricsHeader) << '\n' << std::flush;
}

void MetricsWriter::append(const IterationRecord& row, const std::string& method) {
  if (with_method_) out_ << method << ',';
  out_ << format_metrics_row(row) << '\n' << std::flush;
}

MetricsFile read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  bool with_method = false;
  if (line == kCompareHeader) {
    with_method = true;
  } else if (line != kMetricsHeader) {
    throw ParseError(1, "unexpected header '" + line + "'");
  }
  MetricsFile file;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = fields_of(line);
    const std::size_t expected = with_method ? 6 : 5;
    if (f.size() != expected) throw ParseError(line_no, "expected " + std::to_string(expected) + " fields");
    std::size_t k = 0;
    if (with_method) file.methods.push_back(f[k++]);
    IterationRecord r;
    r.iteration = static_cast<std::size_t>(parse_field(f[k++], line_no));
    r.wall_seconds = parse_field(f[k++], line_no);
    r.objective = parse_field(f[k++], line_no);
    r.train_accuracy = parse_field(f[k++], line_no);
    if (!f[k].empty()) r.test_accuracy = parse_field(f[k], line_no);
    file.rows.push_back(r);
  }
  return file;
}

}  // namespace admm
