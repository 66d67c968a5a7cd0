#pragma once

#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace alab {

// Round-trip decimal form (17 significant digits).
std::string format_double(double x);

// Git blob object id (SHA-1 of "blob <len>\0<content>") as lowercase hex.
std::string content_hash(std::string_view content);

// Metadata block written at the top of every artifact as `# key: value` lines.
struct Metadata {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value) { entries.emplace_back(key, format_double(value)); }
  void write(std::ostream& os, std::string_view comment = "# ") const;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // -1 when absent
};
// Reads a CSV produced by CsvWriter (comment lines starting with '#' are skipped).
CsvTable read_csv(std::string_view text);

// Key-value configuration: `key = value` or `key: value` lines, '#' comments.
std::map<std::string, std::string> parse_key_values(std::string_view text);

std::string read_file(const std::string& path);
// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::string& path, std::string_view content);

// Minimal SVG document builder.
class SvgPlot {
 public:
  SvgPlot(double width, double height) : w_(width), h_(height) {}
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width = 1.0);
  void circle(double x, double y, double r, const std::string& fill);
  void text(double x, double y, const std::string& s, double size = 12);
  void line(double x0, double y0, double x1, double y1, const std::string& stroke, double width = 1.0);
  std::string str(const std::string& comment = {}) const;

 private:
  double w_, h_;
  std::string body_;
};

}  // namespace alab
