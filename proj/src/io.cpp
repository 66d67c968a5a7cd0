#include "anosov_lab/io.hpp"

#include <openssl/sha.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anosov_lab/errors.hpp"

namespace alab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string content_hash(std::string_view content) {
  std::string obj = "blob " + std::to_string(content.size());
  obj.push_back('\0');
  obj.append(content);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(obj.data()), obj.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : digest) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  }
  return out;
}

void Metadata::write(std::ostream& os, std::string_view comment) const {
  for (const auto& [k, v] : entries) os << comment << k << ": " << v << '\n';
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) {
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
  os_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) os_ << ',';
  first_ = false;
  if (s.find_first_of(",\"\n") != std::string::npos) {
    os_ << '"';
    for (char c : s) os_ << (c == '"' ? "\"\"" : std::string(1, c));
    os_ << '"';
  } else {
    os_ << s;
  }
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  os_ << '\n';
  first_ = true;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable read_csv(std::string_view text) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    for (auto& c : cells) c = trim(c);
    if (t.header.empty()) {
      t.header = cells;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    auto pos = line.find_first_of("=:");
    if (pos == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, pos))] = trim(line.substr(pos + 1));
  }
  return kv;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("short write to '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" points=\"";
  for (const auto& [x, y] : pts) os << x << ',' << y << ' ';
  os << "\"/>\n";
  body_ += os.str();
}

void SvgPlot::circle(double x, double y, double r, const std::string& fill) {
  std::ostringstream os;
  os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r << "\" fill=\"" << fill << "\"/>\n";
  body_ += os.str();
}

void SvgPlot::text(double x, double y, const std::string& s, double size) {
  std::ostringstream os;
  os << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size << "\" font-family=\"monospace\">";
  for (char c : s) {
    if (c == '<') os << "&lt;";
    else if (c == '>') os << "&gt;";
    else if (c == '&') os << "&amp;";
    else os << c;
  }
  os << "</text>\n";
  body_ += os.str();
}

void SvgPlot::line(double x0, double y0, double x1, double y1, const std::string& stroke, double width) {
  std::ostringstream os;
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1 << "\" stroke=\"" << stroke
     << "\" stroke-width=\"" << width << "\"/>\n";
  body_ += os.str();
}

std::string SvgPlot::str(const std::string& comment) const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
     << w_ << ' ' << h_ << "\">\n";
  if (!comment.empty()) {
    std::string safe = comment;
    for (std::size_t p; (p = safe.find("--")) != std::string::npos;) safe.replace(p, 2, "- ");
    os << "<!--\n" << safe << "-->\n";
  }
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" << body_ << "</svg>\n";
  return os.str();
}

}  // namespace alab
