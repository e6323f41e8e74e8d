#include "picres/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "picres/errors.hpp"

namespace picres {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b == e) return false;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && ptr == e;
}

std::string row_error(const std::string& path, int row, const std::string& what) {
  return path + ": row " + std::to_string(row) + ": " + what;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IOError, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::IOError, "write failed for '" + path + "'");
}

ClaimsTriangle read_triangle_csv(const std::string& path) {
  std::stringstream ss(read_text(path));
  std::string line;
  if (!std::getline(ss, line)) throw Error(ErrorKind::ParseError, path + ": empty file");
  const auto header = split_csv(line);
  if (header != std::vector<std::string>{"accident", "development", "source", "value"})
    throw Error(ErrorKind::ParseError, row_error(path, 1, "header must be accident,development,source,value"));
  std::vector<RawCell> raw;
  int row = 1;
  while (std::getline(ss, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw Error(ErrorKind::ParseError, row_error(path, row, "expected 4 fields"));
    double a, d, v;
    if (!parse_number(f[0], a) || !parse_number(f[1], d) || !parse_number(f[3], v) || a != static_cast<int>(a) ||
        d != static_cast<int>(d))
      throw Error(ErrorKind::ParseError, row_error(path, row, "malformed number"));
    Source s;
    if (f[2] == "P")
      s = Source::P;
    else if (f[2] == "I")
      s = Source::I;
    else
      throw Error(ErrorKind::ParseError, row_error(path, row, "source must be P or I"));
    raw.push_back({static_cast<int>(a), static_cast<int>(d), s, v});
  }
  return validate_triangle(raw);
}

std::string triangle_csv(const ClaimsTriangle& tri) {
  std::string out = "accident,development,source,value\n";
  char buf[128];
  for (const auto& c : tri.cells()) {
    std::snprintf(buf, sizeof buf, "%d,%d,%c,%.17g\n", c.accident, c.development, source_char(c.source), c.value);
    out += buf;
  }
  return out;
}

std::string trace_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t k = 0; k < names.size(); ++k) out += (k ? "," : "") + names[k];
  out += "\n";
  char buf[64];
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.17g", k ? "," : "", r[k]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

TraceFile read_trace_csv(const std::string& path) {
  const std::string text = read_text(path);
  std::stringstream ss(text);
  std::string line;
  TraceFile t;
  if (!std::getline(ss, line) || line.empty()) throw Error(ErrorKind::ParseError, row_error(path, 1, "missing header"));
  t.names = split_csv(line);
  int row = 1;
  while (std::getline(ss, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != t.names.size())
      throw Error(ErrorKind::ParseError, row_error(path, row, "expected " + std::to_string(t.names.size()) +
                                                                  " fields, found " + std::to_string(f.size())));
    std::vector<double> r(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
      if (!parse_number(f[k], r[k])) throw Error(ErrorKind::ParseError, row_error(path, row, "malformed number"));
    t.rows.push_back(std::move(r));
  }
  if (!text.empty() && text.back() != '\n')
    throw Error(ErrorKind::ParseError, row_error(path, row, "truncated final row"));
  return t;
}

}  // namespace picres
