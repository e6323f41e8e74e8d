#pragma once

#include <string>
#include <vector>

#include "picres/triangle.hpp"

namespace picres {

// Long format: accident,development,source,value with source P or I.
ClaimsTriangle read_triangle_csv(const std::string& path);
std::string triangle_csv(const ClaimsTriangle& tri);

struct TraceFile {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
};

std::string trace_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows);
TraceFile read_trace_csv(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

}  // namespace picres
