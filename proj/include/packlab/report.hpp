#pragma once

// Output plumbing: CSV with full-precision hex-float twin columns and
// JSON value helpers. All writers are deterministic for fixed inputs.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "packlab/real.hpp"

namespace packlab {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  static std::string escape(const std::string& cell);

 private:
  std::ofstream out_;
  size_t width_;
};

// decimal convenience + bit-exact hex for one logical column
std::string csv_dec(const Real& r);
std::string csv_hex(const Real& r);

nlohmann::json real_json(const Real& r);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace packlab
