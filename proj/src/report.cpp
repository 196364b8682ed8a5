#include "packlab/report.hpp"

#include "packlab/error.hpp"

namespace packlab {

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : out_(path), width_(header.size()) {
  if (!out_) throw Error(ErrorCode::IO_ERROR, "cannot open " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorCode::IO_ERROR, "csv row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(cells[i]);
  }
  out_ << '\n';
}

std::string CsvWriter::escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_dec(const Real& r) { return r.dec(17); }
std::string csv_hex(const Real& r) { return r.hex(); }

nlohmann::json real_json(const Real& r) {
  return nlohmann::json{{"hex", r.hex()}, {"approx", r.to_double()}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IO_ERROR, "cannot open " + path);
  out << content;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace packlab
