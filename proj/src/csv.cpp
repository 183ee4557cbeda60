#include "cellhom/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cellhom/numeric.hpp"

namespace cellhom {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

bool needs_quoting(const std::string& f) {
  return f.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quoted(const std::string& f) {
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) m_out += ',';
    m_out += needs_quoting(fields[i]) ? quoted(fields[i]) : fields[i];
  }
  m_out += "\r\n";
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(m_out.data(), static_cast<std::streamsize>(m_out.size()));
}

}  // namespace cellhom
