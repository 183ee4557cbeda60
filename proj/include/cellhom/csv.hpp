#pragma once

#include <string>
#include <vector>

namespace cellhom {

// Minimal RFC-4180 writer: CRLF line endings, quoting only when a field
// contains a comma, quote, or line break.
class CsvWriter {
 public:
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return m_out; }
  void write_file(const std::string& path) const;

 private:
  std::string m_out;
};

}  // namespace cellhom
