#pragma once

#include <string>

namespace cellhom {

// Compensated summation; keeps quadrature totals accurate to ~1e-16 relative
// even for ~1e6 terms.
class KahanSum {
 public:
  void add(double x) {
    double y = x - m_c;
    double t = m_sum + y;
    m_c = (t - m_sum) - y;
    m_sum = t;
  }
  double value() const { return m_sum; }

 private:
  double m_sum = 0.0;
  double m_c = 0.0;
};

// Shortest round-trip decimal representation (std::to_chars). Deterministic
// across runs; used for all CSV/JSON numeric output.
std::string format_double(double x);

}  // namespace cellhom
