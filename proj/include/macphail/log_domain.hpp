#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace macphail {

// |v|^p with the grid's common exponents fast-pathed; generic pow is the
// dominant cost of coordinate-streaming norms otherwise.
inline double abs_pow(double v, double p) {
  double a = std::abs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

inline double abs_pow(const std::complex<double>& v, double p) {
  if (p == 2.0) return std::norm(v);
  double a = std::abs(v);
  if (p == 1.0) return a;
  return std::pow(a, p);
}

// Running sum of positive terms held in the log domain. Exponents here reach
// k(k-1)*log(alpha) and overflow linear doubles around k = 6, so sums of
// term norms, power series and subset-norm contributions accumulate as logs.
struct LogSum {
  double ln = -std::numeric_limits<double>::infinity();

  bool empty() const { return std::isinf(ln) && ln < 0; }

  // add a term given by its natural log
  void add_ln(double term_ln) {
    if (std::isinf(term_ln) && term_ln < 0) return;
    if (empty()) {
      ln = term_ln;
      return;
    }
    double hi = std::max(ln, term_ln);
    double lo = std::min(ln, term_ln);
    ln = hi + std::log1p(std::exp(lo - hi));
  }

  double linear() const { return std::exp(ln); }
};

inline double ln_of_alpha(uint64_t alpha) { return std::log(static_cast<double>(alpha)); }

// alpha^u for a log_alpha exponent u; exp2 keeps alpha = 2 exact.
inline double pow_alpha(uint64_t alpha, double u) {
  if (alpha == 2) return std::exp2(u);
  return std::pow(static_cast<double>(alpha), u);
}

// natural log -> log_alpha units
inline double to_log_alpha(double ln, uint64_t alpha) { return ln / ln_of_alpha(alpha); }

}  // namespace macphail
