#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace macphail {

// Scalar field of the construction. Complex pairs with the DFT kernel
// family, real with the Walsh family.
enum class Field { complex_dft, real_walsh };

inline const char* field_name(Field f) {
  return f == Field::complex_dft ? "complex-dft" : "real-walsh";
}

// Global construction parameters shared by every module.
struct Config {
  Field field = Field::complex_dft;
  double p = 2.0;                // lp exponent, 1 <= p <= 2
  double pstar = 2.0;            // conjugate exponent, infinity when p = 1
  uint64_t alpha = 2;            // block base, integer >= 2
  double tolerance = 1e-9;       // relative tolerance for certified bounds
};

// Thrown when an operation would exceed materialization/streaming budgets
// (e.g. coefficient enumeration of blocks past the stream limit).
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

inline double conjugate_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

inline Config make_config(Field field, double p, uint64_t alpha, double tolerance = 1e-9) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("p must lie in [1,2]");
  if (alpha < 2) throw std::invalid_argument("alpha must be an integer >= 2");
  if (field == Field::real_walsh && alpha != 2)
    throw std::invalid_argument("the real Walsh construction requires alpha = 2");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  Config cfg;
  cfg.field = field;
  cfg.p = p;
  cfg.pstar = conjugate_exponent(p);
  cfg.alpha = alpha;
  cfg.tolerance = tolerance;
  return cfg;
}

}  // namespace macphail
