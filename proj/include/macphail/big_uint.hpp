#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macphail {

// Arbitrary-precision unsigned integer, little-endian base-2^32 limbs.
// Covers exactly what block indexing needs: series indices j, block starts
// j_k = alpha^{k(k-1)} (which leave uint64 range at k=9 for alpha=2), exact
// comparisons, and decimal I/O for table output.
class BigUInt {
 public:
  BigUInt() = default;

  BigUInt(uint64_t v) {
    if (v != 0) {
      limbs_.push_back(static_cast<uint32_t>(v & 0xffffffffu));
      if (v >> 32) limbs_.push_back(static_cast<uint32_t>(v >> 32));
    }
  }

  static BigUInt from_decimal(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty decimal literal");
    BigUInt out;
    for (char c : s) {
      if (c < '0' || c > '9')
        throw std::invalid_argument("bad decimal digit in '" + std::string(s) + "'");
      out.mul_u32(10);
      out += BigUInt(static_cast<uint64_t>(c - '0'));
    }
    return out;
  }

  // base^exponent by binary exponentiation.
  static BigUInt power(uint64_t base, uint64_t exponent) {
    BigUInt result(1);
    BigUInt sq(base);
    while (exponent != 0) {
      if (exponent & 1) result *= sq;
      exponent >>= 1;
      if (exponent != 0) sq *= sq;
    }
    return result;
  }

  bool is_zero() const { return limbs_.empty(); }

  bool fits_uint64() const { return limbs_.size() <= 2; }

  uint64_t to_uint64() const {
    if (!fits_uint64()) throw std::overflow_error("BigUInt does not fit uint64");
    uint64_t v = 0;
    if (limbs_.size() > 1) v = static_cast<uint64_t>(limbs_[1]) << 32;
    if (!limbs_.empty()) v |= limbs_[0];
    return v;
  }

  std::string to_decimal() const {
    if (is_zero()) return "0";
    BigUInt tmp = *this;
    std::string out;
    while (!tmp.is_zero()) {
      uint32_t rem = tmp.divmod_u32(1000000000u);
      for (int i = 0; i < 9; ++i) {
        out.push_back(static_cast<char>('0' + rem % 10));
        rem /= 10;
      }
    }
    while (out.size() > 1 && out.back() == '0') out.pop_back();
    std::reverse(out.begin(), out.end());
    return out;
  }

  size_t bit_length() const {
    if (is_zero()) return 0;
    uint32_t top = limbs_.back();
    size_t bits = 0;
    while (top) {
      ++bits;
      top >>= 1;
    }
    return (limbs_.size() - 1) * 32 + bits;
  }

  // log2 of the value; accurate to ~1 ulp (top 64 bits carried into the mantissa).
  double log2() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    size_t bl = bit_length();
    if (bl <= 64) return std::log2(static_cast<double>(to_uint64()));
    uint64_t top = 0;
    // collect the 64 most significant bits
    size_t shift = bl - 64;
    for (size_t i = 0; i < limbs_.size(); ++i) {
      size_t lo = i * 32;
      if (lo + 32 <= shift) continue;
      uint64_t limb = limbs_[i];
      if (lo >= shift)
        top |= limb << (lo - shift);
      else
        top |= limb >> (shift - lo);
    }
    return static_cast<double>(shift) + std::log2(static_cast<double>(top));
  }

  int compare(const BigUInt& o) const {
    if (limbs_.size() != o.limbs_.size())
      return limbs_.size() < o.limbs_.size() ? -1 : 1;
    for (size_t i = limbs_.size(); i-- > 0;) {
      if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
    }
    return 0;
  }

  BigUInt& operator+=(const BigUInt& o) {
    if (o.limbs_.size() > limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
    uint64_t carry = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
      uint64_t sum = carry + limbs_[i] + (i < o.limbs_.size() ? o.limbs_[i] : 0u);
      limbs_[i] = static_cast<uint32_t>(sum);
      carry = sum >> 32;
    }
    if (carry) limbs_.push_back(static_cast<uint32_t>(carry));
    return *this;
  }

  // Requires *this >= o.
  BigUInt& operator-=(const BigUInt& o) {
    if (compare(o) < 0) throw std::underflow_error("BigUInt subtraction underflow");
    int64_t borrow = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
      int64_t diff = static_cast<int64_t>(limbs_[i]) - borrow -
                     (i < o.limbs_.size() ? static_cast<int64_t>(o.limbs_[i]) : 0);
      borrow = diff < 0 ? 1 : 0;
      limbs_[i] = static_cast<uint32_t>(diff + (borrow << 32));
    }
    trim();
    return *this;
  }

  BigUInt& operator*=(const BigUInt& o) {
    if (is_zero() || o.is_zero()) {
      limbs_.clear();
      return *this;
    }
    std::vector<uint32_t> out(limbs_.size() + o.limbs_.size(), 0);
    for (size_t i = 0; i < limbs_.size(); ++i) {
      uint64_t carry = 0;
      uint64_t a = limbs_[i];
      for (size_t k = 0; k < o.limbs_.size(); ++k) {
        uint64_t cur = out[i + k] + a * o.limbs_[k] + carry;
        out[i + k] = static_cast<uint32_t>(cur);
        carry = cur >> 32;
      }
      size_t pos = i + o.limbs_.size();
      while (carry) {
        uint64_t cur = out[pos] + carry;
        out[pos] = static_cast<uint32_t>(cur);
        carry = cur >> 32;
        ++pos;
      }
    }
    limbs_ = std::move(out);
    trim();
    return *this;
  }

  BigUInt& mul_u32(uint32_t f) {
    if (f == 0) {
      limbs_.clear();
      return *this;
    }
    uint64_t carry = 0;
    for (auto& limb : limbs_) {
      uint64_t cur = static_cast<uint64_t>(limb) * f + carry;
      limb = static_cast<uint32_t>(cur);
      carry = cur >> 32;
    }
    while (carry) {
      limbs_.push_back(static_cast<uint32_t>(carry));
      carry >>= 32;
    }
    return *this;
  }

  // In-place quotient, returns remainder.
  uint32_t divmod_u32(uint32_t d) {
    if (d == 0) throw std::invalid_argument("BigUInt division by zero");
    uint64_t rem = 0;
    for (size_t i = limbs_.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | limbs_[i];
      limbs_[i] = static_cast<uint32_t>(cur / d);
      rem = cur % d;
    }
    trim();
    return static_cast<uint32_t>(rem);
  }

  friend BigUInt operator+(BigUInt a, const BigUInt& b) { return a += b; }
  friend BigUInt operator-(BigUInt a, const BigUInt& b) { return a -= b; }
  friend BigUInt operator*(BigUInt a, const BigUInt& b) { return a *= b; }
  friend bool operator==(const BigUInt& a, const BigUInt& b) { return a.compare(b) == 0; }
  friend bool operator!=(const BigUInt& a, const BigUInt& b) { return a.compare(b) != 0; }
  friend bool operator<(const BigUInt& a, const BigUInt& b) { return a.compare(b) < 0; }
  friend bool operator<=(const BigUInt& a, const BigUInt& b) { return a.compare(b) <= 0; }
  friend bool operator>(const BigUInt& a, const BigUInt& b) { return a.compare(b) > 0; }
  friend bool operator>=(const BigUInt& a, const BigUInt& b) { return a.compare(b) >= 0; }

 private:
  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }

  std::vector<uint32_t> limbs_;
};

}  // namespace macphail
