#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include <gmpxx.h>

namespace nocpsn {

/// Probability of a single transition branch. Every branch probability in
/// these models is a product of 1/3, 2/3 and 1/2 factors, so a reduced
/// 64-bit fraction is exact.
struct BranchProb {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  static constexpr BranchProb one() { return {1, 1}; }

  constexpr BranchProb reduced() const {
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? *this : BranchProb{num / g, den / g};
  }
  constexpr BranchProb operator*(BranchProb o) const { return BranchProb{num * o.num, den * o.den}.reduced(); }
  constexpr BranchProb operator+(BranchProb o) const {
    return BranchProb{num * o.den + o.num * den, den * o.den}.reduced();
  }
  constexpr bool operator==(const BranchProb& o) const { return num * o.den == o.num * den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

using Rational = mpq_class;

/// Double accumulator with Neumaier compensation.
struct FloatMass {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

enum class ArithmeticMode : std::uint8_t { Rational, Float };

std::string to_string(ArithmeticMode m);
ArithmeticMode parse_arithmetic_mode(const std::string& text);

// Uniform mass operations used by the engines. Each mass type supplies
// one(), add_scaled(acc, m, p), add(acc, m), to_double(m) and is_zero(m).

inline Rational mass_one(const Rational*) { return Rational(1); }
inline FloatMass mass_one(const FloatMass*) { return FloatMass{1.0, 0.0}; }

inline void add_scaled(Rational& acc, const Rational& m, BranchProb p) {
  if (p.num == 1 && p.den == 1) {
    acc += m;
    return;
  }
  Rational t(m);
  mpz_mul_ui(t.get_num_mpz_t(), t.get_num_mpz_t(), static_cast<unsigned long>(p.num));
  mpz_mul_ui(t.get_den_mpz_t(), t.get_den_mpz_t(), static_cast<unsigned long>(p.den));
  t.canonicalize();
  acc += t;
}
inline void add_scaled(FloatMass& acc, const FloatMass& m, BranchProb p) { acc.add(m.value() * p.to_double()); }

inline void add(Rational& acc, const Rational& m) { acc += m; }
inline void add(FloatMass& acc, const FloatMass& m) { acc.add(m.value()); }

inline double to_double(const Rational& m) { return m.get_d(); }
inline double to_double(const FloatMass& m) { return m.value(); }

inline bool is_zero(const Rational& m) { return sgn(m) == 0; }
inline bool is_zero(const FloatMass& m) { return m.value() == 0.0; }

inline std::string exact_string(const Rational& m) { return m.get_str(); }

template <class Mass>
Mass one_mass() {
  return mass_one(static_cast<const Mass*>(nullptr));
}

}  // namespace nocpsn
