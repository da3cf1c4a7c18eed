#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <system_error>
#include <variant>

#include "harmquant/errors.hpp"

namespace harmquant {

// A point in a variable's range: either a named symbol or an integer.
// Symbols and integers never compare equal.
class Value {
 public:
  Value() : rep_(std::string{}) {}

  static Value symbol(std::string name) { return Value(std::move(name)); }
  static Value integer(std::int64_t n) { return Value(n); }

  bool is_symbol() const { return std::holds_alternative<std::string>(rep_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(rep_); }

  const std::string& symbol_name() const {
    if (!is_symbol()) throw InputError("value is not a symbol");
    return std::get<std::string>(rep_);
  }
  std::int64_t integer_value() const {
    if (!is_integer()) throw InputError("value is not an integer");
    return std::get<std::int64_t>(rep_);
  }

  // Render as it would appear in a model file.
  std::string text() const {
    if (is_symbol()) return std::get<std::string>(rep_);
    return std::to_string(std::get<std::int64_t>(rep_));
  }

  friend bool operator==(const Value& a, const Value& b) {
    return a.rep_ == b.rep_;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  // Integers order before symbols; otherwise natural order within a kind.
  friend bool operator<(const Value& a, const Value& b) {
    return a.rep_ < b.rep_;
  }

 private:
  explicit Value(std::string s) : rep_(std::move(s)) {}
  explicit Value(std::int64_t n) : rep_(n) {}
  std::variant<std::int64_t, std::string> rep_;
};

// Named bindings of variables to values. Used both for full solutions and
// for partial assignments (contexts, interventions, witnesses).
using Assignment = std::map<std::string, Value>;
using Context = Assignment;

// Shortest decimal text that round-trips the double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

// Exact nonnegative rational arithmetic for probabilities. Kept in lowest
// terms with a positive denominator.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    normalize();
  }
  static Rational from_int(std::int64_t n) { return Rational(n, 1); }

  // Accepts "p/q", integer literals, and plain decimals such as "0.45".
  static Rational parse(const std::string& text) {
    if (text.empty()) throw InputError("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      std::int64_t num = parse_int(text.substr(0, slash), text);
      std::int64_t den = parse_int(text.substr(slash + 1), text);
      if (den == 0) throw InputError("zero denominator in '" + text + "'");
      return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
      std::string whole = text.substr(0, dot);
      std::string frac = text.substr(dot + 1);
      if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("malformed decimal '" + text + "'");
      if (frac.size() > 18) throw InputError("decimal too precise: '" + text + "'");
      bool negative = !whole.empty() && whole[0] == '-';
      if (negative) whole = whole.substr(1);
      if (whole.empty()) whole = "0";
      std::int64_t whole_n = parse_int(whole, text);
      std::int64_t frac_n = parse_int(frac, text);
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      std::int64_t num = whole_n * den + frac_n;
      if (negative) num = -num;
      return Rational(num, den);
    }
    return Rational(parse_int(text, text), 1);
  }

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string text() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 num = static_cast<__int128>(a.num_) * b.den_ +
                   static_cast<__int128>(b.num_) * a.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    __int128 g = gcd128(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
      throw InputError("rational overflow");
    return Rational(static_cast<std::int64_t>(num),
                    static_cast<std::int64_t>(den));
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <
           static_cast<__int128>(b.num_) * a.den_;
  }

 private:
  static std::int64_t parse_int(const std::string& digits,
                                const std::string& original) {
    if (digits.empty()) throw InputError("malformed rational '" + original + "'");
    std::int64_t out = 0;
    const char* first = digits.data();
    const char* last = first + digits.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
      throw InputError("malformed rational '" + original + "'");
    return out;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  void normalize() {
    if (den_ == 0) throw InputError("zero denominator");
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace harmquant
