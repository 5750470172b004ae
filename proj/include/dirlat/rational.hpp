#pragma once

#include <gmpxx.h>

#include <cctype>
#include <compare>
#include <concepts>
#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dirlat {

/**
 * Exact rational number.
 *
 * Values whose numerator and denominator fit in a signed 64-bit word are kept
 * inline and combined with 128-bit intermediates; anything larger falls back to
 * a heap-allocated GMP rational. Results are demoted back to the inline form
 * whenever they fit, so long computations on small data stay allocation-free.
 *
 * Invariant (inline form): den_ > 0, gcd(|num_|, den_) == 1, num_ != INT64_MIN.
 */
class Rational {
 public:
  Rational() = default;

  template <std::integral I>
  Rational(I value) {  // NOLINT(google-explicit-constructor)
    if constexpr (std::is_signed_v<I>) {
      if (static_cast<std::int64_t>(value) == INT64_MIN) {
        set_big(mpq_class(mpz_class(static_cast<long>(value))));
        return;
      }
      num_ = static_cast<std::int64_t>(value);
    } else {
      if (static_cast<std::uint64_t>(value) > static_cast<std::uint64_t>(INT64_MAX)) {
        set_big(mpq_class(mpz_class(static_cast<unsigned long>(value))));
        return;
      }
      num_ = static_cast<std::int64_t>(value);
    }
  }

  Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    assign_wide(static_cast<Wide>(num), static_cast<Wide>(den));
  }

  explicit Rational(const mpq_class& q) { assign_mpq(q); }

  Rational(const Rational& o) : num_(o.num_), den_(o.den_) {
    if (o.big_) big_ = std::make_unique<mpq_class>(*o.big_);
  }
  Rational(Rational&&) noexcept = default;
  Rational& operator=(const Rational& o) {
    if (this == &o) return *this;
    num_ = o.num_;
    den_ = o.den_;
    if (o.big_) {
      if (big_) *big_ = *o.big_;
      else big_ = std::make_unique<mpq_class>(*o.big_);
    } else {
      big_.reset();
    }
    return *this;
  }
  Rational& operator=(Rational&&) noexcept = default;
  ~Rational() = default;

  /// Parses "p/q", an integer, or a finite decimal such as "0.74743".
  static Rational parse(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& t) {
      while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
      while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto valid_int = [](const std::string& t) {
      std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
      if (i == t.size()) return false;
      for (; i < t.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
      return true;
    };
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      std::string p = s.substr(0, slash), q = s.substr(slash + 1);
      trim(p);
      trim(q);
      if (!valid_int(p) || !valid_int(q)) throw std::invalid_argument("bad rational literal: " + s);
      mpz_class num(p[0] == '+' ? p.substr(1) : p), den(q[0] == '+' ? q.substr(1) : q);
      if (den == 0) throw std::invalid_argument("zero denominator: " + s);
      mpq_class r(num, den);
      r.canonicalize();
      return Rational(r);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
      bool neg = !whole.empty() && whole[0] == '-';
      if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(whole.begin());
      if (whole.empty()) whole = "0";
      if (frac.empty() || !valid_int(whole) || !valid_int(frac) || frac[0] == '-' || frac[0] == '+')
        throw std::invalid_argument("bad decimal literal: " + s);
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      mpq_class r(mpz_class(whole) * scale + mpz_class(frac), scale);
      r.canonicalize();
      if (neg) r = -r;
      return Rational(r);
    }
    if (!valid_int(s)) throw std::invalid_argument("bad rational literal: " + s);
    return Rational(mpq_class(mpz_class(s[0] == '+' ? s.substr(1) : s)));
  }

  [[nodiscard]] bool is_small() const { return !big_; }
  [[nodiscard]] int sign() const {
    if (big_) return sgn(*big_);
    return (num_ > 0) - (num_ < 0);
  }
  [[nodiscard]] bool is_zero() const { return !big_ && num_ == 0; }
  [[nodiscard]] bool is_integer() const { return big_ ? big_->get_den() == 1 : den_ == 1; }

  [[nodiscard]] mpq_class to_mpq() const {
    if (big_) return *big_;
    mpq_class r{mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_))};
    return r;
  }
  [[nodiscard]] mpz_class numerator() const { return big_ ? mpz_class(big_->get_num()) : mpz_class(static_cast<long>(num_)); }
  [[nodiscard]] mpz_class denominator() const { return big_ ? mpz_class(big_->get_den()) : mpz_class(static_cast<long>(den_)); }

  [[nodiscard]] double to_double() const {
    if (big_) return big_->get_d();
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "p/q", or "p" when the denominator is 1.
  [[nodiscard]] std::string str() const {
    if (big_) return big_->get_str();
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  [[nodiscard]] Rational floor() const {
    if (!big_) {
      std::int64_t q = num_ / den_;
      if (num_ % den_ != 0 && num_ < 0) --q;
      return Rational(q);
    }
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), big_->get_num_mpz_t(), big_->get_den_mpz_t());
    return Rational(mpq_class(q));
  }
  [[nodiscard]] Rational ceil() const { return -((-*this).floor()); }
  [[nodiscard]] Rational abs() const { return sign() < 0 ? -*this : *this; }

  Rational operator-() const {
    if (big_) return Rational(mpq_class(-*big_));
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == 1 && b.den_ == 1) {
        std::int64_t out;
        if (!__builtin_add_overflow(a.num_, b.num_, &out) && out != INT64_MIN) return from_small(out, 1);
      }
      Rational r;
      r.add_small(a.num_, a.den_, b.num_, b.den_);
      return r;
    }
    return Rational(mpq_class(a.to_mpq() + b.to_mpq()));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == 1 && b.den_ == 1) {
        std::int64_t out;
        if (!__builtin_sub_overflow(a.num_, b.num_, &out) && out != INT64_MIN) return from_small(out, 1);
      }
      Rational r;
      r.add_small(a.num_, a.den_, -b.num_, b.den_);
      return r;
    }
    return Rational(mpq_class(a.to_mpq() - b.to_mpq()));
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.num_ == 0 || b.num_ == 0) return Rational();
      Rational r;
      r.mul_small(a.num_, a.den_, b.num_, b.den_);
      return r;
    }
    return Rational(mpq_class(a.to_mpq() * b.to_mpq()));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.sign() == 0) throw std::domain_error("rational division by zero");
    if (!a.big_ && !b.big_) {
      if (a.num_ == 0) return Rational();
      std::int64_t bn = b.den_, bd = b.num_;
      if (bd < 0) {
        bn = -bn;
        bd = -bd;
      }
      Rational r;
      r.mul_small(a.num_, a.den_, bn, bd);
      return r;
    }
    return Rational(mpq_class(a.to_mpq() / b.to_mpq()));
  }

  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    if (a.big_ && b.big_) return *a.big_ == *b.big_;
    // Canonical forms are unique, so mixed representations never compare equal.
    return false;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == b.den_) return a.num_ <=> b.num_;
      Wide l = static_cast<Wide>(a.num_) * b.den_;
      Wide r = static_cast<Wide>(b.num_) * a.den_;
      return l <=> r;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  using Wide = __int128;
  using UWide = unsigned __int128;

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::unique_ptr<mpq_class> big_;

  static Rational from_small(std::int64_t n, std::int64_t d) {
    Rational r;
    r.num_ = n;
    r.den_ = d;
    return r;
  }

  static UWide gcd_wide(UWide a, UWide b) {
    if (a == 0) return b;
    if (b == 0) return a;
    if ((a >> 64) == 0 && (b >> 64) == 0) {
      std::uint64_t x = static_cast<std::uint64_t>(a), y = static_cast<std::uint64_t>(b);
      int shift = __builtin_ctzll(x | y);
      x >>= __builtin_ctzll(x);
      while (y != 0) {
        y >>= __builtin_ctzll(y);
        if (x > y) std::swap(x, y);
        y -= x;
      }
      return static_cast<UWide>(x << shift);
    }
    while (b != 0) {
      UWide t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static UWide uabs(Wide v) { return v < 0 ? static_cast<UWide>(-v) : static_cast<UWide>(v); }

  static bool fits(Wide v) { return v > static_cast<Wide>(INT64_MIN) && v <= static_cast<Wide>(INT64_MAX); }

  void set_big(const mpq_class& q) {
    big_ = std::make_unique<mpq_class>(q);
    num_ = 0;
    den_ = 1;
  }

  void assign_mpq(const mpq_class& q) {
    if (mpz_fits_slong_p(q.get_num_mpz_t()) && mpz_fits_slong_p(q.get_den_mpz_t())) {
      long n = mpz_get_si(q.get_num_mpz_t());
      long d = mpz_get_si(q.get_den_mpz_t());
      if (n != INT64_MIN) {
        big_.reset();
        num_ = n;
        den_ = d;
        return;
      }
    }
    set_big(q);
  }

  static mpz_class wide_to_mpz(Wide v) {
    bool neg = v < 0;
    UWide u = uabs(v);
    mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
  }

  // Stores n/d given in lowest terms with d > 0.
  void store_reduced(Wide n, Wide d) {
    if (fits(n) && fits(d)) {
      big_.reset();
      num_ = static_cast<std::int64_t>(n);
      den_ = static_cast<std::int64_t>(d);
      return;
    }
    set_big(mpq_class(wide_to_mpz(n), wide_to_mpz(d)));
  }

  void assign_wide(Wide n, Wide d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    UWide g = gcd_wide(uabs(n), static_cast<UWide>(d));
    if (g > 1) {
      n /= static_cast<Wide>(g);
      d /= static_cast<Wide>(g);
    }
    store_reduced(n, d);
  }

  void add_small(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    std::uint64_t g = static_cast<std::uint64_t>(gcd_wide(static_cast<UWide>(b), static_cast<UWide>(d)));
    Wide bg = b / static_cast<std::int64_t>(g), dg = d / static_cast<std::int64_t>(g);
    Wide t = static_cast<Wide>(a) * dg + static_cast<Wide>(c) * bg;  // |t| < 2^127
    if (t == 0) {
      big_.reset();
      num_ = 0;
      den_ = 1;
      return;
    }
    UWide g2 = gcd_wide(uabs(t), static_cast<UWide>(g));
    Wide n = t / static_cast<Wide>(g2);
    // den = bg * (d / g2); both factors < 2^63 so the product fits in 126 bits.
    Wide den = bg * (static_cast<Wide>(d) / static_cast<Wide>(g2));
    store_reduced(n, den);
  }

  void mul_small(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    UWide g1 = gcd_wide(uabs(a), static_cast<UWide>(d));
    UWide g2 = gcd_wide(uabs(c), static_cast<UWide>(b));
    Wide n = (static_cast<Wide>(a) / static_cast<Wide>(g1)) * (static_cast<Wide>(c) / static_cast<Wide>(g2));
    Wide den = (static_cast<Wide>(b) / static_cast<Wide>(g2)) * (static_cast<Wide>(d) / static_cast<Wide>(g1));
    store_reduced(n, den);
  }
};

inline Rational abs(const Rational& r) { return r.abs(); }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace dirlat
