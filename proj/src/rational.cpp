#include "splitting/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace splitting {

namespace {

bool parse_integer(std::string_view s, mpz_class& out) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
  }
  return out.set_str(std::string(s[0] == '+' ? s.substr(1) : s), 10) == 0;
}

}  // namespace

Rational::Rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Rational::Rational(mpq_class q) : q_(std::move(q)) {
  if (q_.get_den() == 0) throw std::invalid_argument("Rational: zero denominator");
  q_.canonicalize();
}

std::optional<Rational> Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  mpz_class num, den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_integer(text, num)) return std::nullopt;
  } else {
    if (!parse_integer(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_integer(text.substr(slash + 1), den)) return std::nullopt;
    if (den == 0) return std::nullopt;
  }
  mpq_class q(num, den);
  q.canonicalize();
  return Rational(std::move(q));
}

std::string Rational::str() const {
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

double Rational::to_double() const {
  if (mpz_sizeinbase(q_.get_num_mpz_t(), 2) <= 53 && mpz_sizeinbase(q_.get_den_mpz_t(), 2) <= 53) {
    return q_.get_num().get_d() / q_.get_den().get_d();
  }
  return q_.get_d();
}

double log_mpz(const mpz_class& z) {
  if (z <= 0) throw std::domain_error("log of non-positive integer");
  if (mpz_sizeinbase(z.get_mpz_t(), 2) <= 53) return std::log(z.get_d());
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

double Rational::log() const {
  if (sign() <= 0) throw std::domain_error("log of non-positive rational");
  return log_mpz(q_.get_num()) - log_mpz(q_.get_den());
}

Rational pow(const Rational& base, unsigned long exponent) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), exponent);
  return Rational(mpq_class(num, den));
}

}  // namespace splitting
