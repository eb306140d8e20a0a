#pragma once

// Exact piecewise closed forms in one rational variable, used to certify the
// limiting behaviour of per-n traces (variable n) and of tail infima
// (variable K).

#include <cstdint>
#include <string>
#include <vector>

#include "fatou/rational.hpp"

namespace fatou {

class ClosedForm {
 public:
  enum class Shape {
    Affine,       // a + b / x
    DyadicFloor,  // a * 2^(-floor(log2 x)), x > 0
  };

  /// Applies from `from` (strictly above it when `exclusive`) up to the start
  /// of the next piece.
  struct Piece {
    Rational from;
    bool exclusive = false;
    Shape shape = Shape::Affine;
    Rational a;
    Rational b;

    friend bool operator==(const Piece&, const Piece&) = default;
  };

  static ClosedForm constant(const Rational& c, const Rational& from = Rational(1));
  static ClosedForm affine(const Rational& a, const Rational& b, const Rational& from = Rational(1));
  static ClosedForm dyadic(const Rational& a, const Rational& from = Rational(1));
  /// Pieces must have strictly increasing start points (an exclusive start
  /// counts as just above its value). Throws std::invalid_argument otherwise.
  static ClosedForm piecewise(std::vector<Piece> pieces);

  const std::vector<Piece>& pieces() const { return pieces_; }

  /// Throws std::out_of_range below the first piece and std::domain_error
  /// where the active shape is undefined (x = 0, or x <= 0 for dyadic).
  Rational eval(const Rational& x) const;

  /// Limit as x -> +infinity.
  Rational limit() const;

  /// inf over integers n >= from of eval(n); the value need not be attained.
  Rational infimum_over_integers(std::int64_t from) const;

  std::string describe(const std::string& variable) const;

  friend bool operator==(const ClosedForm&, const ClosedForm&) = default;

 private:
  explicit ClosedForm(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}

  std::vector<Piece> pieces_;
};

}  // namespace fatou
