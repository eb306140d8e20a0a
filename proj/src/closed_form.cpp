#include "fatou/closed_form.hpp"

#include <optional>
#include <stdexcept>

namespace fatou {

namespace {

bool starts_at_or_before(const ClosedForm::Piece& p, const Rational& x) {
  return p.exclusive ? p.from < x : p.from <= x;
}

// Smallest integer inside the piece's start condition.
Integer first_integer(const ClosedForm::Piece& p) {
  return p.exclusive ? p.from.floor() + 1 : p.from.ceil();
}

Rational eval_piece(const ClosedForm::Piece& p, const Rational& x) {
  switch (p.shape) {
    case ClosedForm::Shape::Affine:
      if (p.b.is_zero()) return p.a;
      if (x.is_zero()) throw std::domain_error("closed form a + b/x evaluated at 0");
      return p.a + p.b / x;
    case ClosedForm::Shape::DyadicFloor: {
      if (x.sign() <= 0) throw std::domain_error("dyadic closed form needs x > 0");
      // floor(log2 x) for rational x > 0
      Integer fl = x.floor();
      long e = 0;
      if (fl > 0) {
        e = static_cast<long>(mpz_sizeinbase(fl.get_mpz_t(), 2)) - 1;
      } else {
        Rational y = x;
        while (y < 1) {
          y *= 2;
          --e;
        }
      }
      return p.a * Rational::pow2(-e);
    }
  }
  throw std::logic_error("unknown closed-form shape");
}

bool decreasing(const ClosedForm::Piece& p) {
  return p.shape == ClosedForm::Shape::Affine ? p.b.sign() > 0 : p.a.sign() > 0;
}

Rational tail_value(const ClosedForm::Piece& p) {
  return p.shape == ClosedForm::Shape::Affine ? p.a : Rational();
}

}  // namespace

ClosedForm ClosedForm::constant(const Rational& c, const Rational& from) {
  return ClosedForm({Piece{from, false, Shape::Affine, c, Rational()}});
}

ClosedForm ClosedForm::affine(const Rational& a, const Rational& b, const Rational& from) {
  return ClosedForm({Piece{from, false, Shape::Affine, a, b}});
}

ClosedForm ClosedForm::dyadic(const Rational& a, const Rational& from) {
  return ClosedForm({Piece{from, false, Shape::DyadicFloor, a, Rational()}});
}

ClosedForm ClosedForm::piecewise(std::vector<Piece> pieces) {
  if (pieces.empty()) throw std::invalid_argument("closed form needs at least one piece");
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const auto& prev = pieces[i - 1];
    const auto& cur = pieces[i];
    const bool later = prev.from < cur.from || (prev.from == cur.from && !prev.exclusive && cur.exclusive);
    if (!later) {
      throw std::invalid_argument("closed-form pieces must start in increasing order (piece " +
                                  std::to_string(i) + ")");
    }
  }
  return ClosedForm(std::move(pieces));
}

Rational ClosedForm::eval(const Rational& x) const {
  const Piece* active = nullptr;
  for (const auto& p : pieces_) {
    if (starts_at_or_before(p, x)) active = &p;
  }
  if (active == nullptr) {
    throw std::out_of_range("closed form evaluated at " + x.str() + " below its domain");
  }
  return eval_piece(*active, x);
}

Rational ClosedForm::limit() const { return tail_value(pieces_.back()); }

Rational ClosedForm::infimum_over_integers(std::int64_t from) const {
  const Integer start(std::to_string(from));
  std::optional<Rational> best;
  auto offer = [&](const Rational& v) {
    if (!best || v < *best) best = v;
  };
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    Integer lo = first_integer(p);
    if (lo < start) lo = start;
    std::optional<Integer> hi;  // exclusive end
    if (i + 1 < pieces_.size()) hi = first_integer(pieces_[i + 1]);
    if (hi && lo >= *hi) continue;
    const Rational first_value = eval_piece(p, Rational(lo));
    offer(first_value);
    if (decreasing(p)) offer(hi ? eval_piece(p, Rational(*hi - 1)) : tail_value(p));
  }
  if (!best) throw std::out_of_range("closed form has no integer point at or above the start");
  return *best;
}

std::string ClosedForm::describe(const std::string& variable) const {
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    if (i > 0) out += "; ";
    std::string body;
    if (p.shape == Shape::DyadicFloor) {
      body = p.a.str() + "*2^(-floor(log2 " + variable + "))";
    } else if (p.b.is_zero()) {
      body = p.a.str();
    } else {
      body = p.a.str() + (p.b.sign() < 0 ? " - " : " + ") + p.b.abs().str() + "/" + variable;
    }
    out += body + " for " + variable + (p.exclusive ? " > " : " >= ") + p.from.str();
  }
  return out;
}

}  // namespace fatou
