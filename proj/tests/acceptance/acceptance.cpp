// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 when
// any criterion fails. argv[1], when given, is the fatou executable used for
// the process-level determinism check.

#include <array>
#include <bit>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "fatou/cli.hpp"
#include "fatou/engine.hpp"
#include "fatou/gallery.hpp"
#include "fatou/io.hpp"
#include "fatou/random.hpp"
#include "oracle.hpp"

using namespace fatou;

namespace {

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string at(std::int64_t n) { return " at n = " + std::to_string(n); }

const Term& lebesgue_limit(const char* id) { return gallery_entry(id).limit; }

Rational s_n_gap(std::int64_t n) {
  // mu_n(S_n) - mu(S_n) summed over the explicit even cells.
  if (n <= 12) {
    const auto masses = oracle::oscillating_masses(n);
    Rational s;
    for (std::size_t c = 0; c < masses.size(); c += 2) s += masses[c] - Rational::pow2(-n);
    return s;
  }
  // 2^(n-1) even cells, each with mass (1/n) 2^-n against length 2^-n.
  return Rational::pow2(n - 1) * (Rational(1, n) - Rational(1)) * Rational::pow2(-n);
}

void criterion_1() {
  const auto& lim = lebesgue_limit("3.4");
  for (std::int64_t n = 1; n <= 32; ++n) {
    const auto t = constant_on_oscillating_measure(n);
    const auto g = gap_inf(lim.function, lim.measure, t.function, t.measure);
    const Rational expected = -(Rational(1, 2) - Rational(1, 2 * n));
    expect(g.value == expected, "gap_inf " + g.value.str() + " != " + expected.str() + at(n));
    expect(s_n_gap(n) == expected, "S_n does not attain the gap" + at(n));
    const auto s = even_cells(static_cast<unsigned>(n));
    expect(t.measure.measure_of(s) - lim.measure.lift(s.partition()).measure_of(s) == expected,
           "mass difference on S_n" + at(n));
    // At n = 1 every cell delta vanishes and the empty set is the canonical minimizer.
    if (n > 1) expect(g.witness == s, "witness differs from S_n" + at(n));
    else expect(g.witness.count() == 0, "witness not empty" + at(n));
  }
}

void criterion_2() {
  const auto& lim = lebesgue_limit("3.2");
  for (std::int64_t n = 1; n <= 32; ++n) {
    const auto t = inverse_density_unbounded(n);
    expect(gap_sup(lim.function, lim.measure, t.function, t.measure).is_zero(), "gap_sup nonzero" + at(n));
    const Rational tv = tv_distance(t.measure, lim.measure);
    expect(tv == Rational(1) - Rational(1, n), "tv " + tv.str() + at(n));
    expect(tv >= Rational(1, 2) - Rational(1, 2 * n), "tv below the lower bound" + at(n));
    if (n <= 12) {
      Rational direct;
      for (const auto& m : oracle::oscillating_masses(n)) direct += (m - Rational::pow2(-n)).abs();
      expect(direct == tv, "tv disagrees with cellwise sum" + at(n));
      const auto vals = t.function.values();
      const auto masses = t.measure.masses();
      for (std::size_t c = 0; c < vals.size(); ++c)
        expect(vals[c] * masses[c] == Rational(-1) * Rational::pow2(-n), "cell delta nonzero" + at(n));
    }
  }
}

void criterion_3() {
  const auto& e = gallery_entry("3.2");
  const auto& lim = e.limit;
  for (std::int64_t n = 2; n <= 32; ++n) {
    const Rational x = exceedance_measure(lim.function, e.generator(n).function, lim.measure, 1);
    expect(x == Rational(1, 2), "exceedance " + x.str() + at(n));
  }
  std::optional<Rational> inf;
  for (std::int64_t n = 1; n <= 32; ++n) {
    const auto t = e.generator(n);
    const Rational v = lower_tail(t.function, t.measure, 2);
    if (n <= 10) {
      const Rational o = oracle::restricted_integral(t.function.values(), t.measure.masses(),
                                                     [](const Rational& x, std::size_t) { return x <= Rational(-2); });
      expect(o == v, "lower tail disagrees with cellwise sum" + at(n));
    }
    if (!inf || v < *inf) inf = v;
  }
  expect(*inf == Rational(-1, 2), "lower-tail infimum " + inf->str());

  const auto seq = e.sequence({Rational(1)}, {Rational(2)});
  const auto ci = check_condition_i(seq, {Rational(1)}, 32);
  expect(ci.verdict == Verdict::Fails, "condition (i) verdict " + to_string(ci.verdict));
  expect(ci.witness && ci.witness->value == Rational(1, 2), "condition (i) witness");
  const auto cii = check_condition_ii(seq, {Rational(2)}, 32);
  expect(cii.verdict == Verdict::Fails, "condition (ii) verdict " + to_string(cii.verdict));
  expect(cii.witness && cii.witness->parameter == "K" && cii.witness->parameter_value == Rational(2) &&
             cii.witness->value == Rational(-1, 2),
         "condition (ii) witness");
}

void criterion_4() {
  const auto& e = gallery_entry("3.3");
  const auto& lim = e.limit;
  for (std::int64_t n = 1; n <= 64; ++n) {
    const auto t = e.generator(n);
    expect(exceedance_measure(lim.function, t.function, lim.measure, Rational(1, 3)) == Rational(1, 2),
           "exceedance" + at(n));
    expect(gap_inf(lim.function, lim.measure, t.function, t.measure).value.is_zero(), "gap_inf" + at(n));
    for (const Rational& K : {Rational(1, 4), Rational(1, 2), Rational(1), Rational(2), Rational(4), Rational(8), Rational(16)})
      expect(lower_tail(t.function, t.measure, K).is_zero(), "lower tail at K = " + K.str() + at(n));
    if (n <= 10) {
      const auto vals = t.function.values();
      for (const auto& v : vals) expect(v.sign() > 0, "negative value" + at(n));
    }
  }
}

void criterion_5() {
  const auto& e = gallery_entry("3.1");
  const auto& lim = e.limit;
  for (std::int64_t n = 1; n <= 64; ++n) {
    const auto f = e.generator(n).function;
    const int k = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
    const auto vals = f.lift(CellPartition::dyadic_uniform(6)).values();
    Rational l1;
    for (const auto& v : vals) l1 += (v - Rational(1)).abs() * Rational::pow2(-6);
    expect(l1 == Rational::pow2(-k), "oracle l1" + at(n));
    expect(l1_distance(f, lim.function, lim.measure) == l1, "l1" + at(n));
  }
  std::vector<Rational> eps = default_eps_grid();
  const auto seq = e.sequence(eps, {});
  expect(check_condition_i(seq, eps, 64).verdict == Verdict::HoldsOnPrefix, "condition (i) does not hold");

  for (std::int64_t k = 0; k <= 5; ++k) {
    const auto low = pointwise_liminf_prefix(seq, (std::int64_t{2} << k) - 1, std::int64_t{1} << k);
    for (const auto& v : low.lift(CellPartition::dyadic_uniform(6)).values())
      expect(v.is_zero(), "prefix minimum over level " + std::to_string(k) + " is not 0");
  }
  const auto sub = seq.subsequence({1, 2, 4, 8, 16, 32, 64});
  const auto along = pointwise_liminf_prefix(sub, 7, 3).lift(CellPartition::dyadic_uniform(6)).values();
  for (std::size_t c = 0; c < along.size(); ++c) {
    const bool in_first_quarter = c < 16;
    expect(along[c] == (in_first_quarter ? Rational(0) : Rational(1)), "subsequence minimum at cell " + std::to_string(c));
  }
}

void criterion_6() {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = fatou::random::instance(rng, 12);
    const auto flat = oracle::flatten(in.f, in.m, in.g, in.v);
    expect(flat.f.size() <= 12, "instance too large");
    const auto d = oracle::deltas(flat);
    std::vector<Rational> dm;
    for (std::size_t c = 0; c < flat.m.size(); ++c) dm.push_back(flat.m[c] - flat.v[c]);
    const std::string tag = " on trial " + std::to_string(trial);
    expect(gap_inf(in.f, in.m, in.g, in.v).value == oracle::subset_inf(d), "gap_inf" + tag);
    expect(gap_sup(in.f, in.m, in.g, in.v) == oracle::subset_sup_abs(d), "gap_sup" + tag);
    expect(tv_distance(in.m, in.v) == oracle::sign_sup(dm), "tv" + tag);
    expect(brute_force_gap(in.f, in.m, in.g, in.v, GapMode::Inf) == oracle::subset_inf(d), "brute-force inf" + tag);
    expect(brute_force_tv(in.m, in.v) == oracle::sign_sup(dm), "brute-force tv" + tag);
  }
}

void criterion_7() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string tag = " on trial " + std::to_string(trial);
    const auto p = fatou::random::partition(rng, 12);
    const auto m = fatou::random::measure(rng, p);
    const auto f = fatou::random::step_function(rng, p);
    const auto g = fatou::random::step_function(rng, p);
    const auto fv = f.values(), gv = g.values(), mv = m.masses();
    Rational neg, pos;
    for (std::size_t c = 0; c < fv.size(); ++c) {
      neg += (gv[c] - fv[c]).negative_part() * mv[c];
      pos += (gv[c] - fv[c]).positive_part() * mv[c];
    }
    expect(gap_inf(f, m, g, m).value == -neg, "gap_inf identity" + tag);
    const Rational sup = gap_sup(f, m, g, m);
    expect(sup == max(neg, pos), "gap_sup identity" + tag);
    const Rational l1 = l1_distance(f, g, m);
    expect(l1 == neg + pos, "l1 split" + tag);
    expect(sup <= l1 && l1 <= Rational(2) * sup, "l1 sandwich" + tag);
    Rational biggest;
    for (const auto& v : gv) biggest = max(biggest, v.abs());
    for (const Rational& K : {biggest + Rational(1, 1000), biggest + Rational(1), Rational(2) * biggest + Rational(1)}) {
      expect(lower_tail(g, m, K).is_zero(), "lower tail past max |value|" + tag);
      expect(ui_tail(g, m, K).is_zero(), "ui tail past max |value|" + tag);
    }
  }
}

void criterion_8() {
  const auto& e31 = gallery_entry("3.1");
  const auto r = extract_subsequence(e31.sequence({}, {}), Rational(1, 2), 6, 1024);
  expect(r.ok && r.steps.size() == 6, "extraction failed on the typewriter sequence");
  std::int64_t previous = 0;
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    const auto n = r.steps[k].n;
    expect(n > previous, "indices not increasing");
    previous = n;
    const auto vals = e31.generator(n).function.lift(CellPartition::dyadic_uniform(12)).values();
    Rational x;
    for (const auto& v : vals)
      if (v <= Rational(1, 2)) x += Rational::pow2(-12);
    expect(x == r.steps[k].exceedance, "reported exceedance" + at(n));
    expect(x <= Rational::pow2(-static_cast<long>(k + 1)), "exceedance above 2^-k" + at(n));
  }
  const auto& e32 = gallery_entry("3.2");
  const auto fail = extract_subsequence(e32.sequence({}, {}), Rational(1), 6, 64);
  expect(!fail.ok, "extraction succeeded on the unbounded sequence");
  expect(fail.best_attempt && fail.best_attempt->exceedance == Rational(1, 2), "best attempt is not 1/2");
}

void criterion_9() {
  const auto leb = Measure::base(CellPartition::dyadic_uniform(0));
  for (std::int64_t n = 1; n <= 16; ++n) {
    const auto rho = radon_nikodym(inverse_density_unbounded(n).measure, leb).values();
    expect(rho.size() == (std::size_t{1} << n), "density cell count" + at(n));
    for (std::size_t c = 0; c < rho.size(); ++c)
      if (rho[c] != oracle::oscillating_density(n, c)) throw Failure{"density" + at(n)};
  }
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string tag = " on trial " + std::to_string(trial);
    const auto p = fatou::random::partition(rng, 12);
    const auto m = fatou::random::measure(rng, p);
    const auto t = SignedMeasure::with_density(m, fatou::random::step_function(rng, p));
    const auto u = SignedMeasure::with_density(m, fatou::random::step_function(rng, p));
    const auto dt = radon_nikodym(t, m).values();
    const auto tm = t.masses(), mm = m.masses();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << tm.size()); ++mask) {
      Rational lhs, rhs;
      for (std::size_t c = 0; c < tm.size(); ++c) {
        if (((mask >> c) & 1U) == 0) continue;
        lhs += dt[c] * mm[c];
        rhs += tm[c];
      }
      if (lhs != rhs) throw Failure{"reconstruction" + tag};
    }
    expect(tv_distance(t, u) == l1_distance(radon_nikodym(t, m), radon_nikodym(u, m), m), "tv two ways" + tag);
  }
  for (std::int64_t n = 1; n <= 16; ++n) {
    const auto mun = inverse_density_unbounded(n).measure;
    expect(tv_distance(mun, leb) == l1_distance(radon_nikodym(mun, leb), StepFunction::constant(leb.partition(), 1), leb),
           "tv two ways" + at(n));
  }
}

std::string capture(const std::string& command) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  expect(pipe != nullptr, "cannot run " + command);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), got);
  return out;
}

void criterion_10(const char* exe) {
  const std::vector<std::string> args{"gallery", "--example", "3.4", "--n", "1..8"};
  std::ostringstream a, b, err;
  expect(cli::run(args, a, err) == 0 && cli::run(args, b, err) == 0, "gallery run failed: " + err.str());
  expect(!a.str().empty() && a.str() == b.str(), "in-process reports differ");
  if (exe != nullptr) {
    const std::string cmd = std::string("'") + exe + "' gallery --example 3.4 --n 1..8";
    const auto p1 = capture(cmd);
    const auto p2 = capture(cmd);
    expect(p1 == p2, "process reports differ");
    expect(p1 == a.str(), "process and in-process reports differ");
  }
  for (const auto& id : gallery_ids()) {
    const auto& e = gallery_entry(id);
    const auto seq = e.sequence(default_eps_grid(), default_K_grid());
    const auto j = io::sequence_to_json(seq, 6);
    const auto back = io::parse_sequence_spec(io::dump(j));
    expect(io::sequence_to_json(back) == j, "spec round trip for " + id);
    const auto p = back.limit().measure.partition();
    for (std::int64_t n = 1; n <= 6; ++n) {
      expect(back.term(n).measure == seq.term(n).measure.lift(p), "masses after round trip for " + id + at(n));
      expect(back.term(n).function == seq.term(n).function.lift(p), "values after round trip for " + id + at(n));
    }
    expect(back.analytic() == seq.analytic(), "closed forms after round trip for " + id);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const char* exe = argc > 1 ? argv[1] : nullptr;
  const std::vector<std::pair<const char*, std::function<void()>>> criteria{
      {"oscillating-measure gap equals -(1/2 - 1/(2n)) with witness S_n, n = 1..32", criterion_1},
      {"inverse densities: gap_sup = 0 and tv = 1 - 1/n, n = 1..32", criterion_2},
      {"inverse densities: exceedance 1/2, lower-tail infimum -1/2, both conditions fail", criterion_3},
      {"bounded inverse densities: exceedance 1/2, gap_inf 0, lower tail 0", criterion_4},
      {"typewriter: l1 = 2^-floor(log2 n), condition (i) holds, prefix minima", criterion_5},
      {"200 random instances match subset and sign enumeration", criterion_6},
      {"same-measure identities on 100 random instances", criterion_7},
      {"subsequence extraction contract", criterion_8},
      {"Radon-Nikodym densities, reconstruction and tv two ways", criterion_9},
      {"deterministic gallery output and lossless spec round trip", [exe] { criterion_10(exe); }},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [title, check] : criteria) {
    ++index;
    std::string problem;
    try {
      check();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (problem.empty()) {
      std::cout << "PASS criterion " << index << ": " << title << "\n";
    } else {
      ++failed;
      std::cout << "FAIL criterion " << index << ": " << title << " (" << problem << ")\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
