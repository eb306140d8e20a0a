#include "fatou/io.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace fatou::io {

namespace {

// ---- line mapping -------------------------------------------------------

// Input iterator that counts how many characters the parser has consumed.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* p, std::size_t* consumed) : p_(p), consumed_(consumed) {}

  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    ++p_;
    if (consumed_ != nullptr) ++*consumed_;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  friend bool operator==(const CountingIterator& a, const CountingIterator& b) { return a.p_ == b.p_; }

 private:
  const char* p_ = nullptr;
  std::size_t* consumed_ = nullptr;
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Builds the DOM and records the line on which every value starts.
class LocatingSax {
 public:
  using dom = nlohmann::detail::json_sax_dom_parser<Json>;
  using number_integer_t = Json::number_integer_t;
  using number_unsigned_t = Json::number_unsigned_t;
  using number_float_t = Json::number_float_t;
  using string_t = Json::string_t;
  using binary_t = Json::binary_t;

  LocatingSax(Json& result, const std::string& text, const std::size_t& consumed)
      : dom_(result, true), text_(text), consumed_(consumed) {}

  bool null() { return scalar([&] { return dom_.null(); }); }
  bool boolean(bool v) { return scalar([&] { return dom_.boolean(v); }); }
  bool number_integer(number_integer_t v) { return scalar([&] { return dom_.number_integer(v); }); }
  bool number_unsigned(number_unsigned_t v) { return scalar([&] { return dom_.number_unsigned(v); }); }
  bool number_float(number_float_t v, const string_t& s) {
    return scalar([&] { return dom_.number_float(v, s); });
  }
  bool string(string_t& v) { return scalar([&] { return dom_.string(v); }); }
  bool binary(binary_t& v) { return scalar([&] { return dom_.binary(v); }); }

  bool start_object(std::size_t n) {
    note();
    frames_.push_back(Frame{false, 0, {}});
    return dom_.start_object(n);
  }
  bool key(string_t& k) {
    frames_.back().key = k;
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    advance();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    note();
    frames_.push_back(Frame{true, 0, {}});
    return dom_.start_array(n);
  }
  bool end_array() {
    frames_.pop_back();
    advance();
    return dom_.end_array();
  }
  bool parse_error(std::size_t pos, const std::string& token, const nlohmann::detail::exception& ex) {
    return dom_.parse_error(pos, token, ex);
  }

  std::map<std::string, int> take_lines() { return std::move(lines_); }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };

  template <class Fn>
  bool scalar(Fn&& fn) {
    note();
    const bool ok = fn();
    advance();
    return ok;
  }

  void note() {
    std::string ptr;
    for (const auto& f : frames_) {
      ptr += "/" + (f.array ? std::to_string(f.index) : escape_token(f.key));
    }
    // The lexer may have read one character of lookahead past the token.
    const std::size_t end = consumed_ == 0 ? 0 : consumed_ - 1;
    const auto line = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(std::min(end, text_.size())), '\n');
    lines_.emplace(ptr, static_cast<int>(line));
  }

  void advance() {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
  }

  dom dom_;
  const std::string& text_;
  const std::size_t& consumed_;
  std::vector<Frame> frames_;
  std::map<std::string, int> lines_;
};

// ---- validation ---------------------------------------------------------

class Checker {
 public:
  explicit Checker(std::map<std::string, int> lines) : lines_(std::move(lines)) {}

  void error(const std::string& ptr, const std::string& message) {
    diags_.push_back(Diagnostic{line_of(ptr), ptr.empty() ? "/" : ptr, message});
  }
  bool ok() const { return diags_.empty(); }
  std::vector<Diagnostic> take() { return std::move(diags_); }

  const Json* member(const Json& obj, const std::string& ptr, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(ptr, std::string("missing required key \"") + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  void only_keys(const Json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return it.key() == a; });
      if (!known) error(ptr + "/" + escape_token(it.key()), "unknown key \"" + it.key() + "\"");
    }
  }

  std::optional<Rational> rational(const Json& j, const std::string& ptr) {
    try {
      if (j.is_string()) return Rational::parse(j.get<std::string>());
      if (j.is_number_integer()) return Rational::parse(j.dump());
    } catch (const std::exception& e) {
      error(ptr, e.what());
      return std::nullopt;
    }
    error(ptr, "expected a rational as a \"p/q\" string, got " + std::string(j.type_name()));
    return std::nullopt;
  }

  std::optional<std::int64_t> integer(const Json& j, const std::string& ptr) {
    if (j.is_number_integer()) {
      if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        error(ptr, "integer out of range");
        return std::nullopt;
      }
      return j.get<std::int64_t>();
    }
    error(ptr, "expected an integer, got " + std::string(j.type_name()));
    return std::nullopt;
  }

  std::optional<std::vector<Rational>> rationals(const Json& j, const std::string& ptr,
                                                 std::size_t expected, bool nonnegative) {
    if (!j.is_array()) {
      error(ptr, "expected an array, got " + std::string(j.type_name()));
      return std::nullopt;
    }
    if (j.size() != expected) {
      error(ptr, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
      return std::nullopt;
    }
    std::vector<Rational> out;
    bool good = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = ptr + "/" + std::to_string(i);
      auto r = rational(j[i], p);
      if (!r) {
        good = false;
        continue;
      }
      if (nonnegative && r->sign() < 0) {
        error(p, "mass must be nonnegative, got " + r->str());
        good = false;
        continue;
      }
      out.push_back(*r);
    }
    if (!good) return std::nullopt;
    return out;
  }

 private:
  int line_of(std::string ptr) const {
    while (true) {
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      if (ptr.empty()) return 0;
      ptr.erase(ptr.rfind('/'));
    }
  }

  std::map<std::string, int> lines_;
  std::vector<Diagnostic> diags_;
};

std::optional<ClosedForm> form_at(Checker& c, const Json& j, const std::string& ptr) {
  if (!j.is_object()) {
    c.error(ptr, "closed form must be an object with \"pieces\"");
    return std::nullopt;
  }
  c.only_keys(j, ptr, {"pieces"});
  const Json* pieces = c.member(j, ptr, "pieces", true);
  if (pieces == nullptr) return std::nullopt;
  if (!pieces->is_array() || pieces->empty()) {
    c.error(ptr + "/pieces", "expected a nonempty array of pieces");
    return std::nullopt;
  }
  std::vector<ClosedForm::Piece> out;
  bool good = true;
  for (std::size_t i = 0; i < pieces->size(); ++i) {
    const std::string p = ptr + "/pieces/" + std::to_string(i);
    const Json& pj = (*pieces)[i];
    if (!pj.is_object()) {
      c.error(p, "piece must be an object");
      good = false;
      continue;
    }
    c.only_keys(pj, p, {"from", "exclusive", "shape", "a", "b"});
    ClosedForm::Piece piece;
    const Json* from = c.member(pj, p, "from", true);
    const Json* shape = c.member(pj, p, "shape", true);
    const Json* a = c.member(pj, p, "a", true);
    if (from == nullptr || shape == nullptr || a == nullptr) {
      good = false;
      continue;
    }
    auto fr = c.rational(*from, p + "/from");
    auto av = c.rational(*a, p + "/a");
    if (!fr || !av) {
      good = false;
      continue;
    }
    piece.from = *fr;
    piece.a = *av;
    if (const Json* ex = c.member(pj, p, "exclusive", false)) {
      if (!ex->is_boolean()) {
        c.error(p + "/exclusive", "expected true or false");
        good = false;
      } else {
        piece.exclusive = ex->get<bool>();
      }
    }
    const std::string s = shape->is_string() ? shape->get<std::string>() : "";
    if (s == "affine") {
      piece.shape = ClosedForm::Shape::Affine;
      if (const Json* b = c.member(pj, p, "b", false)) {
        auto bv = c.rational(*b, p + "/b");
        if (!bv) {
          good = false;
          continue;
        }
        piece.b = *bv;
      }
    } else if (s == "dyadic") {
      piece.shape = ClosedForm::Shape::DyadicFloor;
      if (pj.contains("b")) c.error(p + "/b", "dyadic pieces take no \"b\"");
    } else {
      c.error(p + "/shape", "shape must be \"affine\" or \"dyadic\"");
      good = false;
      continue;
    }
    out.push_back(piece);
  }
  if (!good) return std::nullopt;
  try {
    return ClosedForm::piecewise(std::move(out));
  } catch (const std::exception& e) {
    c.error(ptr + "/pieces", e.what());
    return std::nullopt;
  }
}

void parameter_forms(Checker& c, const Json& j, const std::string& ptr, const char* param,
                     std::map<Rational, ClosedForm>& out) {
  if (!j.is_array()) {
    c.error(ptr, "expected an array of {\"" + std::string(param) + "\", \"form\"} objects");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    const Json& e = j[i];
    if (!e.is_object()) {
      c.error(p, "expected an object");
      continue;
    }
    c.only_keys(e, p, {param, "form"});
    const Json* pv = c.member(e, p, param, true);
    const Json* fv = c.member(e, p, "form", true);
    if (pv == nullptr || fv == nullptr) continue;
    auto value = c.rational(*pv, p + "/" + param);
    auto form = form_at(c, *fv, p + "/form");
    if (!value || !form) continue;
    if (value->sign() <= 0) {
      c.error(p + "/" + param, std::string(param) + " must be positive");
      continue;
    }
    if (!out.emplace(*value, *form).second) {
      c.error(p + "/" + param, "duplicate " + std::string(param) + " " + value->str());
    }
  }
}

AnalyticTraces analytic_at(Checker& c, const Json& j, const std::string& ptr) {
  AnalyticTraces a;
  if (!j.is_object()) {
    c.error(ptr, "analytic block must be an object");
    return a;
  }
  c.only_keys(j, ptr, {"gap_inf", "gap_sup", "tv", "l1", "exceedance", "lower_tail", "lower_tail_inf"});
  auto single = [&](const char* key, std::optional<ClosedForm>& slot) {
    if (const Json* v = c.member(j, ptr, key, false)) slot = form_at(c, *v, ptr + "/" + key);
  };
  single("gap_inf", a.gap_inf);
  single("gap_sup", a.gap_sup);
  single("tv", a.tv);
  single("l1", a.l1);
  single("lower_tail_inf", a.lower_tail_inf);
  if (const Json* v = c.member(j, ptr, "exceedance", false)) {
    parameter_forms(c, *v, ptr + "/exceedance", "eps", a.exceedance);
  }
  if (const Json* v = c.member(j, ptr, "lower_tail", false)) {
    parameter_forms(c, *v, ptr + "/lower_tail", "K", a.lower_tail);
  }
  return a;
}

std::optional<Term> term_at(Checker& c, const Json& j, const std::string& ptr, const CellPartition& p,
                            std::size_t cells, bool allow_n) {
  if (!j.is_object()) {
    c.error(ptr, "expected an object with \"masses\" and \"values\"");
    return std::nullopt;
  }
  if (allow_n) {
    c.only_keys(j, ptr, {"n", "masses", "values"});
  } else {
    c.only_keys(j, ptr, {"masses", "values"});
  }
  const Json* masses = c.member(j, ptr, "masses", true);
  const Json* values = c.member(j, ptr, "values", true);
  if (masses == nullptr || values == nullptr) return std::nullopt;
  auto ms = c.rationals(*masses, ptr + "/masses", cells, true);
  auto vs = c.rationals(*values, ptr + "/values", cells, false);
  if (!ms || !vs) return std::nullopt;
  return Term{Measure::from_masses(p, *ms), StepFunction::from_values(p, *vs)};
}

// ---- serialization helpers ---------------------------------------------

Json rationals_json(const std::vector<Rational>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(x.str());
  return out;
}

Json trace_json(const Trace& t) {
  Json out = Json::array();
  for (const auto& p : t) out.push_back(Json{{"n", p.n}, {"value", p.value.str()}});
  return out;
}

Json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return Json{{"parameter", w->parameter},
              {"parameter_value", w->parameter_value.str()},
              {"n", w->n},
              {"value", w->value.str()}};
}

constexpr std::size_t kListedWitnessCells = 16;

Json cellset_json(const CellSet& s) {
  Json out;
  out["cell_count"] = s.count().get_str();
  out["base_measure"] = s.base_measure().str();
  Json cells = Json::array();
  bool truncated = false;
  if (s.partition().cell_count() <= Integer(static_cast<unsigned long>(kExplicitCellLimit))) {
    for (const auto& idx : s.indices()) {
      if (cells.size() == kListedWitnessCells) {
        truncated = true;
        break;
      }
      cells.push_back(s.partition().describe_cell(idx));
    }
  } else {
    truncated = s.count() > 0;
  }
  out["cells"] = cells;
  out["truncated"] = truncated;
  return out;
}

Json condition_json(const ConditionResult& c, const char* param, bool with_infimum) {
  Json per = Json::array();
  for (const auto& pv : c.per_parameter) {
    Json e;
    e[param] = pv.parameter.str();
    e["verdict"] = to_string(pv.verdict);
    e["certified"] = pv.certified ? Json(pv.certified->str()) : Json(nullptr);
    if (with_infimum && pv.prefix_infimum) {
      e["prefix_infimum"] = Json{{"n", pv.prefix_infimum->n}, {"value", pv.prefix_infimum->value.str()}};
    }
    e["trace"] = trace_json(pv.trace);
    per.push_back(std::move(e));
  }
  return Json{{"verdict", to_string(c.verdict)}, {"per_" + std::string(param), std::move(per)}};
}

Json optional_rational(const std::optional<Rational>& r) {
  return r ? Json(r->str()) : Json(nullptr);
}

std::string cell_or_dash(const Json& j) {
  if (j.is_null()) return "-";
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

}  // namespace

std::string Diagnostic::str() const {
  std::string out = line > 0 ? "line " + std::to_string(line) + ": " : "";
  return out + (pointer.empty() ? "" : pointer + ": ") + message;
}

SpecError::SpecError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid sequence spec"
                                             : "invalid sequence spec: " + diagnostics.front().str()),
      diagnostics_(std::move(diagnostics)) {}

SequencePair parse_sequence_spec(const std::string& text) {
  Json doc;
  std::size_t consumed = 0;
  LocatingSax sax(doc, text, consumed);
  try {
    const char* begin = text.data();
    Json::sax_parse(CountingIterator(begin, &consumed), CountingIterator(begin + text.size(), nullptr),
                    &sax);
  } catch (const nlohmann::json::exception& e) {
    // The SAX parser rethrows a sliced base exception, so locate it ourselves.
    const auto upto = text.begin() + static_cast<std::ptrdiff_t>(std::min(consumed, text.size()));
    const int line = 1 + static_cast<int>(std::count(text.begin(), upto, '\n'));
    throw SpecError({Diagnostic{line, "", e.what()}});
  }
  Checker c(sax.take_lines());
  if (!doc.is_object()) {
    c.error("", "top level must be an object");
    throw SpecError(c.take());
  }
  c.only_keys(doc, "", {"space", "terms", "limit", "analytic", "description"});

  std::optional<CellPartition> partition;
  std::size_t cells = 0;
  if (const Json* space = c.member(doc, "", "space", true)) {
    const Json* kind = c.member(*space, "/space", "kind", true);
    const std::string k = kind && kind->is_string() ? kind->get<std::string>() : "";
    if (kind == nullptr) {
      // reported by member()
    } else if (k == "dyadic") {
      c.only_keys(*space, "/space", {"kind", "level"});
      if (const Json* lv = c.member(*space, "/space", "level", true)) {
        auto level = c.integer(*lv, "/space/level");
        if (level && (*level < 0 || *level > static_cast<std::int64_t>(kMaxSpecLevel))) {
          c.error("/space/level", "level must lie in 0.." + std::to_string(kMaxSpecLevel));
        } else if (level) {
          partition = CellPartition::dyadic_uniform(static_cast<unsigned>(*level));
          cells = std::size_t{1} << *level;
        }
      }
    } else if (k == "atoms") {
      c.only_keys(*space, "/space", {"kind", "labels"});
      if (const Json* labels = c.member(*space, "/space", "labels", true)) {
        std::vector<std::string> ls;
        bool good = labels->is_array() && !labels->empty();
        if (!good) c.error("/space/labels", "expected a nonempty array of strings");
        std::set<std::string> seen;
        for (std::size_t i = 0; good && i < labels->size(); ++i) {
          const std::string p = "/space/labels/" + std::to_string(i);
          if (!(*labels)[i].is_string()) {
            c.error(p, "label must be a string");
            good = false;
          } else if (!seen.insert((*labels)[i].get<std::string>()).second) {
            c.error(p, "duplicate label \"" + (*labels)[i].get<std::string>() + "\"");
            good = false;
          } else {
            ls.push_back((*labels)[i].get<std::string>());
          }
        }
        if (good) {
          cells = ls.size();
          partition = CellPartition::atoms(std::move(ls));
        }
      }
    } else {
      c.error("/space/kind", "kind must be \"dyadic\" or \"atoms\"");
    }
  }

  std::map<std::int64_t, Term> terms;
  std::optional<Term> limit;
  if (partition) {
    if (const Json* ts = c.member(doc, "", "terms", true)) {
      if (!ts->is_array() || ts->empty()) {
        c.error("/terms", "expected a nonempty array of terms");
      } else {
        std::optional<std::int64_t> previous;
        for (std::size_t i = 0; i < ts->size(); ++i) {
          const std::string p = "/terms/" + std::to_string(i);
          const Json& tj = (*ts)[i];
          std::optional<std::int64_t> n;
          if (const Json* nj = c.member(tj, p, "n", true)) n = c.integer(*nj, p + "/n");
          if (n && *n < 1) {
            c.error(p + "/n", "term index must be >= 1");
            n.reset();
          }
          if (n && previous && *n <= *previous) {
            c.error(p + "/n", "term indices must be strictly increasing (" + std::to_string(*n) +
                                  " after " + std::to_string(*previous) + ")");
            n.reset();
          }
          if (n) previous = n;
          auto t = term_at(c, tj, p, *partition, cells, true);
          if (n && t) terms.emplace(*n, std::move(*t));
        }
      }
    }
    if (const Json* lj = c.member(doc, "", "limit", true)) {
      limit = term_at(c, *lj, "/limit", *partition, cells, false);
    }
  } else {
    c.member(doc, "", "terms", true);
    c.member(doc, "", "limit", true);
  }
  std::optional<AnalyticTraces> analytic;
  if (const Json* aj = c.member(doc, "", "analytic", false)) analytic = analytic_at(c, *aj, "/analytic");
  if (const Json* dj = c.member(doc, "", "description", false); dj && !dj->is_string()) {
    c.error("/description", "description must be a string");
  }

  if (!c.ok()) throw SpecError(c.take());
  SequencePair seq = SequencePair::listed(std::move(terms), std::move(*limit));
  if (analytic) seq = seq.with_analytic(std::move(*analytic));
  return seq;
}

SequencePair load_sequence_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return parse_sequence_spec(buf.str());
}

Json closed_form_to_json(const ClosedForm& form) {
  Json pieces = Json::array();
  for (const auto& p : form.pieces()) {
    Json pj;
    pj["from"] = p.from.str();
    pj["exclusive"] = p.exclusive;
    if (p.shape == ClosedForm::Shape::Affine) {
      pj["shape"] = "affine";
      pj["a"] = p.a.str();
      pj["b"] = p.b.str();
    } else {
      pj["shape"] = "dyadic";
      pj["a"] = p.a.str();
    }
    pieces.push_back(std::move(pj));
  }
  return Json{{"pieces", std::move(pieces)}};
}

ClosedForm closed_form_from_json(const Json& j) {
  Checker c({});
  auto form = form_at(c, j, "");
  if (!form) throw SpecError(c.take());
  return *form;
}

Json sequence_to_json(const SequencePair& seq, std::optional<std::int64_t> prefix) {
  std::vector<std::int64_t> ns;
  if (prefix) {
    ns = seq.indices(*prefix);
  } else if (auto last = seq.last_index()) {
    ns = seq.indices(*last);
  } else {
    throw std::invalid_argument("a generated sequence needs a prefix to be serialized");
  }
  if (ns.empty()) throw std::invalid_argument("no terms to serialize");
  std::vector<Term> terms;
  for (auto n : ns) terms.push_back(seq.term(n));
  const Term& lim = seq.limit();

  const CellPartition& base = lim.measure.partition();
  std::optional<CellPartition> target;
  Json space;
  if (base.kind() == PartitionKind::AtomSet) {
    target = base;
    space = Json{{"kind", "atoms"}, {"labels", base.labels()}};
  } else {
    unsigned level = std::max(lim.measure.partition().max_level(), lim.function.partition().max_level());
    for (const auto& t : terms) {
      level = std::max({level, t.measure.partition().max_level(), t.function.partition().max_level()});
    }
    if (level > kMaxSpecLevel) {
      throw std::invalid_argument("sequence needs dyadic level " + std::to_string(level) +
                                  ", above the spec-file limit " + std::to_string(kMaxSpecLevel));
    }
    target = CellPartition::dyadic_uniform(level);
    space = Json{{"kind", "dyadic"}, {"level", level}};
  }
  auto encode = [&](const Term& t) {
    return Json{{"masses", rationals_json(t.measure.lift(*target).masses())},
                {"values", rationals_json(t.function.lift(*target).values())}};
  };

  Json doc;
  doc["space"] = space;
  Json ts = Json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    Json tj{{"n", ns[i]}};
    const Json body = encode(terms[i]);
    for (auto& [k, v] : body.items()) tj[k] = v;
    ts.push_back(std::move(tj));
  }
  doc["terms"] = std::move(ts);
  doc["limit"] = encode(lim);
  if (const auto& a = seq.analytic()) {
    Json aj = Json::object();
    auto single = [&](const char* key, const std::optional<ClosedForm>& f) {
      if (f) aj[key] = closed_form_to_json(*f);
    };
    single("gap_inf", a->gap_inf);
    single("gap_sup", a->gap_sup);
    single("tv", a->tv);
    single("l1", a->l1);
    auto keyed = [&](const char* key, const char* param, const std::map<Rational, ClosedForm>& m) {
      if (m.empty()) return;
      Json arr = Json::array();
      for (const auto& [p, f] : m) arr.push_back(Json{{param, p.str()}, {"form", closed_form_to_json(f)}});
      aj[key] = std::move(arr);
    };
    keyed("exceedance", "eps", a->exceedance);
    keyed("lower_tail", "K", a->lower_tail);
    single("lower_tail_inf", a->lower_tail_inf);
    doc["analytic"] = std::move(aj);
  }
  return doc;
}

Json report_to_json(const VerdictReport& r, const ReportContext& ctx) {
  Json meta;
  meta["tool"] = "fatou";
  meta["command"] = ctx.command;
  meta["subject"] = ctx.subject;
  if (!ctx.title.empty()) meta["title"] = ctx.title;
  meta["first_row"] = ctx.first_row;
  meta["prefix"] = r.prefix;
  meta["eps_grid"] = rationals_json(r.eps_grid);
  meta["K_grid"] = rationals_json(r.K_grid);

  auto expected = [&](const std::optional<ClosedForm>& f, std::int64_t n) -> Json {
    if (!f) return nullptr;
    try {
      return f->eval(Rational(static_cast<long>(n))).str();
    } catch (const std::exception&) {
      return nullptr;
    }
  };

  Json rows = Json::array();
  Json gap_witnesses = Json::array();
  for (const auto& row : r.rows) {
    if (row.n < ctx.first_row) continue;
    Json rj;
    rj["n"] = row.n;
    rj["gap_inf"] = row.gap_inf.str();
    rj["gap_sup"] = row.gap_sup.str();
    rj["tv"] = row.tv.str();
    rj["l1"] = row.l1.str();
    if (ctx.analytic != nullptr) {
      const AnalyticTraces& a = *ctx.analytic;
      rj["expected"] = Json{{"gap_inf", expected(a.gap_inf, row.n)},
                            {"gap_sup", expected(a.gap_sup, row.n)},
                            {"tv", expected(a.tv, row.n)},
                            {"l1", expected(a.l1, row.n)}};
    }
    rows.push_back(std::move(rj));
    Json wj{{"n", row.n}};
    const Json cells = cellset_json(row.gap_witness);
    for (auto& [k, v] : cells.items()) wj[k] = v;
    gap_witnesses.push_back(std::move(wj));
  }

  Json verdicts;
  verdicts["condition_i"] = condition_json(r.cond_i, "eps", false);
  verdicts["condition_ii"] = condition_json(r.cond_ii, "K", true);
  verdicts["gap_status"] = to_string(r.gap_status);
  verdicts["gap_certified_limit"] = optional_rational(r.gap_certified_limit);
  verdicts["tv_status"] = to_string(r.tv_status);
  verdicts["tv_certified_limit"] = optional_rational(r.tv_certified_limit);
  verdicts["consistency"] = to_string(r.consistency);
  verdicts["consistency_flag"] = r.consistency_flag ? Json(*r.consistency_flag) : Json(nullptr);

  Json witnesses;
  witnesses["condition_i"] = witness_json(r.cond_i.witness);
  witnesses["condition_ii"] = witness_json(r.cond_ii.witness);
  witnesses["gap_inf"] = std::move(gap_witnesses);

  Json supp;
  supp["nonnegative"] = r.nonnegative;
  supp["fixed_measure"] = r.fixed_measure;
  Json shifted = Json::array();
  for (const auto& s : r.shifted_tails) {
    shifted.push_back(Json{{"K", s.K.str()}, {"from_n", s.shift}, {"infimum", s.infimum.str()}});
  }
  supp["shifted_tail_infima"] = std::move(shifted);
  Json cim = Json::array();
  for (const auto& t : r.convergence_in_measure) {
    cim.push_back(Json{{"eps", t.parameter.str()}, {"trace", trace_json(t.trace)}});
  }
  supp["convergence_in_measure"] = std::move(cim);
  Json ui = Json::array();
  for (const auto& t : r.ui_tails) {
    Rational sup;
    for (const auto& p : t.trace) sup = max(sup, p.value);
    ui.push_back(Json{{"K", t.parameter.str()}, {"supremum", sup.str()}, {"trace", trace_json(t.trace)}});
  }
  supp["ui_tails"] = std::move(ui);

  Json out;
  out["meta"] = std::move(meta);
  out["per_n_rows"] = std::move(rows);
  out["verdicts"] = std::move(verdicts);
  out["witnesses"] = std::move(witnesses);
  out["analytic_mismatches"] = r.analytic_mismatches;
  out["supplementary"] = std::move(supp);
  return out;
}

std::string report_to_markdown(const Json& report) {
  std::ostringstream md;
  const Json& meta = report.at("meta");
  md << "# " << meta.at("command").get<std::string>() << " " << meta.at("subject").get<std::string>() << "\n\n";
  if (meta.contains("title")) md << meta.at("title").get<std::string>() << "\n\n";
  md << "- prefix: " << meta.at("prefix").get<std::int64_t>() << "\n";
  auto grid = [](const Json& g) {
    std::string s;
    for (const auto& x : g) s += (s.empty() ? "" : ", ") + x.get<std::string>();
    return s;
  };
  md << "- eps grid: " << grid(meta.at("eps_grid")) << "\n";
  md << "- K grid: " << grid(meta.at("K_grid")) << "\n\n";

  const Json& rows = report.at("per_n_rows");
  const bool with_expected = !rows.empty() && rows.front().contains("expected");
  md << "| n | gap_inf | gap_sup | tv | l1 |" << (with_expected ? " expected gap_inf | expected tv |" : "") << "\n";
  md << "|---|---|---|---|---|" << (with_expected ? "---|---|" : "") << "\n";
  for (const auto& row : rows) {
    md << "| " << row.at("n").get<std::int64_t>() << " | " << cell_or_dash(row.at("gap_inf")) << " | "
       << cell_or_dash(row.at("gap_sup")) << " | " << cell_or_dash(row.at("tv")) << " | "
       << cell_or_dash(row.at("l1")) << " |";
    if (with_expected) {
      md << " " << cell_or_dash(row.at("expected").at("gap_inf")) << " | "
         << cell_or_dash(row.at("expected").at("tv")) << " |";
    }
    md << "\n";
  }

  const Json& v = report.at("verdicts");
  md << "\n## Verdicts\n\n";
  md << "| item | result |\n|---|---|\n";
  md << "| condition (i) | " << v.at("condition_i").at("verdict").get<std::string>() << " |\n";
  md << "| condition (ii) | " << v.at("condition_ii").at("verdict").get<std::string>() << " |\n";
  md << "| gap | " << v.at("gap_status").get<std::string>() << " |\n";
  md << "| total variation | " << v.at("tv_status").get<std::string>() << " |\n";
  md << "| consistency | " << v.at("consistency").get<std::string>() << " |\n";

  md << "\n## Witnesses\n\n";
  const Json& w = report.at("witnesses");
  for (const char* key : {"condition_i", "condition_ii"}) {
    const Json& x = w.at(key);
    md << "- " << key << ": ";
    if (x.is_null()) {
      md << "none\n";
    } else {
      md << x.at("parameter").get<std::string>() << " = " << x.at("parameter_value").get<std::string>()
         << ", n = " << x.at("n").get<std::int64_t>() << ", value " << x.at("value").get<std::string>() << "\n";
    }
  }
  const Json& mm = report.at("analytic_mismatches");
  md << "\n## Closed-form check\n\n";
  if (mm.empty()) {
    md << "All closed forms agree with the computed values.\n";
  } else {
    for (const auto& m : mm) md << "- " << m.get<std::string>() << "\n";
  }
  return md.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_output(const std::string& content, const std::optional<std::filesystem::path>& path,
                  std::ostream& fallback) {
  if (!path || path->empty()) {
    fallback << content;
    fallback.flush();
    if (!fallback) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path->string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("error while writing " + path->string());
}

}  // namespace fatou::io
