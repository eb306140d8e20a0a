#include "fatou/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <random>
#include <sstream>

#include "fatou/gallery.hpp"
#include "fatou/io.hpp"
#include "fatou/random.hpp"

namespace fatou::cli {

namespace {

using io::Json;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<Rational> parse_grid(const std::string& text, const char* name) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const Rational r = Rational::parse(item);
      if (r.sign() <= 0) throw std::invalid_argument("must be positive");
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--") + name + ": bad value \"" + item + "\" (" + e.what() + ")");
    }
  }
  if (out.empty()) throw UsageError(std::string("--") + name + " needs at least one value");
  return out;
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text) {
  auto to_int = [&](const std::string& s) -> std::int64_t {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        s.size() > 18) {
      throw UsageError("--n: expected a..b or a single index, got \"" + text + "\"");
    }
    return std::stoll(s);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto n = to_int(text);
    return {n, n};
  }
  return {to_int(text.substr(0, dots)), to_int(text.substr(dots + 2))};
}

std::optional<std::filesystem::path> out_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

std::string render(const Json& report, const std::string& format) {
  return format == "md" ? io::report_to_markdown(report) : io::dump(report);
}

int cmd_gallery(const std::string& id, const std::string& range, const std::string& eps_text,
                const std::string& K_text, const std::string& format, const std::string& out,
                std::ostream& stdout_, std::ostream& err) {
  std::vector<std::string> ids = gallery_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    err << "error: unknown example \"" << id << "\" (known: 3.1, 3.2, 3.3, 3.4)\n";
    return exit_code::kUsage;
  }
  const GalleryEntry& entry = gallery_entry(id);
  const auto [first, last] = parse_range(range);
  if (first < 1 || last < first || last > entry.max_n || last > kDefaultPrefix) {
    err << "error: --n must satisfy 1 <= a <= b <= " << std::min(entry.max_n, kDefaultPrefix) << "\n";
    return exit_code::kUsage;
  }
  std::vector<Rational> eps = eps_text.empty() ? default_eps_grid() : parse_grid(eps_text, "eps");
  std::vector<Rational> K = K_text.empty() ? default_K_grid() : parse_grid(K_text, "K");
  if (eps_text.empty() && std::find(eps.begin(), eps.end(), entry.eps) == eps.end()) eps.push_back(entry.eps);
  if (K_text.empty() && std::find(K.begin(), K.end(), entry.K) == K.end()) K.push_back(entry.K);

  const SequencePair seq = entry.sequence(eps, K);
  const VerdictReport report = equivalence_report(seq, eps, K, last);
  io::ReportContext ctx{"gallery", entry.id, entry.title, first, &*seq.analytic()};
  const Json j = io::report_to_json(report, ctx);
  io::write_output(render(j, format), out_path(out), stdout_);
  if (!report.analytic_mismatches.empty()) {
    for (const auto& m : report.analytic_mismatches) err << "mismatch: " << m << "\n";
    return exit_code::kMismatch;
  }
  return exit_code::kOk;
}

int cmd_check(const std::string& spec, std::int64_t prefix, const std::string& eps_text,
              const std::string& K_text, const std::string& format, const std::string& out,
              std::ostream& stdout_, std::ostream& err) {
  if (prefix < 1) {
    err << "error: --prefix must be >= 1\n";
    return exit_code::kUsage;
  }
  const auto eps = eps_text.empty() ? default_eps_grid() : parse_grid(eps_text, "eps");
  const auto K = K_text.empty() ? default_K_grid() : parse_grid(K_text, "K");
  std::optional<SequencePair> seq;
  try {
    seq = io::load_sequence_spec(spec);
  } catch (const io::SpecError& e) {
    for (const auto& d : e.diagnostics()) {
      err << spec << ":";
      if (d.line > 0) err << d.line << ":";
      err << " ";
      if (!d.pointer.empty()) err << d.pointer << ": ";
      err << d.message << "\n";
    }
    return exit_code::kData;
  }
  if (seq->indices(prefix).empty()) {
    err << "error: the sequence file has no terms with n <= " << prefix << "\n";
    return exit_code::kData;
  }
  const VerdictReport report = equivalence_report(*seq, eps, K, prefix);
  io::ReportContext ctx{"check", spec, "", 1, seq->analytic() ? &*seq->analytic() : nullptr};
  io::write_output(render(io::report_to_json(report, ctx), format), out_path(out), stdout_);
  if (!report.analytic_mismatches.empty()) {
    for (const auto& m : report.analytic_mismatches) err << spec << ": analytic block disagrees: " << m << "\n";
    return exit_code::kData;
  }
  switch (report.consistency) {
    case Consistency::Consistent: return exit_code::kOk;
    case Consistency::HypothesisNotMet: return exit_code::kHypothesisNotMet;
    case Consistency::Inconsistent: return exit_code::kMismatch;
    case Consistency::Undetermined: return exit_code::kUndetermined;
  }
  return exit_code::kMismatch;
}

Json instance_json(const random::Instance& in) {
  const detail::NodePtr roots[] = {in.f.tree(), in.m.tree(), in.g.tree(), in.v.tree()};
  const auto& p = in.f.partition();
  Json cells = Json::array();
  for (const auto& c : detail::flatten(roots, p.layout(), kernels::kMaxEnumerationCells)) {
    Json cj;
    cj["cell"] = p.kind() == PartitionKind::AtomSet ? p.labels()[c.index]
                                                    : DyadicInterval(c.index, c.level).str();
    cj["f"] = c.values[0].str();
    cj["m"] = (c.values[1] * c.weight).str();
    cj["g"] = c.values[2].str();
    cj["v"] = (c.values[3] * c.weight).str();
    cells.push_back(std::move(cj));
  }
  return Json{{"kind", p.kind() == PartitionKind::AtomSet ? "atoms" : "dyadic"}, {"cells", std::move(cells)}};
}

int cmd_oracle(std::int64_t max_cells, std::int64_t trials, std::uint64_t seed, bool inject_fault,
               const std::string& out, std::ostream& stdout_, std::ostream& err) {
  if (max_cells < 1 || max_cells > static_cast<std::int64_t>(kernels::kMaxEnumerationCells)) {
    err << "error: --max-cells must lie in 1.." << kernels::kMaxEnumerationCells << "\n";
    return exit_code::kUsage;
  }
  if (trials < 0) {
    err << "error: --trials must be >= 0\n";
    return exit_code::kUsage;
  }
  std::mt19937_64 rng(seed);
  std::vector<random::Instance> instances;
  instances.reserve(static_cast<std::size_t>(trials));
  for (std::int64_t t = 0; t < trials; ++t) {
    instances.push_back(random::instance(rng, static_cast<std::size_t>(max_cells)));
  }

  struct Failure {
    std::string check;
    Rational closed_form;
    Rational brute_force;
  };
  std::vector<std::optional<Failure>> failures(instances.size());
  kernels::for_each_index(
      instances.size(),
      [&](std::size_t i) {
        const auto& in = instances[i];
        Rational gi = gap_inf(in.f, in.m, in.g, in.v).value;
        if (inject_fault && i == 0) gi += Rational(1);
        const Rational bi = brute_force_gap(in.f, in.m, in.g, in.v, GapMode::Inf, Execution::Serial);
        if (gi != bi) {
          failures[i] = Failure{"gap_inf", gi, bi};
          return;
        }
        const Rational gs = gap_sup(in.f, in.m, in.g, in.v);
        const Rational bs = brute_force_gap(in.f, in.m, in.g, in.v, GapMode::Sup, Execution::Serial);
        if (gs != bs) {
          failures[i] = Failure{"gap_sup", gs, bs};
          return;
        }
        const Rational tv = tv_distance(in.m, in.v);
        const Rational bt = brute_force_tv(in.m, in.v, Execution::Serial);
        if (tv != bt) failures[i] = Failure{"tv_distance", tv, bt};
      },
      Execution::Parallel);

  Json failed = Json::array();
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    failed.push_back(Json{{"trial", i},
                          {"check", failures[i]->check},
                          {"closed_form", failures[i]->closed_form.str()},
                          {"brute_force", failures[i]->brute_force.str()},
                          {"instance", instance_json(instances[i])}});
  }
  Json summary;
  summary["command"] = "oracle";
  summary["max_cells"] = max_cells;
  summary["trials"] = trials;
  summary["seed"] = seed;
  summary["checks_per_trial"] = Json::array({"gap_inf", "gap_sup", "tv_distance"});
  summary["failures"] = failed.size();
  summary["result"] = failed.empty() ? "pass" : "fail";
  summary["failing_instances"] = std::move(failed);
  io::write_output(io::dump(summary), out_path(out), stdout_);
  if (summary["failures"].get<std::size_t>() > 0) {
    err << "oracle: " << summary["failures"].get<std::size_t>() << " of " << trials
        << " trials disagree with enumeration\n";
    return exit_code::kMismatch;
  }
  return exit_code::kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact uniform Fatou diagnostics on finite cell partitions", "fatou"};
  app.require_subcommand(1);

  std::string format = "json";
  std::string out_file;
  std::string eps_text;
  std::string K_text;

  auto* gallery = app.add_subcommand("gallery", "Reproduce a counterexample sequence and check its closed forms");
  std::string example;
  std::string range = "1..8";
  gallery->add_option("--example", example, "Example id: 3.1, 3.2, 3.3 or 3.4")->required();
  gallery->add_option("--n", range, "Index range a..b (at most 64)");
  gallery->add_option("--eps", eps_text, "Comma-separated eps grid, e.g. 1,1/2");
  gallery->add_option("--K", K_text, "Comma-separated K grid");
  gallery->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md"}));
  gallery->add_option("--out", out_file, "Output file (default: stdout)");

  auto* check = app.add_subcommand("check", "Run the diagnostics on a sequence spec file");
  std::string spec;
  std::int64_t prefix = kDefaultPrefix;
  check->add_option("--spec", spec, "Sequence spec (JSON)")->required();
  check->add_option("--prefix", prefix, "Largest n examined");
  check->add_option("--eps", eps_text, "Comma-separated eps grid");
  check->add_option("--K", K_text, "Comma-separated K grid");
  check->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md"}));
  check->add_option("--out", out_file, "Output file (default: stdout)");

  auto* oracle = app.add_subcommand("oracle", "Compare closed forms with brute-force enumeration");
  std::int64_t max_cells = 12;
  std::int64_t trials = 200;
  std::uint64_t seed = 42;
  bool inject_fault = false;
  oracle->add_option("--max-cells", max_cells, "Largest cell count (at most 20)");
  oracle->add_option("--trials", trials, "Number of random instances");
  oracle->add_option("--seed", seed, "Random seed");
  oracle->add_option("--out", out_file, "Output file (default: stdout)");
  oracle->add_flag("--inject-fault", inject_fault)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  }

  try {
    if (gallery->parsed()) return cmd_gallery(example, range, eps_text, K_text, format, out_file, out, err);
    if (check->parsed()) return cmd_check(spec, prefix, eps_text, K_text, format, out_file, out, err);
    if (oracle->parsed()) return cmd_oracle(max_cells, trials, seed, inject_fault, out_file, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kIo;
  }
  return exit_code::kUsage;
}

}  // namespace fatou::cli
