#include "kfss/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "kfss/error.hpp"
#include "kfss/instances.hpp"
#include "kfss/parallel.hpp"
#include "kfss/selection.hpp"
#include "kfss/verify.hpp"

namespace kfss {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.12g}", x);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(const std::string& text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw DomainError(fmt::format("{}: '{}' is not a valid number", what, text));
  }
  return value;
}

std::vector<double> parse_list(const std::string& text, std::string_view what) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_number<double>(part, what));
  return values;
}

/// "1,2,3;4,5,6" (newlines also separate subsets).
std::vector<Triple> parse_collection(std::string text) {
  for (char& ch : text) {
    if (ch == '\n') ch = ';';
  }
  std::vector<Triple> collection;
  for (const auto& subset : split(text, ';')) {
    if (subset.empty()) continue;
    const auto elems = split(subset, ',');
    if (elems.size() != 3) {
      throw DomainError(fmt::format("collection: subset '{}' must have exactly 3 elements", subset));
    }
    Triple t{};
    for (std::size_t i = 0; i < 3; ++i) t[i] = parse_number<int>(elems[i], "collection");
    collection.push_back(t);
  }
  return collection;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw DomainError(fmt::format("failed writing '{}'", path.string()));
}

std::string diagonal_text(const SteadyState& s) {
  std::string text;
  const auto d = s.sigma().diagonal();
  for (Index i = 0; i < d.size(); ++i) {
    if (i > 0) text += ' ';
    text += num(d(i));
  }
  return text;
}

std::string picks_text(const std::vector<std::size_t>& picks) {
  std::string text;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i > 0) text += ',';
    text += std::to_string(picks[i] + 1);
  }
  return text;
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

struct Options {
  std::string instance;
  std::string mask;
  std::optional<double> budget;
  std::string family;
  std::optional<int> m;
  std::optional<double> k;
  std::string lambda1;
  std::string h;
  std::string collection;
  std::string collection_file;
  std::string out;
  std::string record;
  std::uint64_t seed = 1;
};

nlohmann::json base_record(const std::string& command, const Options& o) {
  nlohmann::json rec;
  rec["command"] = command;
  rec["instance"] = o.instance;
  return rec;
}

void finish_record(const Options& o, nlohmann::json rec, Clock::time_point start) {
  if (o.record.empty()) return;
  rec["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_file(o.record, rec.dump(2) + "\n");
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto start = Clock::now();
  const auto inst = load_instance(o.instance);
  const auto q = static_cast<std::size_t>(inst.catalog.q());
  const Selection sel = Selection::from_mask(o.mask);
  if (sel.size() != q) {
    throw DimensionMismatch(fmt::format("mask has {} entries but the instance has {} sensors",
                                        sel.size(), q));
  }
  const auto steady = solve_dare(inst.sys, inst.catalog, sel);

  auto rec = base_record("solve", o);
  rec["parameters"] = {{"mask", o.mask}};
  rec["trace"] = json_number(steady.trace());
  rec["iterations"] = steady.iterations();
  out << "selection " << sel.to_mask() << '\n';
  if (steady.is_unbounded()) {
    out << "unbounded\n";
    rec["unbounded"] = true;
    finish_record(o, rec, start);
    return kExitUnbounded;
  }
  out << "trace " << num(steady.trace()) << '\n';
  out << "diagonal " << diagonal_text(steady) << '\n';
  out << "iterations " << steady.iterations() << '\n';
  std::vector<double> diag(steady.sigma().diagonal().begin(), steady.sigma().diagonal().end());
  rec["diagonal"] = diag;
  finish_record(o, rec, start);
  return kExitOk;
}

int report_selection(const std::string& command, const Options& o, const SelectionResult& result,
                     double budget, Clock::time_point start, std::ostream& out) {
  auto rec = base_record(command, o);
  rec["parameters"] = {{"budget", budget}};
  rec["selection"] = result.mu.to_mask();
  rec["trace"] = json_number(result.trace());
  rec["iterations"] = result.steady.iterations();
  out << "selection " << result.mu.to_mask() << '\n';
  if (command == "greedy") {
    out << "picks " << picks_text(result.picks) << '\n';
    std::vector<std::size_t> picks;
    for (auto p : result.picks) picks.push_back(p + 1);
    rec["picks"] = picks;
  }
  if (result.steady.is_unbounded()) {
    out << "unbounded\n";
    rec["unbounded"] = true;
    finish_record(o, rec, start);
    return kExitUnbounded;
  }
  out << "trace " << num(result.trace()) << '\n';
  finish_record(o, rec, start);
  return kExitOk;
}

int cmd_greedy(const Options& o, std::ostream& out) {
  const auto start = Clock::now();
  const auto inst = load_instance(o.instance);
  const double budget = o.budget.value_or(inst.budget);
  if (!(budget >= 0.0) || budget != std::floor(budget)) {
    throw DomainError("greedy budget must be a nonnegative whole number of sensors");
  }
  const auto result = greedy_select(inst.sys, inst.catalog, static_cast<std::size_t>(budget));
  return report_selection("greedy", o, result, budget, start, out);
}

int cmd_exhaustive(const Options& o, std::ostream& out) {
  const auto start = Clock::now();
  const auto inst = load_instance(o.instance);
  const double budget = o.budget.value_or(inst.budget);
  const auto result = exhaustive_select(inst.sys, inst.catalog, budget);
  return report_selection("exhaustive", o, result, budget, start, out);
}

double single_value(const std::string& text, std::string_view what, double fallback) {
  const auto values = parse_list(text, what);
  if (values.empty()) return fallback;
  if (values.size() != 1) throw DomainError(fmt::format("{} takes a single value", what));
  return values.front();
}

X3CInstance collection_from(const Options& o) {
  if (!o.m) throw DomainError("--m is required for this family");
  std::string text = o.collection;
  if (!o.collection_file.empty()) {
    if (!text.empty()) throw DomainError("give either --collection or --collection-file, not both");
    text = read_file(o.collection_file);
  }
  return X3CInstance(*o.m, parse_collection(text));
}

int cmd_gen(const Options& o, std::ostream& out) {
  std::optional<HardnessInstance> inst;
  if (o.family == "theorem1") {
    inst.emplace(build_theorem1_instance(collection_from(o), single_value(o.lambda1, "--lambda1", 0.5)));
  } else if (o.family == "theorem2") {
    if (!o.k) throw DomainError("--k is required for family theorem2");
    inst.emplace(build_theorem2_instance(collection_from(o), *o.k));
  } else if (o.family == "example1") {
    const double lambda1 = single_value(o.lambda1, "--lambda1", 0.5);
    if (o.h.empty()) throw DomainError("--h is required for family example1");
    inst.emplace(build_example1_instance(lambda1, single_value(o.h, "--h", 0.0)));
  } else {
    throw DomainError(fmt::format("unknown family '{}'", o.family));
  }

  const std::string text = serialize_instance(*inst);
  if (o.out.empty()) {
    out << text;
    return kExitOk;
  }
  write_file(o.out, text);
  out << fmt::format("{} n={} q={} budget={} -> {}\n", o.family, inst->sys.n(), inst->catalog.q(),
                     num(inst->budget), o.out);
  return kExitOk;
}

int cmd_sweep_ratio(const Options& o, std::ostream& out) {
  const auto lambdas = parse_list(o.lambda1, "--lambda1");
  const auto hs = parse_list(o.h, "--h");
  for (double l : lambdas) {
    if (!(std::abs(l) > 0.0 && std::abs(l) < 1.0)) throw DomainError("--lambda1 values must satisfy 0 < |lambda1| < 1");
  }
  for (double h : hs) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("--h values must be finite and positive");
  }

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw DomainError(fmt::format("cannot write '{}'", o.out));
  }
  std::ostream& sink = o.out.empty() ? out : file;

  try {
    sink << "lambda1,h,trace_greedy,trace_opt,ratio,ratio_limit\n";
    const auto rows = detail::parallel_map(lambdas.size() * hs.size(), [&](std::size_t k) {
      const double lambda1 = lambdas[k / hs.size()];
      const double h = hs[k % hs.size()];
      const auto report = theorem3_ratio(lambda1, h);
      return fmt::format("{},{},{},{},{},{}\n", num(lambda1), num(h), num(report.greedy.trace()),
                         num(report.optimal.trace()), num(report.ratio.ratio),
                         num(report.limit_ratio));
    });
    for (const auto& row : rows) sink << row;
    sink.flush();
    if (!sink) throw DomainError("failed writing CSV output");
  } catch (...) {
    if (!o.out.empty()) {
      file.close();
      std::error_code ec;
      fs::remove(o.out, ec);
    }
    throw;
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  std::vector<SuiteSummary> suites;
  suites.push_back(run_lemma1_suite(o.seed, 200));
  suites.push_back(run_lemma2_suite());
  suites.push_back(run_transform_suite(x3c_no_pool()));
  suites.push_back(run_theorem3_suite({0.5, 0.9, 0.99}, {1.0, 10.0, 1e3, 1e4}));

  bool all = true;
  for (const auto& s : suites) {
    out << fmt::format("{:<10} cases={} failures={} worst={} {}\n", s.name, s.cases, s.failures,
                       num(s.worst), s.passed() ? "PASS" : "FAIL");
    all = all && s.passed();
  }
  return all ? kExitOk : kExitVerifyFailed;
}

constexpr const char* kFooter =
    "Exit codes: 0 success, 1 usage, parse or validation error, 2 unbounded steady state\n"
    "(undetectable selection), 3 a verification suite failed.";

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state Kalman filter sensor selection", "kfss"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.footer(kFooter);
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "Steady-state covariance for one selection");
  solve->add_option("--instance", o.instance, "Instance file")->required();
  solve->add_option("--mask", o.mask, "Selection bitmask, sensor 1 first (e.g. 101)")->required();
  solve->add_option("--record", o.record, "Write a JSON run record to this path");

  auto* greedy = app.add_subcommand("greedy", "Greedy selection with unit costs");
  greedy->add_option("--instance", o.instance, "Instance file")->required();
  greedy->add_option("--budget", o.budget, "Number of sensors (default: the instance budget)");
  greedy->add_option("--record", o.record, "Write a JSON run record to this path");

  auto* exhaustive = app.add_subcommand("exhaustive", "Optimal selection by enumeration");
  exhaustive->add_option("--instance", o.instance, "Instance file")->required();
  exhaustive->add_option("--budget", o.budget, "Cost budget (default: the instance budget)");
  exhaustive->add_option("--record", o.record, "Write a JSON run record to this path");

  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->add_option("--family", o.family, "theorem1, theorem2 or example1")->required();
  gen->add_option("--m", o.m, "X3C universe parameter (universe 1..3m)");
  gen->add_option("--collection", o.collection, "Subsets such as \"1,2,3;4,5,6\"");
  gen->add_option("--collection-file", o.collection_file, "File holding the subsets");
  gen->add_option("--k", o.k, "Approximation factor K (theorem2)");
  gen->add_option("--lambda1", o.lambda1, "Unstable-looking mode lambda1 (theorem1, example1)");
  gen->add_option("--h", o.h, "Gain h (example1)");
  gen->add_option("--out", o.out, "Output path (default: standard output)");

  auto* sweep = app.add_subcommand("sweep-ratio", "Greedy/optimal ratio over a (lambda1, h) grid");
  sweep->add_option("--lambda1", o.lambda1, "Comma-separated lambda1 values")->required();
  sweep->add_option("--h", o.h, "Comma-separated h values")->required();
  sweep->add_option("--out", o.out, "CSV path (default: standard output)");

  auto* verify = app.add_subcommand("verify", "Run the lemma verification suites");
  verify->add_option("--seed", o.seed, "Seed for the random diagonal instances");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(o, out);
    if (*greedy) return cmd_greedy(o, out);
    if (*exhaustive) return cmd_exhaustive(o, out);
    if (*gen) return cmd_gen(o, out);
    if (*sweep) return cmd_sweep_ratio(o, out);
    if (*verify) return cmd_verify(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace kfss
