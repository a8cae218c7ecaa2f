#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "kfss/error.hpp"
#include "kfss/instances.hpp"

namespace kfss {

namespace {

using json = nlohmann::json;

std::string number(double x) { return fmt::format("{:.17g}", x); }

void write_row(std::string& out, const auto& row) {
  out += '[';
  for (Index j = 0; j < row.size(); ++j) {
    if (j > 0) out += ", ";
    out += number(row(j));
  }
  out += ']';
}

void write_matrix(std::string& out, const Matrix& m, const std::string& indent) {
  if (m.rows() == 0) {
    out += "[]";
    return;
  }
  out += "[\n";
  for (Index i = 0; i < m.rows(); ++i) {
    out += indent + "  ";
    write_row(out, m.row(i));
    out += i + 1 < m.rows() ? ",\n" : "\n";
  }
  out += indent + "]";
}

void write_collection(std::string& out, const std::vector<Triple>& collection) {
  out += '[';
  for (std::size_t i = 0; i < collection.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt::format("[{}, {}, {}]", collection[i][0], collection[i][1], collection[i][2]);
  }
  out += ']';
}

std::string provenance_fields(const Provenance& p) {
  struct Visitor {
    std::string operator()(const Theorem1Provenance& t) const {
      std::string out = fmt::format(",\n    \"m\": {},\n    \"tau\": {},\n    \"lambda1\": {},\n    \"collection\": ",
                                    t.m, t.tau, number(t.lambda1));
      write_collection(out, t.collection);
      return out;
    }
    std::string operator()(const Theorem2Provenance& t) const {
      std::string out = fmt::format(
          ",\n    \"m\": {},\n    \"tau\": {},\n    \"K\": {},\n    \"lambda1\": {},\n    \"epsilon\": {},\n    \"collection\": ",
          t.m, t.tau, number(t.K), number(t.lambda1), number(t.epsilon));
      write_collection(out, t.collection);
      return out;
    }
    std::string operator()(const Example1Provenance& e) const {
      return fmt::format(",\n    \"lambda1\": {},\n    \"h\": {}", number(e.lambda1), number(e.h));
    }
    std::string operator()(const CustomProvenance&) const { return {}; }
  };
  return std::visit(Visitor{}, p);
}

// -- parsing ----------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  /// Line of the first occurrence of the quoted key, 0 if absent.
  std::size_t line_of(const std::string& field) const {
    const std::string key = "\"" + field + "\"";
    const auto pos = text_.find(key);
    if (pos == std::string_view::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    // "provenance.lambda1" is located by "lambda1", "C.3" by "C".
    std::string key = field;
    if (const auto dot = key.rfind('.'); dot != std::string::npos) {
      const std::string leaf = key.substr(dot + 1);
      const bool numeric = std::all_of(leaf.begin(), leaf.end(), [](char c) { return c >= '0' && c <= '9'; });
      key = numeric ? key.substr(0, dot) : leaf;
    }
    throw ParseError(message, line_of(key), field);
  }

  const json& member(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) fail(path, "missing required field");
    return obj.at(key);
  }

  double real(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  long long integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

  Matrix matrix(const json& v, Index rows, Index cols, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of rows");
    if (static_cast<Index>(v.size()) != rows) {
      fail(path, fmt::format("expected {} rows, found {}", rows, v.size()));
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const json& row = v[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
        fail(path, fmt::format("row {} must have {} entries", i + 1, cols));
      }
      for (Index j = 0; j < cols; ++j) m(i, j) = real(row[static_cast<std::size_t>(j)], path);
    }
    return m;
  }

  std::vector<Triple> collection(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of subsets");
    std::vector<Triple> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& s = v[i];
      if (!s.is_array() || s.size() != 3) {
        fail(path, fmt::format("subset {} must have exactly 3 elements", i + 1));
      }
      Triple t{};
      for (std::size_t k = 0; k < 3; ++k) t[k] = static_cast<int>(integer(s[k], path));
      out.push_back(t);
    }
    return out;
  }

 private:
  std::string_view text_;
};

template <typename M>
bool identical(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool same_structure(const HardnessInstance& a, const HardnessInstance& b) {
  if (a.catalog.q() != b.catalog.q()) return false;
  for (Index i = 0; i < a.catalog.q(); ++i) {
    if (!identical(a.catalog.block(i), b.catalog.block(i))) return false;
  }
  return identical(a.sys.A(), b.sys.A()) && identical(a.sys.W(), b.sys.W()) &&
         identical(a.catalog.V(), b.catalog.V()) && identical(a.catalog.costs(), b.catalog.costs()) &&
         a.budget == b.budget;
}

}  // namespace

std::string serialize_instance(const HardnessInstance& inst) {
  std::string out = "{\n";
  out += fmt::format("  \"schema_version\": {},\n", kInstanceSchemaVersion);
  out += fmt::format("  \"n\": {},\n", inst.sys.n());
  out += fmt::format("  \"q\": {},\n", inst.catalog.q());
  out += "  \"A\": ";
  write_matrix(out, inst.sys.A(), "  ");
  out += ",\n  \"W\": ";
  write_matrix(out, inst.sys.W(), "  ");
  out += ",\n  \"V\": ";
  write_matrix(out, inst.catalog.V(), "  ");
  out += ",\n  \"C\": [\n";
  for (Index i = 0; i < inst.catalog.q(); ++i) {
    out += "    ";
    write_matrix(out, inst.catalog.block(i), "    ");
    out += i + 1 < inst.catalog.q() ? ",\n" : "\n";
  }
  out += "  ],\n  \"b\": ";
  write_row(out, inst.catalog.costs().transpose());
  out += fmt::format(",\n  \"budget\": {},\n", number(inst.budget));
  out += fmt::format("  \"provenance\": {{\n    \"family\": \"{}\"", family_name(inst.provenance));
  out += provenance_fields(inst.provenance);
  out += "\n  }\n}\n";
  return out;
}

HardnessInstance parse_instance(std::string_view text) {
  const Reader rd(text);
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError("malformed document", line, "");
  }
  if (!doc.is_object()) throw ParseError("top level must be an object", 1, "");

  const long long version = rd.integer(rd.member(doc, "schema_version", "schema_version"), "schema_version");
  if (version != kInstanceSchemaVersion) {
    rd.fail("schema_version", fmt::format("unsupported schema version {}", version));
  }
  const long long n = rd.integer(rd.member(doc, "n", "n"), "n");
  const long long q = rd.integer(rd.member(doc, "q", "q"), "q");
  if (n < 1) rd.fail("n", "state dimension must be positive");
  if (q < 1) rd.fail("q", "sensor count must be positive");

  Matrix a = rd.matrix(rd.member(doc, "A", "A"), n, n, "A");
  Matrix w = rd.matrix(rd.member(doc, "W", "W"), n, n, "W");

  const json& cj = rd.member(doc, "C", "C");
  if (!cj.is_array() || static_cast<long long>(cj.size()) != q) {
    rd.fail("C", fmt::format("expected {} sensor blocks", q));
  }
  std::vector<Matrix> blocks;
  Index s = 0;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const json& block = cj[i];
    const std::string path = fmt::format("C.{}", i + 1);
    if (!block.is_array() || block.empty()) rd.fail(path, "sensor block must be a non-empty array of rows");
    blocks.push_back(rd.matrix(block, static_cast<Index>(block.size()), n, path));
    s += blocks.back().rows();
  }
  Matrix v = rd.matrix(rd.member(doc, "V", "V"), s, s, "V");

  const json& bj = rd.member(doc, "b", "b");
  if (!bj.is_array() || static_cast<long long>(bj.size()) != q) {
    rd.fail("b", fmt::format("expected {} costs", q));
  }
  Vector b(q);
  for (Index i = 0; i < q; ++i) b(i) = rd.real(bj[static_cast<std::size_t>(i)], "b");
  const double budget = rd.real(rd.member(doc, "budget", "budget"), "budget");
  if (!(budget >= 0.0)) rd.fail("budget", "budget must be nonnegative");

  std::optional<SystemModel> sys;
  std::optional<SensorCatalog> catalog;
  try {
    sys.emplace(std::move(a), std::move(w));
  } catch (const InvalidModel& e) {
    rd.fail("A", e.what());
  }
  try {
    catalog.emplace(std::move(blocks), std::move(v), std::move(b));
  } catch (const InvalidModel& e) {
    rd.fail("C", e.what());
  }
  HardnessInstance inst{std::move(*sys), std::move(*catalog), budget, CustomProvenance{}};

  const json& pj = rd.member(doc, "provenance", "provenance");
  const json& fam = rd.member(pj, "family", "provenance.family");
  if (!fam.is_string()) rd.fail("provenance.family", "expected a string");
  const std::string family = fam.get<std::string>();
  if (family == "custom") return inst;

  // Generated families are re-derived from their parameters and must match.
  std::optional<HardnessInstance> expected;
  try {
    if (family == "example1") {
      expected.emplace(build_example1_instance(rd.real(rd.member(pj, "lambda1", "provenance.lambda1"), "provenance.lambda1"),
                                               rd.real(rd.member(pj, "h", "provenance.h"), "provenance.h")));
    } else if (family == "theorem1" || family == "theorem2") {
      const auto m = static_cast<int>(rd.integer(rd.member(pj, "m", "provenance.m"), "provenance.m"));
      const auto tau = rd.integer(rd.member(pj, "tau", "provenance.tau"), "provenance.tau");
      auto subsets = rd.collection(rd.member(pj, "collection", "provenance.collection"), "provenance.collection");
      if (static_cast<long long>(subsets.size()) != tau) {
        rd.fail("provenance.tau", "tau does not match the collection size");
      }
      const X3CInstance x3c(m, std::move(subsets));
      const double lambda1 = rd.real(rd.member(pj, "lambda1", "provenance.lambda1"), "provenance.lambda1");
      if (family == "theorem1") {
        expected.emplace(build_theorem1_instance(x3c, lambda1));
      } else {
        const double K = rd.real(rd.member(pj, "K", "provenance.K"), "provenance.K");
        expected.emplace(build_theorem2_instance(x3c, K));
        const auto& prov = std::get<Theorem2Provenance>(expected->provenance);
        if (prov.lambda1 != lambda1) rd.fail("provenance.lambda1", "lambda1 does not follow from K and m");
        const double epsilon = rd.real(rd.member(pj, "epsilon", "provenance.epsilon"), "provenance.epsilon");
        if (prov.epsilon != epsilon) rd.fail("provenance.epsilon", "epsilon does not follow from K and m");
      }
    } else {
      rd.fail("provenance.family", "unknown family '" + family + "'");
    }
  } catch (const DomainError& e) {
    rd.fail("provenance", e.what());
  } catch (const InvalidModel& e) {
    rd.fail("provenance", e.what());
  }
  if (!same_structure(inst, *expected)) {
    rd.fail("provenance", "matrices do not match the " + family + " construction");
  }
  inst.provenance = expected->provenance;
  return inst;
}

void save_instance(const std::filesystem::path& path, const HardnessInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << serialize_instance(inst);
  if (!out) throw Error("failed writing " + path.string());
}

HardnessInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace kfss
