#include "hetjoin/query.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hetjoin {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_args(const std::string& args) {
  std::vector<std::string> out;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (t.empty()) throw std::invalid_argument("empty variable name in atom");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

Query::Query(std::vector<std::string> variables, std::vector<Atom> atoms)
    : variables_(std::move(variables)), atoms_(std::move(atoms)) {
  if (variables_.empty()) throw std::invalid_argument("query needs at least one variable");
  if (atoms_.empty()) throw std::invalid_argument("query needs at least one atom");
  std::set<std::string> seen_vars(variables_.begin(), variables_.end());
  if (seen_vars.size() != variables_.size()) throw std::invalid_argument("duplicate variable name");
  std::set<std::string> seen_atoms;
  std::vector<bool> used(variables_.size(), false);
  for (const auto& atom : atoms_) {
    if (!seen_atoms.insert(atom.name).second) {
      throw std::invalid_argument("self-join: atom name '" + atom.name + "' used twice");
    }
    if (atom.vars.empty()) throw std::invalid_argument("atom '" + atom.name + "' has no variables");
    std::set<std::size_t> in_atom;
    for (auto v : atom.vars) {
      if (v >= variables_.size()) throw std::invalid_argument("atom '" + atom.name + "' references unknown variable");
      if (!in_atom.insert(v).second) {
        throw std::invalid_argument("atom '" + atom.name + "' repeats a variable");
      }
      used[v] = true;
    }
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::invalid_argument("head variable does not occur in any atom");
  }
}

Query Query::parse(std::string_view text) {
  std::string body;
  {
    std::stringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      body += line;
      body += '\n';
    }
  }
  std::vector<std::string> head;
  bool has_head = false;
  if (auto arrow = body.find(":-"); arrow != std::string::npos) {
    static const std::regex head_re(R"(^\s*\w+\s*\(([^)]*)\)\s*$)");
    std::smatch m;
    const std::string head_text = body.substr(0, arrow);
    if (!std::regex_match(head_text, m, head_re)) throw std::invalid_argument("malformed query head");
    head = split_args(m[1].str());
    has_head = true;
    body = body.substr(arrow + 2);
  }

  static const std::regex atom_re(R"((\w+)\s*\(([^)]*)\))");
  std::vector<std::string> variables = head;
  std::vector<Atom> atoms;
  std::string rest;
  auto begin = std::sregex_iterator(body.begin(), body.end(), atom_re);
  std::size_t consumed = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    rest += body.substr(consumed, static_cast<std::size_t>(m.position()) - consumed);
    consumed = static_cast<std::size_t>(m.position() + m.length());
    Atom atom{m[1].str(), {}};
    for (const auto& name : split_args(m[2].str())) {
      auto pos = std::find(variables.begin(), variables.end(), name);
      if (pos == variables.end()) {
        if (has_head) throw std::invalid_argument("variable '" + name + "' missing from head");
        variables.push_back(name);
        pos = variables.end() - 1;
      }
      atom.vars.push_back(static_cast<std::size_t>(pos - variables.begin()));
    }
    atoms.push_back(std::move(atom));
  }
  rest += body.substr(consumed);
  for (char ch : rest) {
    if (ch != ',' && ch != '.' && !std::isspace(static_cast<unsigned char>(ch))) {
      throw std::invalid_argument(std::string("unexpected character in query: '") + ch + "'");
    }
  }
  return Query(std::move(variables), std::move(atoms));
}

std::optional<std::size_t> Query::find_variable(std::string_view name) const {
  auto it = std::find(variables_.begin(), variables_.end(), name);
  if (it == variables_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables_.begin());
}

std::optional<std::size_t> Query::find_atom(std::string_view name) const {
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (atoms_[j].name == name) return j;
  }
  return std::nullopt;
}

bool Query::atom_contains(std::size_t atom, std::size_t var) const {
  const auto& vars = atoms_.at(atom).vars;
  return std::find(vars.begin(), vars.end(), var) != vars.end();
}

std::size_t Query::total_arity() const {
  std::size_t total = 0;
  for (const auto& a : atoms_) total += a.arity();
  return total;
}

std::string Query::to_string() const {
  std::string out = "q(";
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (i) out += ",";
    out += variables_[i];
  }
  out += ") :-\n";
  for (const auto& atom : atoms_) {
    out += "  " + atom.name + "(";
    for (std::size_t i = 0; i < atom.vars.size(); ++i) {
      if (i) out += ",";
      out += variables_[atom.vars[i]];
    }
    out += ")\n";
  }
  return out;
}

bool operator==(const Query& a, const Query& b) {
  return a.variables_ == b.variables_ && a.atoms_ == b.atoms_;
}

namespace {

std::vector<LinearConstraint> cover_constraints(const Query& q) {
  std::vector<LinearConstraint> rows;
  for (const auto& atom : q.atoms()) {
    LinearConstraint c{RationalVector(q.num_variables(), Rational(0)), LinearConstraint::Sense::GreaterEqual, 1};
    for (auto v : atom.vars) c.coeffs[v] = 1;
    rows.push_back(std::move(c));
  }
  return rows;
}

std::vector<LinearConstraint> packing_constraints(const Query& q) {
  std::vector<LinearConstraint> rows;
  for (std::size_t i = 0; i < q.num_variables(); ++i) {
    LinearConstraint c{RationalVector(q.num_atoms(), Rational(0)), LinearConstraint::Sense::LessEqual, 1};
    for (std::size_t j = 0; j < q.num_atoms(); ++j) {
      if (q.atom_contains(j, i)) c.coeffs[j] = 1;
    }
    rows.push_back(std::move(c));
  }
  return rows;
}

Rational sum(const RationalVector& v) {
  Rational s = 0;
  for (const auto& x : v) s += x;
  return s;
}

}  // namespace

bool is_vertex_cover(const Query& q, const RationalVector& weights) {
  if (weights.size() != q.num_variables()) return false;
  for (const auto& w : weights) {
    if (w < 0) return false;
  }
  for (const auto& c : cover_constraints(q)) {
    if (!satisfies(c, weights)) return false;
  }
  return true;
}

bool is_edge_packing(const Query& q, const RationalVector& weights) {
  if (weights.size() != q.num_atoms()) return false;
  for (const auto& w : weights) {
    if (w < 0) return false;
  }
  for (const auto& c : packing_constraints(q)) {
    if (!satisfies(c, weights)) return false;
  }
  return true;
}

VertexCover make_cover(RationalVector weights) {
  VertexCover cover{std::move(weights), 0};
  cover.total = sum(cover.weights);
  return cover;
}

EdgePacking make_packing(RationalVector weights) {
  EdgePacking packing{std::move(weights), 0};
  packing.total = sum(packing.weights);
  return packing;
}

std::vector<RationalVector> edge_packing_vertices(const Query& q) {
  return enumerate_vertices(q.num_atoms(), packing_constraints(q));
}

std::vector<RationalVector> vertex_cover_vertices(const Query& q) {
  return enumerate_vertices(q.num_variables(), cover_constraints(q));
}

VertexCover minimum_fractional_vertex_cover(const Query& q) {
  const auto vertices = vertex_cover_vertices(q);
  // Vertices are sorted, so the first strict improvement keeps the lexicographic minimum.
  const RationalVector* best = nullptr;
  Rational best_total = 0;
  for (const auto& v : vertices) {
    Rational t = sum(v);
    if (best == nullptr || t < best_total) {
      best = &v;
      best_total = t;
    }
  }
  if (best == nullptr) throw std::logic_error("vertex cover polyhedron has no vertex");
  return make_cover(*best);
}

EdgePacking maximum_fractional_edge_packing(const Query& q) {
  const auto vertices = edge_packing_vertices(q);
  const RationalVector* best = nullptr;
  Rational best_total = 0;
  for (const auto& v : vertices) {
    Rational t = sum(v);
    if (best == nullptr || t > best_total) {
      best = &v;
      best_total = t;
    }
  }
  if (best == nullptr) throw std::logic_error("edge packing polytope has no vertex");
  return make_packing(*best);
}

std::string_view to_string(QueryShape shape) {
  switch (shape) {
    case QueryShape::Cartesian: return "cartesian";
    case QueryShape::BinaryJoin: return "binary-join";
    case QueryShape::Star: return "star";
    case QueryShape::Triangle: return "triangle";
    case QueryShape::Other: return "other";
  }
  return "other";
}

QueryShape classify(const Query& q) {
  const auto& atoms = q.atoms();
  const std::size_t k = q.num_variables();
  const std::size_t l = q.num_atoms();

  if (l == 2 && k == 2 && atoms[0].arity() == 1 && atoms[1].arity() == 1) {
    return QueryShape::Cartesian;
  }
  const bool all_binary = std::all_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.arity() == 2; });
  if (!all_binary) return QueryShape::Other;

  std::vector<std::size_t> degree(k, 0);
  for (const auto& a : atoms) {
    for (auto v : a.vars) ++degree[v];
  }

  if (l >= 2 && k == l + 1) {
    // One hub in every atom, every other variable in exactly one atom.
    const auto hub = static_cast<std::size_t>(std::max_element(degree.begin(), degree.end()) - degree.begin());
    bool star = degree[hub] == l;
    for (std::size_t i = 0; i < k && star; ++i) {
      if (i != hub && degree[i] != 1) star = false;
    }
    if (star) return l == 2 ? QueryShape::BinaryJoin : QueryShape::Star;
  }
  if (l == 3 && k == 3 && std::all_of(degree.begin(), degree.end(), [](std::size_t d) { return d == 2; })) {
    return QueryShape::Triangle;
  }
  return QueryShape::Other;
}

}  // namespace hetjoin
