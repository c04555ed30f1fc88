#include "pavemind/bayesnet/bayesnet.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pavemind::bayesnet {

std::size_t NodeSpec::index_of(const std::string& label) const {
  auto it = std::find(domain.begin(), domain.end(), label);
  if (it == domain.end())
    throw std::out_of_range("label '" + label + "' is not in the domain of node '" + name + "'");
  return static_cast<std::size_t>(it - domain.begin());
}

void Dag::add_node(std::string name, std::vector<std::string> domain) {
  nodes.push_back({std::move(name), std::move(domain)});
}

void Dag::add_edge(const std::string& parent, const std::string& child) {
  parents[child].push_back(parent);
}

const NodeSpec& Dag::node(const std::string& name) const {
  for (const auto& n : nodes)
    if (n.name == name) return n;
  throw std::out_of_range("unknown node '" + name + "'");
}

bool Dag::has_node(const std::string& name) const {
  return std::any_of(nodes.begin(), nodes.end(), [&](const auto& n) { return n.name == name; });
}

const std::vector<std::string>& Dag::parents_of(const std::string& name) const {
  static const std::vector<std::string> none;
  auto it = parents.find(name);
  return it == parents.end() ? none : it->second;
}

void validate_structure(const Dag& dag) {
  std::set<std::string> names;
  for (const auto& n : dag.nodes) {
    if (!names.insert(n.name).second) throw StructureError("duplicate node '" + n.name + "'");
    if (n.domain.size() < 2)
      throw StructureError("node '" + n.name + "' needs at least two labels");
    std::set<std::string> labels(n.domain.begin(), n.domain.end());
    if (labels.size() != n.domain.size())
      throw StructureError("node '" + n.name + "' has duplicate labels");
  }
  for (const auto& [child, ps] : dag.parents) {
    if (!names.contains(child)) throw StructureError("edge into undeclared node '" + child + "'");
    std::set<std::string> seen;
    for (const auto& p : ps) {
      if (!names.contains(p))
        throw StructureError("node '" + child + "' has undeclared parent '" + p + "'");
      if (!seen.insert(p).second)
        throw StructureError("duplicate edge " + p + " -> " + child);
    }
  }
  // Depth-first search over parent links; a back edge closes a cycle.
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    state[v] = 1;
    stack.push_back(v);
    for (const auto& p : dag.parents_of(v)) {
      if (state[p] == 1) {
        auto it = std::find(stack.begin(), stack.end(), p);
        std::vector<std::string> cycle(it, stack.end());
        std::reverse(cycle.begin(), cycle.end());
        std::string path;
        for (const auto& c : cycle) path += c + " -> ";
        throw StructureError("cycle: " + path + cycle.front());
      }
      if (state[p] == 0) visit(p);
    }
    stack.pop_back();
    state[v] = 2;
  };
  for (const auto& n : dag.nodes)
    if (state[n.name] == 0) visit(n.name);
}

std::vector<std::string> topological_order(const Dag& dag) {
  validate_structure(dag);
  std::vector<std::string> order;
  std::set<std::string> placed;
  while (order.size() < dag.nodes.size()) {
    for (const auto& n : dag.nodes) {
      if (placed.contains(n.name)) continue;
      const auto& ps = dag.parents_of(n.name);
      if (std::all_of(ps.begin(), ps.end(), [&](const auto& p) { return placed.contains(p); })) {
        order.push_back(n.name);
        placed.insert(n.name);
        break;
      }
    }
  }
  return order;
}

Cpt::Cpt(std::string node, std::size_t domain_size, std::vector<std::string> parents,
         std::vector<std::size_t> parent_sizes)
    : node_(std::move(node)),
      domain_size_(domain_size),
      parents_(std::move(parents)),
      parent_sizes_(std::move(parent_sizes)) {
  if (parents_.size() != parent_sizes_.size()) throw std::invalid_argument("Cpt: parent size list");
  for (std::size_t s : parent_sizes_) rows_ *= s;
  table_.assign(rows_ * domain_size_, 1.0 / static_cast<double>(domain_size_));
}

std::size_t Cpt::row_index(std::span<const std::size_t> parent_values) const {
  if (parent_values.size() != parent_sizes_.size())
    throw std::invalid_argument("Cpt '" + node_ + "': parent assignment has wrong arity");
  std::size_t r = 0;
  for (std::size_t j = 0; j < parent_values.size(); ++j) {
    if (parent_values[j] >= parent_sizes_[j])
      throw std::out_of_range("Cpt '" + node_ + "': parent value out of range");
    r = r * parent_sizes_[j] + parent_values[j];
  }
  return r;
}

std::span<const double> Cpt::row(std::span<const std::size_t> parent_values) const {
  return row_at(row_index(parent_values));
}

std::span<const double> Cpt::row_at(std::size_t r) const {
  return {table_.data() + r * domain_size_, domain_size_};
}

std::span<double> Cpt::mutable_row_at(std::size_t r) {
  return {table_.data() + r * domain_size_, domain_size_};
}

double Cpt::probability(std::size_t value, std::span<const std::size_t> parent_values) const {
  return row(parent_values)[value];
}

namespace {

Cpt empty_cpt(const Dag& dag, const NodeSpec& n) {
  std::vector<std::size_t> sizes;
  for (const auto& p : dag.parents_of(n.name)) sizes.push_back(dag.node(p).domain.size());
  return Cpt(n.name, n.domain.size(), dag.parents_of(n.name), std::move(sizes));
}

}  // namespace

CptSet uniform_cpts(const Dag& dag) {
  validate_structure(dag);
  CptSet out;
  for (const auto& n : dag.nodes) out.emplace(n.name, empty_cpt(dag, n));
  return out;
}

CptSet learn_cpts(const Dag& dag, const std::vector<Record>& records, double alpha) {
  validate_structure(dag);
  if (alpha < 0.0) throw std::invalid_argument("learn_cpts: alpha must be >= 0");
  if (records.empty() && alpha == 0.0)
    throw std::invalid_argument("learn_cpts: no records and no smoothing");
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const auto& [name, label] : records[i]) {
      if (!dag.has_node(name)) continue;
      const auto& d = dag.node(name).domain;
      if (std::find(d.begin(), d.end(), label) == d.end())
        throw std::invalid_argument("learn_cpts: record " + std::to_string(i) + " has label '" +
                                    label + "' outside the domain of '" + name + "'");
    }

  CptSet out;
  for (const auto& n : dag.nodes) {
    Cpt cpt = empty_cpt(dag, n);
    const auto& ps = dag.parents_of(n.name);
    std::vector<double> counts(cpt.row_count() * n.domain.size(), 0.0);
    std::vector<std::size_t> pv(ps.size());
    for (const auto& rec : records) {
      auto vit = rec.find(n.name);
      if (vit == rec.end()) continue;
      bool complete = true;
      for (std::size_t j = 0; j < ps.size() && complete; ++j) {
        auto pit = rec.find(ps[j]);
        if (pit == rec.end()) complete = false;
        else pv[j] = dag.node(ps[j]).index_of(pit->second);
      }
      if (!complete) continue;
      counts[cpt.row_index(pv) * n.domain.size() + n.index_of(vit->second)] += 1.0;
    }
    const std::size_t k = n.domain.size();
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      double total = 0.0;
      for (std::size_t v = 0; v < k; ++v) total += counts[r * k + v];
      auto row = cpt.mutable_row_at(r);
      const double denom = total + alpha * static_cast<double>(k);
      for (std::size_t v = 0; v < k; ++v)
        row[v] = denom > 0.0 ? (counts[r * k + v] + alpha) / denom : 1.0 / static_cast<double>(k);
    }
    out.emplace(n.name, std::move(cpt));
  }
  return out;
}

std::vector<double> query(const Dag& dag, const CptSet& cpts, const Query& q) {
  validate_structure(dag);
  const NodeSpec& target = dag.node(q.target);

  std::map<std::string, std::size_t> fixed;
  for (const auto& [name, label] : q.evidence) {
    if (!dag.has_node(name)) throw std::invalid_argument("query: unknown evidence node '" + name + "'");
    const auto& d = dag.node(name).domain;
    auto it = std::find(d.begin(), d.end(), label);
    if (it == d.end())
      throw std::invalid_argument("query: evidence label '" + label + "' outside the domain of '" +
                                  name + "'");
    fixed[name] = static_cast<std::size_t>(it - d.begin());
  }

  std::vector<double> post(target.domain.size(), 0.0);
  if (auto it = fixed.find(q.target); it != fixed.end()) {
    post[it->second] = 1.0;
    return post;
  }

  // Nodes that are neither the target, evidence, nor their ancestors sum out to one.
  std::set<std::string> relevant;
  std::vector<std::string> frontier{q.target};
  for (const auto& [name, v] : fixed) frontier.push_back(name);
  while (!frontier.empty()) {
    const std::string v = frontier.back();
    frontier.pop_back();
    if (!relevant.insert(v).second) continue;
    for (const auto& p : dag.parents_of(v)) frontier.push_back(p);
  }

  struct Var {
    const Cpt* cpt;
    std::size_t size;
    std::vector<std::size_t> parent_slots;
    bool observed;
    std::size_t observed_value;
  };
  std::vector<Var> vars;
  std::map<std::string, std::size_t> slot;
  std::size_t target_slot = 0;
  for (const auto& name : topological_order(dag)) {
    if (!relevant.contains(name)) continue;
    auto cit = cpts.find(name);
    if (cit == cpts.end()) throw std::invalid_argument("query: missing CPT for '" + name + "'");
    const Cpt& cpt = cit->second;
    if (cpt.parents() != dag.parents_of(name) || cpt.domain_size() != dag.node(name).domain.size())
      throw std::invalid_argument("query: CPT for '" + name + "' does not match the structure");
    Var var{&cpt, cpt.domain_size(), {}, fixed.contains(name), 0};
    if (var.observed) var.observed_value = fixed.at(name);
    for (const auto& p : cpt.parents()) var.parent_slots.push_back(slot.at(p));
    slot[name] = vars.size();
    if (name == q.target) target_slot = vars.size();
    vars.push_back(std::move(var));
  }

  std::vector<std::size_t> assignment(vars.size(), 0);
  std::vector<std::size_t> pv;
  // Depth-first enumeration in topological order; partial products are pruned at zero.
  std::function<void(std::size_t, double)> enumerate = [&](std::size_t i, double weight) {
    if (weight == 0.0) return;
    if (i == vars.size()) {
      post[assignment[target_slot]] += weight;
      return;
    }
    const Var& v = vars[i];
    pv.resize(v.parent_slots.size());
    for (std::size_t j = 0; j < v.parent_slots.size(); ++j) pv[j] = assignment[v.parent_slots[j]];
    const auto row = v.cpt->row(pv);
    if (v.observed) {
      assignment[i] = v.observed_value;
      enumerate(i + 1, weight * row[v.observed_value]);
      return;
    }
    const std::vector<double> probs(row.begin(), row.end());
    for (std::size_t a = 0; a < v.size; ++a) {
      assignment[i] = a;
      enumerate(i + 1, weight * probs[a]);
    }
  };
  enumerate(0, 1.0);

  double total = 0.0;
  for (double p : post) total += p;
  if (!(total > 0.0)) throw std::domain_error("query: evidence has zero probability");
  for (double& p : post) p /= total;
  return post;
}

Dag parse_structure(const std::string& text) {
  Dag dag;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fail = [&](const std::string& why) {
      throw StructureError("structure line " + std::to_string(line_no) + ": " + why);
    };
    if (line.rfind("node ", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) fail("expected 'node <name> : <labels>'");
      const std::string name = trim(line.substr(5, colon - 5));
      if (name.empty()) fail("empty node name");
      std::vector<std::string> labels;
      std::istringstream ls(line.substr(colon + 1));
      std::string label;
      while (std::getline(ls, label, '|')) labels.push_back(trim(label));
      dag.add_node(name, labels);
    } else if (line.rfind("edge ", 0) == 0) {
      const auto arrow = line.find("->");
      if (arrow == std::string::npos) fail("expected 'edge <parent> -> <child>'");
      const std::string parent = trim(line.substr(5, arrow - 5));
      const std::string child = trim(line.substr(arrow + 2));
      if (parent.empty() || child.empty()) fail("empty edge endpoint");
      dag.add_edge(parent, child);
    } else {
      fail("unrecognised directive");
    }
  }
  validate_structure(dag);
  return dag;
}

Dag load_structure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructureError("cannot open structure file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_structure(ss.str());
}

std::string format_structure(const Dag& dag) {
  std::string out;
  for (const auto& n : dag.nodes) {
    out += "node " + n.name + " :";
    for (std::size_t i = 0; i < n.domain.size(); ++i) out += (i ? "|" : " ") + n.domain[i];
    out += '\n';
  }
  for (const auto& n : dag.nodes)
    for (const auto& p : dag.parents_of(n.name)) out += "edge " + p + " -> " + n.name + '\n';
  return out;
}

}  // namespace pavemind::bayesnet
