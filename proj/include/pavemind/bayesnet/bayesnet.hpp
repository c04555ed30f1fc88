#pragma once
// Discrete Bayesian networks: structure, Laplace-smoothed CPT estimation
// from categorical records, and exact inference by enumeration.

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pavemind::bayesnet {

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeSpec {
  std::string name;
  std::vector<std::string> domain;  // ordered labels, at least two

  std::size_t index_of(const std::string& label) const;  // throws std::out_of_range
};

struct Dag {
  std::vector<NodeSpec> nodes;
  std::map<std::string, std::vector<std::string>> parents;  // child -> ordered parents

  void add_node(std::string name, std::vector<std::string> domain);
  void add_edge(const std::string& parent, const std::string& child);

  const NodeSpec& node(const std::string& name) const;  // throws std::out_of_range
  bool has_node(const std::string& name) const;
  const std::vector<std::string>& parents_of(const std::string& name) const;
};

// Throws StructureError on duplicate nodes or labels, domains smaller than
// two, undeclared parents, or a cycle (the message lists the cycle's nodes).
void validate_structure(const Dag& dag);

// Node names parents-first; ties broken by declaration order.
std::vector<std::string> topological_order(const Dag& dag);

// Conditional table P(node | parents). Rows are indexed by the parents'
// label indices in mixed radix (first parent most significant).
class Cpt {
 public:
  Cpt() = default;
  Cpt(std::string node, std::size_t domain_size, std::vector<std::string> parents,
      std::vector<std::size_t> parent_sizes);

  const std::string& node() const { return node_; }
  const std::vector<std::string>& parents() const { return parents_; }
  const std::vector<std::size_t>& parent_sizes() const { return parent_sizes_; }
  std::size_t domain_size() const { return domain_size_; }
  std::size_t row_count() const { return rows_; }

  std::size_t row_index(std::span<const std::size_t> parent_values) const;
  std::span<const double> row(std::span<const std::size_t> parent_values) const;
  std::span<const double> row_at(std::size_t row) const;
  std::span<double> mutable_row_at(std::size_t row);
  double probability(std::size_t value, std::span<const std::size_t> parent_values) const;

 private:
  std::string node_;
  std::size_t domain_size_ = 0;
  std::vector<std::string> parents_;
  std::vector<std::size_t> parent_sizes_;
  std::size_t rows_ = 1;
  std::vector<double> table_;
};

using CptSet = std::map<std::string, Cpt>;

// node name -> label
using Record = std::map<std::string, std::string>;
using Evidence = std::map<std::string, std::string>;

// Uniform tables for every node.
CptSet uniform_cpts(const Dag& dag);

// P(v | pa) = (count(v, pa) + alpha) / (count(pa) + alpha * |domain|).
// A record contributes to a node's table only when it carries the node and
// all of its parents. Parent configurations never observed with alpha = 0
// get a uniform row. Throws std::invalid_argument for labels outside a
// node's domain, alpha < 0, or no records with alpha = 0.
CptSet learn_cpts(const Dag& dag, const std::vector<Record>& records, double alpha = 1.0);

struct Query {
  std::string target;
  Evidence evidence;
};

// Exact posterior P(target | evidence) by summing the joint over every
// non-evidence ancestor of the target and evidence nodes.
std::vector<double> query(const Dag& dag, const CptSet& cpts, const Query& q);

// Text format:  node <name> : <label1>|<label2>|...   and   edge <parent> -> <child>
// Lines starting with '#' are comments.
Dag parse_structure(const std::string& text);
Dag load_structure(const std::filesystem::path& path);
std::string format_structure(const Dag& dag);

}  // namespace pavemind::bayesnet
