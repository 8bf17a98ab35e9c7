#pragma once

#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace catnet {

/// Sorted list of 1-based vertex labels.
using VertexSet = std::vector<int>;
using Edge = std::pair<int, int>;

/// Directed catalyst -> reactant graph on vertices 1..d. An edge (i, j)
/// means that type i catalyses the branching of type j.
class BranchingNetwork {
 public:
  /// Throws SelfLoop for (i, i), OutOfRange for endpoints outside 1..d.
  /// Duplicate edges collapse to one.
  static BranchingNetwork build(int d, std::span<const Edge> edges);

  int dim() const { return d_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// C_j; empty for j outside R.
  const VertexSet& catalysts_of(int j) const { return catalysts_.at(j - 1); }
  /// R_i; empty for i outside C.
  const VertexSet& reactants_of(int i) const { return reactants_.at(i - 1); }
  const VertexSet& catalyst_set() const { return C_; }
  const VertexSet& reactant_set() const { return R_; }
  bool is_catalyst(int i) const { return !reactants_of(i).empty(); }
  bool is_reactant(int j) const { return !catalysts_of(j).empty(); }

  /// Sum of x over C_j. `x` is indexed from 0 (x[i-1] is vertex i).
  double catalyst_mass(int j, std::span<const double> x) const;

  nlohmann::json to_json() const;

 private:
  int d_ = 0;
  std::vector<Edge> edges_;
  std::vector<VertexSet> catalysts_;
  std::vector<VertexSet> reactants_;
  VertexSet C_, R_;
};

/// Degeneracy structure of an initial point.
struct InitialClassification {
  std::vector<double> x0;
  VertexSet Z, N_R, N_C, N_2;
  /// Rbar[i-1] = R_i restricted to N_R.
  std::vector<VertexSet> Rbar;
  bool in_S = false;

  enum class Role : char { NR, NC, N2 };
  /// Role of every vertex, indexed from 0.
  std::vector<Role> role;

  int dim() const { return static_cast<int>(x0.size()); }
  bool in_NR(int v) const { return role.at(v - 1) == Role::NR; }
  bool in_NC2(int v) const { return !in_NR(v); }
  /// N_C union N_2, sorted.
  VertexSet NC2() const;
  const VertexSet& rbar(int i) const { return Rbar.at(i - 1); }

  nlohmann::json to_json() const;
};

/// True iff every reactant j has sum_{C_j} x + x_j > 0 (exact comparison).
bool in_state_space(const BranchingNetwork& net, std::span<const double> x);

InitialClassification classify_initial(const BranchingNetwork& net, std::span<const double> x0);

/// Membership in the signed state space: x_i >= 0 off N_R.
bool in_S0(const InitialClassification& cls, std::span<const double> x);

}  // namespace catnet
