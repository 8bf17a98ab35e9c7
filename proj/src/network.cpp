#include "catnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "catnet/errors.hpp"

namespace catnet {

namespace {

void check_dim(int d, std::span<const double> x, const char* where) {
  if (static_cast<int>(x.size()) != d)
    throw DimensionMismatch(std::string(where) + ": expected length " + std::to_string(d) +
                            ", got " + std::to_string(x.size()));
}

void check_nonnegative(std::span<const double> x, const char* where) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0))
      throw InvalidArgument(std::string(where) + ": coordinate " + std::to_string(i + 1) +
                            " is negative or not a number");
}

nlohmann::json set_json(const VertexSet& s) { return nlohmann::json(s); }

}  // namespace

BranchingNetwork BranchingNetwork::build(int d, std::span<const Edge> edges) {
  if (d < 1) throw InvalidArgument("network: d must be at least 1");
  BranchingNetwork net;
  net.d_ = d;
  for (const auto& [i, j] : edges) {
    if (i < 1 || i > d || j < 1 || j > d)
      throw OutOfRange("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") has an endpoint outside 1.." + std::to_string(d));
    if (i == j) throw SelfLoop("self loop at vertex " + std::to_string(i));
    net.edges_.emplace_back(i, j);
  }
  std::sort(net.edges_.begin(), net.edges_.end());
  net.edges_.erase(std::unique(net.edges_.begin(), net.edges_.end()), net.edges_.end());

  net.catalysts_.assign(d, {});
  net.reactants_.assign(d, {});
  for (const auto& [i, j] : net.edges_) {
    net.catalysts_[j - 1].push_back(i);
    net.reactants_[i - 1].push_back(j);
  }
  for (int v = 1; v <= d; ++v) {
    std::sort(net.catalysts_[v - 1].begin(), net.catalysts_[v - 1].end());
    std::sort(net.reactants_[v - 1].begin(), net.reactants_[v - 1].end());
    if (!net.reactants_[v - 1].empty()) net.C_.push_back(v);
    if (!net.catalysts_[v - 1].empty()) net.R_.push_back(v);
  }
  return net;
}

double BranchingNetwork::catalyst_mass(int j, std::span<const double> x) const {
  double s = 0.0;
  for (int i : catalysts_of(j)) s += x[i - 1];
  return s;
}

nlohmann::json BranchingNetwork::to_json() const {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& [i, j] : edges_) e.push_back({i, j});
  return {{"d", d_}, {"edges", e}, {"C", set_json(C_)}, {"R", set_json(R_)}};
}

VertexSet InitialClassification::NC2() const {
  VertexSet out;
  std::merge(N_C.begin(), N_C.end(), N_2.begin(), N_2.end(), std::back_inserter(out));
  return out;
}

nlohmann::json InitialClassification::to_json() const {
  nlohmann::json rbar = nlohmann::json::object();
  for (int i = 1; i <= dim(); ++i)
    if (!Rbar[i - 1].empty()) rbar[std::to_string(i)] = set_json(Rbar[i - 1]);
  return {{"x0", x0},         {"Z", set_json(Z)},      {"N_R", set_json(N_R)},
          {"N_C", set_json(N_C)}, {"N_2", set_json(N_2)}, {"Rbar", rbar},
          {"in_S", in_S}};
}

bool in_state_space(const BranchingNetwork& net, std::span<const double> x) {
  check_dim(net.dim(), x, "in_state_space");
  check_nonnegative(x, "in_state_space");
  for (int j : net.reactant_set())
    if (!(net.catalyst_mass(j, x) + x[j - 1] > 0.0)) return false;
  return true;
}

InitialClassification classify_initial(const BranchingNetwork& net, std::span<const double> x0) {
  check_dim(net.dim(), x0, "classify_initial");
  check_nonnegative(x0, "classify_initial");
  const int d = net.dim();
  InitialClassification cls;
  cls.x0.assign(x0.begin(), x0.end());
  cls.role.assign(d, InitialClassification::Role::N2);
  for (int v = 1; v <= d; ++v)
    if (x0[v - 1] == 0.0) cls.Z.push_back(v);
  for (int j : net.reactant_set())
    if (net.catalyst_mass(j, x0) == 0.0) {
      cls.N_R.push_back(j);
      cls.role[j - 1] = InitialClassification::Role::NR;
    }
  // Off S a zero catalyst can itself be a degenerate reactant; N_R wins.
  for (int j : cls.N_R)
    for (int i : net.catalysts_of(j))
      if (cls.role[i - 1] == InitialClassification::Role::N2)
        cls.role[i - 1] = InitialClassification::Role::NC;
  for (int v = 1; v <= d; ++v) {
    if (cls.role[v - 1] == InitialClassification::Role::NC) cls.N_C.push_back(v);
    if (cls.role[v - 1] == InitialClassification::Role::N2) cls.N_2.push_back(v);
  }
  cls.Rbar.assign(d, {});
  for (int i = 1; i <= d; ++i) {
    if (cls.role[i - 1] == InitialClassification::Role::N2) continue;
    for (int j : net.reactants_of(i))
      if (cls.role[j - 1] == InitialClassification::Role::NR) cls.Rbar[i - 1].push_back(j);
  }
  cls.in_S = in_state_space(net, x0);
  return cls;
}

bool in_S0(const InitialClassification& cls, std::span<const double> x) {
  check_dim(cls.dim(), x, "in_S0");
  for (int v = 1; v <= cls.dim(); ++v) {
    if (std::isnan(x[v - 1])) return false;
    if (cls.role[v - 1] != InitialClassification::Role::NR && x[v - 1] < 0.0) return false;
  }
  return true;
}

}  // namespace catnet
