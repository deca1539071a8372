#pragma once

#include <vector>

#include <Eigen/Dense>

#include "netspec/topology.hpp"

namespace netspec {

// View of a kappa-hop neighborhood: the sorted member list plus extraction of
// the concatenated local vector from a global state/action (scalar blocks,
// S = A = 1 for both built-in environments). Batch variant extracts member
// columns from a (samples x n) matrix.
struct LocalWindow {
  int agent = 0;
  int radius = 0;
  std::vector<int> members;

  static LocalWindow make(const Topology& t, int agent, int radius) {
    return LocalWindow{agent, radius, t.khop(agent, radius)};
  }

  int size() const { return static_cast<int>(members.size()); }

  Eigen::VectorXd extract(const Eigen::VectorXd& global) const {
    Eigen::VectorXd out(size());
    for (int k = 0; k < size(); ++k) out[k] = global[members[k]];
    return out;
  }

  Eigen::MatrixXd extract(const Eigen::MatrixXd& batch) const {
    Eigen::MatrixXd out(batch.rows(), size());
    for (int k = 0; k < size(); ++k) out.col(k) = batch.col(members[k]);
    return out;
  }
};

inline std::vector<LocalWindow> all_windows(const Topology& t, int radius) {
  std::vector<LocalWindow> w;
  w.reserve(t.n());
  for (int i = 0; i < t.n(); ++i) w.push_back(LocalWindow::make(t, i, radius));
  return w;
}

}  // namespace netspec
