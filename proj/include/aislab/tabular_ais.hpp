#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aislab/mdp.hpp"

namespace aislab {

/// Finite-feature AIS generator: a recursive feature update plus reward and
/// transition predictors indexed by (feature, action).
///
/// Features are ids 0..n_features-1. The update table is total and its range
/// lies inside the feature set, which the constructor enforces.
class TabularAisGenerator {
 public:
  /// `update` is laid out as update[(z * n_states + s_next) * n_actions + a].
  /// `p_hat[a]` is an n_features x n_states row-stochastic matrix.
  TabularAisGenerator(int n_states, int n_actions, int n_features, std::vector<int> init_feature,
                      std::vector<int> update, Eigen::MatrixXd r_hat, std::vector<Eigen::MatrixXd> p_hat);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_features() const { return n_features_; }

  int init_feature(int state) const { return init_feature_[static_cast<std::size_t>(state)]; }
  const std::vector<int>& init_features() const { return init_feature_; }
  /// f(z, s', a). Throws ClosureError when z is not a feature id.
  int update(int z, int s_next, int a) const;
  const std::vector<int>& update_table() const { return update_; }
  double r_hat(int z, int a) const { return r_hat_(z, a); }
  const Eigen::MatrixXd& r_hat() const { return r_hat_; }
  Eigen::RowVectorXd p_hat(int z, int a) const { return p_hat_[static_cast<std::size_t>(a)].row(z); }
  const std::vector<Eigen::MatrixXd>& p_hat() const { return p_hat_; }

  /// True when f(z, s', a) does not depend on z.
  bool update_ignores_feature() const;

  /// Copy with `extra` additional feature ids that nothing maps to.
  TabularAisGenerator with_padding(int extra) const;
  /// Copy with every reward prediction multiplied by `factor`.
  TabularAisGenerator scaled_rewards(double factor) const;

 private:
  int n_states_;
  int n_actions_;
  int n_features_;
  std::vector<int> init_feature_;
  std::vector<int> update_;
  Eigen::MatrixXd r_hat_;
  std::vector<Eigen::MatrixXd> p_hat_;
};

/// Generator with z = s: exact information state of the MDP.
TabularAisGenerator identity_ais(const TabularMdp& mdp);

std::string tabular_ais_to_json(const TabularAisGenerator& gen);
TabularAisGenerator tabular_ais_from_json(const std::string& text);

}  // namespace aislab
