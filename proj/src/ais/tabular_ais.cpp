#include "aislab/tabular_ais.hpp"

#include <cmath>

#include <json.hpp>

#include "aislab/error.hpp"

namespace aislab {

TabularAisGenerator::TabularAisGenerator(int n_states, int n_actions, int n_features, std::vector<int> init_feature,
                                         std::vector<int> update, Eigen::MatrixXd r_hat,
                                         std::vector<Eigen::MatrixXd> p_hat)
    : n_states_(n_states),
      n_actions_(n_actions),
      n_features_(n_features),
      init_feature_(std::move(init_feature)),
      update_(std::move(update)),
      r_hat_(std::move(r_hat)),
      p_hat_(std::move(p_hat)) {
  if (n_states_ < 1 || n_actions_ < 1 || n_features_ < 1) throw InputError("tabular ais: counts must be >= 1");
  if (init_feature_.size() != static_cast<std::size_t>(n_states_)) throw InputError("tabular ais: init table size");
  if (update_.size() != static_cast<std::size_t>(n_features_) * n_states_ * n_actions_) {
    throw InputError("tabular ais: update table size");
  }
  for (int z : init_feature_) {
    if (z < 0 || z >= n_features_) throw ClosureError("tabular ais: init feature outside the feature set");
  }
  for (int z : update_) {
    if (z < 0 || z >= n_features_) throw ClosureError("tabular ais: update maps outside the feature set");
  }
  if (r_hat_.rows() != n_features_ || r_hat_.cols() != n_actions_) throw InputError("tabular ais: r_hat shape");
  if (!r_hat_.allFinite()) throw InputError("tabular ais: non-finite r_hat");
  if (p_hat_.size() != static_cast<std::size_t>(n_actions_)) throw InputError("tabular ais: p_hat needs one table per action");
  for (const auto& p : p_hat_) {
    if (p.rows() != n_features_ || p.cols() != n_states_) throw InputError("tabular ais: p_hat shape");
    for (Eigen::Index z = 0; z < p.rows(); ++z) {
      if ((p.row(z).array() < 0.0).any() || std::abs(p.row(z).sum() - 1.0) > 1e-12) {
        throw InputError("tabular ais: p_hat rows must be distributions");
      }
    }
  }
}

int TabularAisGenerator::update(int z, int s_next, int a) const {
  if (z < 0 || z >= n_features_) throw ClosureError("tabular ais: feature " + std::to_string(z) + " outside Z");
  if (s_next < 0 || s_next >= n_states_ || a < 0 || a >= n_actions_) throw InputError("tabular ais: bad (s', a)");
  return update_[static_cast<std::size_t>((z * n_states_ + s_next) * n_actions_ + a)];
}

bool TabularAisGenerator::update_ignores_feature() const {
  for (int z = 1; z < n_features_; ++z)
    for (int s = 0; s < n_states_; ++s)
      for (int a = 0; a < n_actions_; ++a)
        if (update(z, s, a) != update(0, s, a)) return false;
  return true;
}

TabularAisGenerator TabularAisGenerator::with_padding(int extra) const {
  if (extra < 0) throw InputError("with_padding: negative count");
  const int nf = n_features_ + extra;
  std::vector<int> upd(static_cast<std::size_t>(nf) * n_states_ * n_actions_);
  for (int z = 0; z < nf; ++z)
    for (int s = 0; s < n_states_; ++s)
      for (int a = 0; a < n_actions_; ++a)
        upd[static_cast<std::size_t>((z * n_states_ + s) * n_actions_ + a)] = update(z < n_features_ ? z : 0, s, a);
  Eigen::MatrixXd r(nf, n_actions_);
  r.topRows(n_features_) = r_hat_;
  r.bottomRows(extra).setZero();
  std::vector<Eigen::MatrixXd> p = p_hat_;
  for (auto& m : p) {
    Eigen::MatrixXd grown(nf, n_states_);
    grown.topRows(n_features_) = m;
    grown.bottomRows(extra).setConstant(1.0 / n_states_);
    m = std::move(grown);
  }
  return TabularAisGenerator(n_states_, n_actions_, nf, init_feature_, std::move(upd), std::move(r), std::move(p));
}

TabularAisGenerator TabularAisGenerator::scaled_rewards(double factor) const {
  return TabularAisGenerator(n_states_, n_actions_, n_features_, init_feature_, update_, r_hat_ * factor, p_hat_);
}

TabularAisGenerator identity_ais(const TabularMdp& mdp) {
  const int n = mdp.n_states();
  const int m = mdp.n_actions();
  std::vector<int> init(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) init[static_cast<std::size_t>(s)] = s;
  std::vector<int> upd(static_cast<std::size_t>(n) * n * m);
  for (int z = 0; z < n; ++z)
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < m; ++a) upd[static_cast<std::size_t>((z * n + s) * m + a)] = s;
  return TabularAisGenerator(n, m, n, std::move(init), std::move(upd), mdp.rewards(), mdp.transitions());
}

using nlohmann::json;

std::string tabular_ais_to_json(const TabularAisGenerator& gen) {
  json doc;
  doc["n_states"] = gen.n_states();
  doc["n_actions"] = gen.n_actions();
  doc["feature_set"] = gen.n_features();
  doc["init_feature"] = gen.init_features();
  doc["update"] = gen.update_table();
  json r = json::array();
  for (int z = 0; z < gen.n_features(); ++z) {
    json row = json::array();
    for (int a = 0; a < gen.n_actions(); ++a) row.push_back(gen.r_hat(z, a));
    r.push_back(std::move(row));
  }
  doc["r_hat"] = std::move(r);
  json p = json::array();
  for (int z = 0; z < gen.n_features(); ++z) {
    json per_action = json::array();
    for (int a = 0; a < gen.n_actions(); ++a) {
      json row = json::array();
      const Eigen::RowVectorXd dist = gen.p_hat(z, a);
      for (Eigen::Index s = 0; s < dist.size(); ++s) row.push_back(dist(s));
      per_action.push_back(std::move(row));
    }
    p.push_back(std::move(per_action));
  }
  doc["p_hat"] = std::move(p);
  return doc.dump();
}

TabularAisGenerator tabular_ais_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int n = doc.at("n_states").get<int>();
    const int m = doc.at("n_actions").get<int>();
    const int nf = doc.at("feature_set").get<int>();
    if (n < 1 || m < 1 || nf < 1) throw InputError("tabular ais json: counts must be >= 1");
    auto init = doc.at("init_feature").get<std::vector<int>>();
    auto upd = doc.at("update").get<std::vector<int>>();
    Eigen::MatrixXd r(nf, m);
    std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(m), Eigen::MatrixXd(nf, n));
    for (int z = 0; z < nf; ++z) {
      for (int a = 0; a < m; ++a) {
        r(z, a) = doc.at("r_hat").at(z).at(a).get<double>();
        for (int s = 0; s < n; ++s) p[a](z, s) = doc.at("p_hat").at(z).at(a).at(s).get<double>();
      }
    }
    return TabularAisGenerator(n, m, nf, std::move(init), std::move(upd), std::move(r), std::move(p));
  } catch (const json::exception& e) {
    throw InputError(std::string("tabular ais json: ") + e.what());
  }
}

}  // namespace aislab
