#include <json.hpp>

#include "aislab/error.hpp"
#include "aislab/mdp.hpp"

namespace aislab {

using nlohmann::json;

std::string mdp_to_json(const TabularMdp& mdp) {
  json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  doc["gamma"] = mdp.discount();
  json transitions = json::array();
  for (int a = 0; a < mdp.n_actions(); ++a) {
    json rows = json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
      json row = json::array();
      for (int t = 0; t < mdp.n_states(); ++t) row.push_back(mdp.prob(s, a, t));
      rows.push_back(std::move(row));
    }
    transitions.push_back(std::move(rows));
  }
  doc["transitions"] = std::move(transitions);
  json rewards = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    json row = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) row.push_back(mdp.reward(s, a));
    rewards.push_back(std::move(row));
  }
  doc["rewards"] = std::move(rewards);
  return doc.dump();
}

TabularMdp mdp_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("mdp json: ") + e.what());
  }
  for (const char* key : {"n_states", "n_actions", "gamma", "transitions", "rewards"}) {
    if (!doc.contains(key)) throw InputError(std::string("mdp json: missing key ") + key);
  }
  try {
    const int n = doc.at("n_states").get<int>();
    const int m = doc.at("n_actions").get<int>();
    if (n < 1 || m < 1) throw InputError("mdp json: counts must be >= 1");
    const auto& tr = doc.at("transitions");
    const auto& rw = doc.at("rewards");
    if (tr.size() != static_cast<std::size_t>(m) || rw.size() != static_cast<std::size_t>(n)) {
      throw InputError("mdp json: table sizes do not match counts");
    }
    std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(m), Eigen::MatrixXd(n, n));
    for (int a = 0; a < m; ++a) {
      if (tr[a].size() != static_cast<std::size_t>(n)) throw InputError("mdp json: bad transition rows");
      for (int s = 0; s < n; ++s) {
        if (tr[a][s].size() != static_cast<std::size_t>(n)) throw InputError("mdp json: bad transition row");
        for (int t = 0; t < n; ++t) p[a](s, t) = tr[a][s][t].get<double>();
      }
    }
    Eigen::MatrixXd r(n, m);
    for (int s = 0; s < n; ++s) {
      if (rw[s].size() != static_cast<std::size_t>(m)) throw InputError("mdp json: bad reward row");
      for (int a = 0; a < m; ++a) r(s, a) = rw[s][a].get<double>();
    }
    return TabularMdp(std::move(p), std::move(r), doc.at("gamma").get<double>());
  } catch (const json::exception& e) {
    throw InputError(std::string("mdp json: ") + e.what());
  }
}

}  // namespace aislab
