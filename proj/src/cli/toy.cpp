#include <cstdio>
#include <functional>
#include <ostream>

#include "aislab/cli.hpp"

namespace aislab::cli {

ToyAnalysis analyze_toy(double k, double gamma, int depth) {
  ToyAnalysis out;
  out.k = k;
  out.gamma = gamma;
  const TabularMdp mdp = toy_mdp(k, gamma);
  const ValueIterationResult vi = value_iteration(mdp, 1e-10);
  for (int s = 0; s < mdp.n_states(); ++s) out.pi_star.push_back(vi.pi_star.greedy_action(s));
  out.v_star = vi.v_star;

  const auto fsm = codebook_fsm_policy(vi.pi_star);
  out.codebook_matches = true;
  std::function<void(int, const HistoryPolicy::Memory&, int)> walk = [&](int s, const HistoryPolicy::Memory& m, int d) {
    const Eigen::RowVectorXd act = fsm->act(m);
    Eigen::Index a = 0;
    act.maxCoeff(&a);
    if (act(a) != 1.0 || a != out.pi_star[static_cast<std::size_t>(s)]) out.codebook_matches = false;
    if (d == depth) {
      ++out.codebook_branches;
      return;
    }
    for (int next = 0; next < mdp.n_states(); ++next) {
      if (mdp.prob(s, static_cast<int>(a), next) > 0.0) walk(next, fsm->step(m, static_cast<int>(a), next), d + 1);
    }
  };
  for (int s0 : {0, 1, 2}) walk(s0, fsm->init(s0), 0);
  out.state3_unreachable = !reachable_under(mdp, *fsm, {0, 1, 2}).state_visited[3];

  out.memoryless_claim = true;
  for (const auto& part : partitions_into(mdp.n_states(), 2)) {
    double best = -INFINITY;
    for (int a0 = 0; a0 < mdp.n_actions(); ++a0) {
      for (int a1 = 0; a1 < mdp.n_actions(); ++a1) {
        const std::vector<int> mu{a0, a1};
        std::vector<int> flat;
        for (int s = 0; s < mdp.n_states(); ++s) flat.push_back(mu[static_cast<std::size_t>(part[static_cast<std::size_t>(s)])]);
        const Eigen::VectorXd v = policy_value(mdp, StationaryPolicy::deterministic(flat, mdp.n_actions()));
        out.memoryless.push_back({part, mu, v});
        best = std::max(best, v(2));
        if (!(v(2) <= out.v_star(2) - out.margin)) out.memoryless_claim = false;
      }
    }
    out.best_at_2.emplace_back(part, best);
  }
  return out;
}

namespace {

std::string classes(const std::vector<int>& part) {
  std::string a, b;
  for (std::size_t s = 0; s < part.size(); ++s) (part[s] == 0 ? a : b) += std::to_string(s);
  return "{" + a + "}|{" + b + "}";
}

}  // namespace

int print_toy_report(const ToyAnalysis& t, std::ostream& out) {
  char buf[160];
  out << "toy MDP: K = " << t.k << ", gamma = " << t.gamma << "\n";
  out << "optimal policy:";
  for (std::size_t s = 0; s < t.pi_star.size(); ++s) out << " pi*(" << s << ")=" << t.pi_star[s];
  out << "\noptimal values:";
  for (Eigen::Index s = 0; s < t.v_star.size(); ++s) {
    std::snprintf(buf, sizeof buf, " v*(%d)=%.4f", static_cast<int>(s), t.v_star(s));
    out << buf;
  }
  out << "\n\ncodebook controller emits pi*(true state) on all " << t.codebook_branches
      << " enumerated branches: " << (t.codebook_matches ? "yes" : "NO") << "\n";
  out << "state 3 unreachable from {0,1,2} under the codebook controller: " << (t.state3_unreachable ? "yes" : "NO")
      << "\n\n";
  out << "memoryless 2-feature policies (value at state 2, gap to v*(2)):\n";
  for (const auto& c : t.memoryless) {
    std::snprintf(buf, sizeof buf, "  %-12s mu=(%d,%d)  v(2)=%11.4f  gap=%10.4f\n", classes(c.partition).c_str(),
                  c.policy[0], c.policy[1], c.value(2), t.v_star(2) - c.value(2));
    out << buf;
  }
  out << "best memoryless value at state 2 per partition:\n";
  for (const auto& [part, best] : t.best_at_2) {
    std::snprintf(buf, sizeof buf, "  %-12s %11.4f  gap=%10.4f%s\n", classes(part).c_str(), best, t.v_star(2) - best,
                  t.v_star(2) - best >= t.margin ? "" : "  (below margin)");
    out << buf;
  }
  out << "claim: every memoryless policy is at least " << t.margin << " below v*(2): "
      << (t.memoryless_claim ? "holds" : "FAILS") << "\n";
  const bool pi_ok = t.pi_star == std::vector<int>{0, 0, 1, 2};
  if (!pi_ok) out << "claim: pi* = (0,0,1,2): FAILS\n";
  return pi_ok && t.codebook_matches && t.state3_unreachable && t.memoryless_claim ? kExitOk : kExitViolation;
}

}  // namespace aislab::cli
