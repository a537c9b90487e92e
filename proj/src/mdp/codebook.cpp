#include <array>

#include "aislab/error.hpp"
#include "aislab/mdp.hpp"

namespace aislab {

namespace {

constexpr int kUndefined = -1;
constexpr int X = kUndefined;

// feature_codebook[a][prev][cur]: the feature emitted when the chain moved
// prev -> cur under action a. Undefined cells are transitions the action
// cannot produce.
constexpr std::array<std::array<std::array<int, 4>, 4>, 3> kFeatureCodebook{{
    {{{0, 1, X, X}, {X, 0, 1, X}, {X, X, 0, 1}, {1, X, X, 0}}},
    {{{1, X, X, 0}, {0, 1, X, X}, {X, 0, 1, X}, {X, X, 0, 1}}},
    {{{X, 0, X, 1}, {0, X, 1, X}, {X, 0, X, 1}, {0, X, 1, X}}},
}};

// memory_codebook[a][m][z]: next controller memory.
constexpr std::array<std::array<std::array<int, 2>, 4>, 3> kMemoryCodebook{{
    {{{0, 1}, {1, 2}, {2, 3}, {3, 0}}},
    {{{3, 0}, {0, 1}, {1, 2}, {2, 3}}},
    {{{1, 3}, {0, 2}, {1, 3}, {0, 2}}},
}};

class CodebookFsmPolicy final : public HistoryPolicy {
 public:
  explicit CodebookFsmPolicy(StationaryPolicy reference) : reference_(std::move(reference)) {}

  int n_actions() const override { return 3; }

  Memory init(int start_state) const override {
    check_state(start_state);
    return {start_state, start_state};
  }

  Memory step(const Memory& memory, int prev_action, int new_state) const override {
    check_state(new_state);
    if (prev_action < 0 || prev_action > 2) throw InputError("codebook fsm: action out of range");
    const auto prev = static_cast<std::size_t>(memory.at(0));
    const auto m = static_cast<std::size_t>(memory.at(1));
    const auto a = static_cast<std::size_t>(prev_action);
    const int z = kFeatureCodebook[a][prev][static_cast<std::size_t>(new_state)];
    if (z == kUndefined) {
      throw ConsistencyError("codebook fsm: read undefined feature entry F(" + std::to_string(prev_action) + ")[" +
                             std::to_string(prev) + "][" + std::to_string(new_state) + "]");
    }
    const int next_memory = kMemoryCodebook[a][m][static_cast<std::size_t>(z)];
    return {new_state, next_memory};
  }

  Eigen::RowVectorXd act(const Memory& memory) const override {
    return reference_.probs().row(static_cast<Eigen::Index>(memory.at(1)));
  }

 private:
  static void check_state(int s) {
    if (s < 0 || s > 3) throw InputError("codebook fsm: state out of range");
  }

  StationaryPolicy reference_;
};

}  // namespace

std::unique_ptr<HistoryPolicy> codebook_fsm_policy(const StationaryPolicy& reference) {
  if (reference.n_states() != 4 || reference.n_actions() != 3) {
    throw InputError("codebook_fsm_policy: reference must be defined on 4 states and 3 actions");
  }
  return std::make_unique<CodebookFsmPolicy>(reference);
}

}  // namespace aislab
