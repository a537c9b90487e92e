#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aislab/cli.hpp"

using namespace aislab;
using namespace aislab::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ais-lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aislab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("bounds: toy preset gives three clean rows") {
  const fs::path dir = scratch("toy");
  const Result r = invoke({"bounds", "--preset", "toy", "--ipms", "tv,w,mmd", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  const auto rows = lines(slurp(dir / "bounds.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == bound_csv_header());
  for (std::size_t i = 1; i < 4; ++i) CHECK(fields(rows[i]).back() == "0");
  CHECK(fields(rows[1])[4] == "tv");
  CHECK(fields(rows[2])[4] == "w");
  CHECK(fields(rows[3])[4] == "mmd");
}

TEST_CASE("bounds: identity preset is all zeros") {
  const fs::path dir = scratch("identity");
  CHECK(invoke({"bounds", "--preset", "identity", "--out", dir.string()}).code == kExitOk);
  const auto rows = lines(slurp(dir / "bounds.csv"));
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    CHECK(std::stod(f[5]) == 0.0);  // eps
    CHECK(std::stod(f[6]) == 0.0);  // delta
    CHECK(std::stod(f[8]) == 0.0);  // delta_gap
  }
}

TEST_CASE("bounds: random campaign reruns byte-identically") {
  const fs::path a = scratch("rand_a");
  const fs::path b = scratch("rand_b");
  CHECK(invoke({"bounds", "--random", "200", "--seed", "7", "--out", a.string()}).code == kExitOk);
  CHECK(invoke({"bounds", "--random", "200", "--seed", "7", "--out", b.string()}).code == kExitOk);
  const std::string csv = slurp(a / "bounds.csv");
  CHECK(csv == slurp(b / "bounds.csv"));
  CHECK(lines(csv).size() == 601);
}

TEST_CASE("bounds: a violation exits 1 and leaves a counterexample") {
  const fs::path dir = scratch("violation");
  write(dir / "cfg.json", R"({"command": "bounds", "preset": "toy", "ipms": ["tv"], "slack": -1e6})");
  const Result r = invoke({"bounds", "--config", (dir / "cfg.json").string(), "--out", dir.string()});
  CHECK(r.code == kExitViolation);
  const fs::path ce = dir / "counterexample_0_tv.json";
  REQUIRE(fs::exists(ce));
  const Json j = Json::parse(slurp(ce));
  CHECK(j.contains("mdp"));
  CHECK(j.contains("generator"));
  CHECK(j.contains("report"));
  CHECK(fields(lines(slurp(dir / "bounds.csv"))[1]).back() == "1");
}

TEST_CASE("bounds: inline instance from JSON") {
  const fs::path dir = scratch("inline");
  const TabularMdp mdp = random_mdp(3, 2, 4, -1.0, 1.0, 0.8);
  Json cfg;
  cfg["mdp"] = Json::parse(mdp_to_json(mdp));
  cfg["generator"] = Json::parse(tabular_ais_to_json(quantizer_ais(mdp, {0, 0, 1})));
  cfg["ipms"] = {"tv"};
  write(dir / "cfg.json", cfg.dump());
  CHECK(invoke({"bounds", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code == kExitOk);
  CHECK(lines(slurp(dir / "bounds.csv")).size() == 2);
}

TEST_CASE("config errors exit 2") {
  const fs::path dir = scratch("errors");
  write(dir / "unknown.json", R"({"command": "bounds", "preset": "toy", "colour": "red"})");
  write(dir / "nested.json", R"({"train": {"ais": {"feature_dims": 3}}})");
  write(dir / "wrongcmd.json", R"({"command": "train"})");
  write(dir / "badtype.json", R"({"seeds": "ten"})");
  CHECK(invoke({"bounds", "--config", (dir / "unknown.json").string()}).code == kExitConfig);
  CHECK(invoke({"train", "--config", (dir / "nested.json").string()}).code == kExitConfig);
  CHECK(invoke({"bounds", "--config", (dir / "wrongcmd.json").string()}).code == kExitConfig);
  CHECK(invoke({"train", "--config", (dir / "badtype.json").string()}).code == kExitConfig);
  CHECK(invoke({"bounds", "--config", (dir / "missing.json").string()}).code == kExitConfig);
  CHECK(invoke({"bounds", "--preset", "toy", "--ipms", "kl"}).code == kExitConfig);
  CHECK(invoke({"bounds"}).code == kExitConfig);
  CHECK(invoke({"train", "--env", "mujoco"}).code == kExitConfig);
  CHECK(invoke({"train", "--agent", "sac"}).code == kExitConfig);
  CHECK(invoke({"launch"}).code == kExitConfig);
  CHECK(invoke({}).code == kExitConfig);
}

TEST_CASE("train: zero iterations give header-only metrics") {
  const fs::path dir = scratch("zero");
  CHECK(invoke({"train", "--env", "toy", "--agent", "ais-ac", "--iterations", "0", "--out", dir.string()}).code == kExitOk);
  CHECK(slurp(dir / "metrics_seed0.csv") == metrics_csv_header() + "\n");
  CHECK(lines(slurp(dir / "aggregate.csv")).size() == 1);
}

TEST_CASE("train: outputs are byte-identical across reruns and thread counts") {
  const fs::path a = scratch("train_a");
  const fs::path b = scratch("train_b");
  ::setenv("AISLAB_THREADS", "1", 1);
  CHECK(invoke({"train", "--env", "toy", "--agent", "ais-ac", "--seeds", "3", "--iterations", "8", "--out", a.string()}).code ==
        kExitOk);
  ::setenv("AISLAB_THREADS", "3", 1);
  CHECK(invoke({"train", "--env", "toy", "--agent", "ais-ac", "--seeds", "3", "--iterations", "8", "--out", b.string()}).code ==
        kExitOk);
  ::unsetenv("AISLAB_THREADS");
  for (const char* f : {"metrics_seed0.csv", "metrics_seed2.csv", "aggregate.csv", "final.csv", "curve.svg"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto agg = lines(slurp(a / "aggregate.csv"));
  REQUIRE(agg.size() == 9);
  CHECK(fields(agg[1])[2] == "3");
}

TEST_CASE("train: memoryless baseline logs the same schema") {
  const fs::path dir = scratch("memoryless");
  write(dir / "cfg.json", R"({"command": "train", "env": "toy", "agent": "memoryless", "seeds": 2,
                              "train": {"iterations": 4, "memoryless_partition": [0, 1, 0, 1]}})");
  CHECK(invoke({"train", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code == kExitOk);
  const auto rows = lines(slurp(dir / "metrics_seed1.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == metrics_csv_header());
  CHECK(fields(rows[1])[5] == "NA");
}

TEST_CASE("AISLAB_THREADS must be a positive integer") {
  ::setenv("AISLAB_THREADS", "0", 1);
  CHECK(invoke({"train", "--iterations", "1", "--out", scratch("threads").string()}).code == kExitConfig);
  ::setenv("AISLAB_THREADS", "4", 1);
  CHECK(thread_budget() == 4);
  ::unsetenv("AISLAB_THREADS");
  CHECK(thread_budget() >= 1);
}

TEST_CASE("compare: kernels give labeled curves, one variant is an error") {
  const fs::path dir = scratch("compare");
  write(dir / "cfg.json", R"({"command": "compare", "env": {"name": "pointmass", "horizon": 10}, "agent": "ais-pg",
                              "seeds": 2, "train": {"iterations": 3},
                              "variants": ["energy", "gaussian", {"label": "laplace", "kernel": "laplace"}]})");
  CHECK(invoke({"compare", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code == kExitOk);
  const std::string svg = slurp(dir / "compare.svg");
  for (const char* label : {">energy<", ">gaussian<", ">laplace<"}) CHECK(svg.find(label) != std::string::npos);
  std::size_t n = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++n;
  CHECK(n == 3);
  CHECK(lines(slurp(dir / "compare.csv")).size() == 1 + 3 * 3);
  CHECK(fs::exists(dir / "gaussian" / "aggregate.csv"));

  write(dir / "kl.json", R"({"env": "toy", "seeds": 1, "train": {"iterations": 2}, "variants": ["mmd-energy", "kl"]})");
  CHECK(invoke({"compare", "--config", (dir / "kl.json").string(), "--out", (dir / "kl").string()}).code == kExitOk);
  write(dir / "one.json", R"({"variants": ["kl"]})");
  CHECK(invoke({"compare", "--config", (dir / "one.json").string(), "--out", dir.string()}).code == kExitConfig);
  write(dir / "dup.json", R"({"variants": ["kl", "kl"]})");
  CHECK(invoke({"compare", "--config", (dir / "dup.json").string(), "--out", dir.string()}).code == kExitConfig);
}

TEST_CASE("toy-demo reports the example and flags the memoryless claim") {
  const Result r = invoke({"toy-demo"});
  CHECK(r.out.find("pi*(2)=1") != std::string::npos);
  CHECK(r.out.find("pi*(3)=2") != std::string::npos);
  CHECK(r.out.find("state 3 unreachable from {0,1,2} under the codebook controller: yes") != std::string::npos);
  CHECK(r.out.find("enumerated branches: yes") != std::string::npos);
  // Four partitions admit a memoryless policy that reaches v*(2).
  CHECK(r.out.find("claim: every memoryless policy is at least 10 below v*(2): FAILS") != std::string::npos);
  CHECK(r.code == kExitViolation);
}

TEST_CASE("toy analysis enumerates 7 partitions x 9 policies") {
  const ToyAnalysis t = analyze_toy();
  CHECK(t.memoryless.size() == 63);
  CHECK(t.best_at_2.size() == 7);
  CHECK(t.pi_star == std::vector<int>{0, 0, 1, 2});
  // Three partitions keep a gap; the parity aliasing is not among them.
  int gapped = 0;
  for (const auto& [part, best] : t.best_at_2) gapped += t.v_star(2) - best >= 10.0;
  CHECK(gapped == 3);
}

TEST_CASE("quartiles use linear interpolation") {
  const Quartiles q = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q75 == doctest::Approx(3.25));
  CHECK(quartiles({5.0}).median == 5.0);
}

TEST_CASE("svg chart is deterministic and escapes labels") {
  Curve c{"a<b", {1, 2, 3}, {0, 1, 2}, {-1, 0, 1}, {1, 2, 3}};
  const std::string s = svg_chart({c}, "t&t", "y");
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("a&lt;b") != std::string::npos);
  CHECK(s.find("t&amp;t") != std::string::npos);
  CHECK(s == svg_chart({c}, "t&t", "y"));
  CHECK(svg_chart({}, "empty", "y").find("</svg>") != std::string::npos);
}
