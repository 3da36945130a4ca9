#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cyclone/cli.hpp"
#include "cyclone/decision.hpp"
#include "json.hpp"

using namespace cyclone;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cyclone_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Everything except the first line, which echoes the thread count.
std::string after_config(const std::string& out) { return out.substr(out.find('\n') + 1); }

void check_error(const Run& r, int code, const std::string& kind) {
  CHECK(r.code == code);
  REQUIRE(!r.err.empty());
  CHECK(r.err.back() == '\n');
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  const auto j = json::parse(r.err);
  CHECK(j["error"] == kind);
  CHECK(j["message"].is_string());
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  check_error(run({}), kExitUsage, "usage");
  check_error(run({"fly"}), kExitUsage, "usage");
  check_error(run({"sim", "--bogus"}), kExitUsage, "usage");
  check_error(run({"sim", "--a", "nobody", "--out", temp_dir("u1").string()}), kExitUsage, "usage");
  check_error(run({"sim", "--strikeout", "maybe"}), kExitUsage, "usage");
  check_error(run({"sim", "-n", "0", "--out", temp_dir("u2").string()}), kExitUsage, "usage");
  check_error(run({"sim", "--threads", "0", "--out", temp_dir("u3").string()}), kExitUsage, "usage");
  check_error(run({"train", "--start", "human-like"}), kExitUsage, "usage");
  check_error(run({"train", "--objective", "humanness", "--start", "human-like", "--out",
                   temp_dir("u4").string()}),
              kExitUsage, "usage");
  check_error(run({"train", "--objective", "selfplay", "--start", "human-like", "--schedule",
                   "play_playable,nope,curve.floor,curve.exponent", "--out", temp_dir("u5").string()}),
              kExitUsage, "usage");
  check_error(run({"humanness", "--agent", "human-like", "--db", "/nonexistent/db.jsonl"}),
              kExitUsage, "usage");
}

TEST_CASE("runtime errors exit with 1") {
  const auto dir = temp_dir("rt");
  {
    std::ofstream(dir / "db.jsonl") << "this is not a database\n";
  }
  check_error(run({"humanness", "--agent", "human-like", "--db", (dir / "db.jsonl").string(),
                   "--out", dir.string()}),
              kExitRuntime, "runtime");
  {
    std::ofstream(dir / "w.json") << "{\"format\":\"cyclone-weights\",\"version\":1,\"weights\":{\"x\":1}}";
  }
  check_error(run({"sim", "--a", (dir / "w.json").string(), "-n", "2", "--out", dir.string()}),
              kExitRuntime, "runtime");
}

TEST_CASE("help goes to stdout") {
  const auto r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("sim") != std::string::npos);
  CHECK(r.out.find("train") != std::string::npos);
  CHECK(r.err.empty());
  const auto s = run({"sim", "--help"});
  CHECK(s.code == kExitOk);
  CHECK(s.out.find("--crossplay") != std::string::npos);
}

TEST_CASE("sim output is byte-identical across reruns and thread counts") {
  const auto a = temp_dir("sim_a"), b = temp_dir("sim_b");
  const auto r1 = run({"sim", "--a", "human-like", "--b", "self-play", "-n", "16", "--seed", "3",
                       "--logs", "--out", a.string()});
  const auto r2 = run({"sim", "--a", "human-like", "--b", "self-play", "-n", "16", "--seed", "3",
                       "--logs", "--threads", "3", "--out", b.string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(r1.out.rfind("config ", 0) == 0);
  CHECK(json::parse(r1.out.substr(7, r1.out.find('\n') - 7))["threads"] == 1);
  CHECK(after_config(r1.out).rfind("sim a=human-like b=self-play n=16 mean=", 0) == 0);
  const auto r3 = run({"sim", "--a", "human-like", "--b", "self-play", "-n", "16", "--seed", "3",
                       "--logs", "--out", a.string()});
  CHECK(r3.out == r1.out);
  CHECK(after_config(r2.out) == after_config(r1.out));
  CHECK(slurp(a / "stats.json") == slurp(b / "stats.json"));
  CHECK(slurp(a / "config.json").find("threads") == std::string::npos);
  CHECK(json::parse(slurp(a / "config.json"))["out"] == a.string());
  CHECK(json::parse(slurp(a / "stats.json"))["stats"]["n"] == 16);
  for (int i = 0; i < 16; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "logs/game_%06d.gamelog", i);
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK(!slurp(a / name).empty());
  }
}

TEST_CASE("crossplay writes the table") {
  const auto dir = temp_dir("xp");
  const auto r = run({"sim", "--crossplay", "-n", "4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(dir / "crossplay.json"));
  CHECK(j["cells"].size() == 6);
  CHECK(slurp(dir / "crossplay.txt").find("human-like") != std::string::npos);
  CHECK(r.out.find("self-play") != std::string::npos);
}

TEST_CASE("environment supplies defaults and flags override it") {
  const auto env_dir = temp_dir("env"), flag_dir = temp_dir("flag");
  ::setenv("CYCLONE_OUT_DIR", env_dir.string().c_str(), 1);
  ::setenv("CYCLONE_THREADS", "2", 1);
  auto r = run({"sim", "-n", "2"});
  CHECK(r.code == 0);
  CHECK(fs::exists(env_dir / "stats.json"));
  CHECK(r.out.find("\"threads\":2") != std::string::npos);

  r = run({"sim", "-n", "2", "--out", flag_dir.string(), "--threads", "1"});
  CHECK(r.code == 0);
  CHECK(fs::exists(flag_dir / "stats.json"));
  CHECK(r.out.find("\"threads\":1") != std::string::npos);

  ::setenv("CYCLONE_THREADS", "many", 1);
  check_error(run({"sim", "-n", "2"}), kExitUsage, "usage");
  ::unsetenv("CYCLONE_THREADS");
  ::unsetenv("CYCLONE_OUT_DIR");
}

TEST_CASE("gen-db, humanness and train") {
  const auto dir = temp_dir("train");
  auto r = run({"gen-db", "--agent", "human-like", "-n", "2", "--seed", "5", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto db = (dir / "decisions.jsonl").string();

  r = run({"humanness", "--agent", "human-like", "--db", db, "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto h = json::parse(slurp(dir / "humanness.json"));
  CHECK(h["fraction"] == 1.0);
  CHECK(h["records"].size() == h["total"]);

  const std::vector<std::string> train{"train",        "--objective", "humanness", "--start",
                                       "self-play",    "--db",        db,          "--max-rounds",
                                       "1",            "--out",       dir.string()};
  r = run(train);
  REQUIRE(r.code == 0);
  CHECK(after_config(r.out).rfind("train objective=humanness rounds=1 experiments=4", 0) == 0);
  const auto weights = parse_weights(slurp(dir / "weights.json"));
  CHECK(weights.name == "self-play-trained");
  const auto audit = slurp(dir / "audit.jsonl");
  const auto first = json::parse(audit.substr(0, audit.find('\n')));
  CHECK(first["format"] == "cyclone-train-audit");
  CHECK(std::count(audit.begin(), audit.end(), '\n') == 6);

  // Resuming a finished run reproduces it without new records.
  auto resumed = train;
  resumed.push_back("--resume");
  r = run(resumed);
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "audit.jsonl") == audit);
  CHECK(parse_weights(slurp(dir / "weights.json")) == weights);
}

#ifdef CYCLONE_TOOL
TEST_CASE("the installed binary reports exit codes") {
  const std::string tool = CYCLONE_TOOL;
  CHECK(WEXITSTATUS(std::system((tool + " --help > /dev/null").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((tool + " bogus 2> /dev/null").c_str())) == 2);
  const auto dir = temp_dir("bin");
  CHECK(WEXITSTATUS(std::system((tool + " sim -n 2 --out " + dir.string() + " > /dev/null").c_str())) ==
        0);
  CHECK(fs::exists(dir / "stats.json"));
}
#endif
