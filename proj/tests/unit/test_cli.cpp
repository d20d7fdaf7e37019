// Drives the rlcf executable through a miniature pipeline.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path &workspace() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "rlcf_cli_ws";
    fs::remove_all(d);
    return d;
  }();
  return p;
}

Run rlcf(const std::string &args) {
  const fs::path err_file = workspace().parent_path() / "rlcf_cli_stderr.txt";
  const std::string cmd = std::string(RLCF_CLI) + " " + args + " --workspace " +
                          workspace().string() + " 2> " + err_file.string();
  Run r;
  FILE *pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
    r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

json last_json_line(const std::string &text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty())
      last = line;
  return json::parse(last);
}

} // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(rlcf("").code, 2);
  EXPECT_EQ(rlcf("collect --episodes 5").code, 2);                // --agent missing
  EXPECT_EQ(rlcf("explode").code, 2);

  const auto no_generator = rlcf("evaluate --agent hunter");
  EXPECT_EQ(no_generator.code, 2);
  EXPECT_NE(no_generator.err.find("--generator"), std::string::npos) << no_generator.err;

  const auto epsilon = rlcf("collect --agent x --episodes 5 --epsilon 1.5");
  EXPECT_EQ(epsilon.code, 2);
  EXPECT_NE(epsilon.err.find("range"), std::string::npos) << epsilon.err;
  EXPECT_EQ(rlcf("train-gan --dataset d --select newest").code, 2);
}

TEST(Cli, RuntimeErrorsAreOneJsonLine) {
  const auto r = rlcf("collect --agent nobody --episodes 3");
  EXPECT_EQ(r.code, 1);
  const auto err = last_json_line(r.err);
  EXPECT_NE(err["error"].get<std::string>().find("nobody"), std::string::npos);
}

TEST(Cli, MiniaturePipeline) {
  auto r = rlcf("train-agent --profile hunter --steps 3000 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(last_json_line(r.out)["agent"], "hunter");

  r = rlcf("collect --agent hunter --episodes 20 --seed 2 --validation 0.2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto collected = last_json_line(r.out);
  EXPECT_EQ(collected["seed"], 2);
  EXPECT_TRUE(fs::exists(collected["manifest"].get<std::string>()));

  r = rlcf("train-gan --dataset hunter --iters 200 --batch 2 --base-width 2 --checkpoint-every 100 "
           "--probe-states 2 --log-every 0 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto trained = last_json_line(r.out);
  EXPECT_EQ(trained["generator"], "hunter");
  EXPECT_EQ(trained["seed"], 2);

  r = rlcf("evaluate --generator hunter --max-states 3 --noise-baseline --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report_path = last_json_line(r.out)["report"].get<std::string>();
  std::ifstream in(report_path);
  const auto report = json::parse(in);
  EXPECT_EQ(report["n"], 15); // 3 states x 5 targets
  EXPECT_EQ(report["baselines"].size(), 1u);
  EXPECT_EQ(report["std_kind"], "population");

  r = rlcf("highlights --agent hunter --episodes 3 --n 2 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(last_json_line(r.out)["count"].get<int>(), 1);

  const fs::path out = workspace() / "cf";
  r = rlcf("generate-cf --generator hunter --state highlights --target 1 --steps 3 --out " +
           out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "0" / "counterfactual.png"));
  EXPECT_TRUE(fs::exists(out / "0" / "frames" / "frame_02.png"));
  EXPECT_FALSE(fs::exists(out / "0" / "frames" / "frame_03.png"));
}
