#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("cowrite-cli-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(COWRITE_CLI) + " " + args + " >" + (scratch() / "stdout.txt").string() + " 2>" +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small corpus that varies every condition, generated once.
const fs::path& corpus() {
  static const fs::path dir = [] {
    auto d = scratch() / "corpus";
    const int rc = run("generate --out " + d.string() +
                       " --profiles telling,transforming --sessions 12 --sessions-per-author 2"
                       " --length-mean 200 --length-spread 20 --vary-conditions --seed 3");
    EXPECT_EQ(rc, 0) << slurp(scratch() / "stderr.txt");
    return d;
  }();
  return dir;
}

std::string full_run(const std::string& name) {
  const auto out = scratch() / name;
  const int rc = run("run --input " + corpus().string() + " --meta " + (corpus() / "metadata.csv").string() +
                     " --out " + out.string() + " --bootstrap 200 --seed 9 --jobs 2");
  EXPECT_EQ(rc, 0) << slurp(scratch() / "stderr.txt");
  return out.string();
}

}  // namespace

TEST(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run(""), 2); }

TEST(Cli, MissingInputIsUsageError) {
  EXPECT_EQ(run("ena --input " + (scratch() / "absent").string() + " --out " + (scratch() / "x").string()), 2);
  const auto err = nlohmann::json::parse(slurp(scratch() / "stderr.txt"));
  EXPECT_EQ(err["exit_code"], 2);
  EXPECT_EQ(err["error"], "usage");
}

TEST(Cli, EmptyCodedTableIsUsageError) {
  const auto dir = scratch() / "empty";
  fs::create_directories(dir);
  std::ofstream(dir / "coded.csv")
      << "session_id,author_id,event_index,sentence_id,COMPOSE,RELOCATE,REFLECT,SEEK_SUGG,DISMISS_SUGG,ACCEPT_SUGG,"
         "HOVER_SUGG,CURSOR_FWD,CURSOR_BWD,CURSOR_SELECT,REVISE_USER,REVISE_SUGG,LOW_MOD,HIGH_MOD\n";
  EXPECT_EQ(run("ena --input " + dir.string() + " --out " + (scratch() / "empty-out").string()), 2);
}

TEST(Cli, BadThresholdIsUsageError) {
  EXPECT_EQ(run("code --input " + corpus().string() + " --out " + (scratch() / "t").string() + " --mod-threshold 1.5"), 2);
}

TEST(Cli, UnreachableServiceIsProviderError) {
  const auto ingest = scratch() / "ingest-only";
  ASSERT_EQ(run("ingest --input " + corpus().string() + " --meta " + (corpus() / "metadata.csv").string() + " --out " +
                ingest.string()),
            0);
  EXPECT_EQ(run("code --input " + ingest.string() + " --out " + (scratch() / "remote").string() +
                " --provider remote --endpoint http://127.0.0.1:1"),
            3);
}

TEST(Cli, FullRunProducesThreeComparisonsAndCoefficients) {
  const fs::path out = full_run("a");
  const auto results = nlohmann::json::parse(slurp(out / "report" / "results.json"));
  EXPECT_EQ(results["figures"].size(), 3u);
  EXPECT_TRUE(results.contains("stats"));
  EXPECT_TRUE(fs::exists(out / "report" / "coefficients.csv"));
  for (const auto& f : results["figures"])
    for (const auto& file : f["files"]) EXPECT_TRUE(fs::exists(out / "report" / file.get<std::string>())) << file;
  EXPECT_TRUE(fs::exists(out / "code" / "coded.csv"));
  EXPECT_TRUE(fs::exists(out / "ena" / "model.json"));
}

TEST(Cli, SameSeedGivesByteIdenticalOutputs) {
  const fs::path a = full_run("r1");
  const fs::path b = full_run("r2");
  for (const char* f : {"code/coded.csv", "ena/model.json", "ena/scores.csv", "stats/coefficients.csv",
                        "report/results.json", "report/centroids.csv", "report/embedding.svg"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
