#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kCli = OSLSP_CLI_PATH;

struct Run {
  int code;
  std::string output;
};

Run run(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("oslsp_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen-data is byte-identical across runs") {
    const fs::path dir = scratch("gen");
    write_file(dir / "small.cfg", "per_date_count = 40\ntest_per_date_count = 10\n");
    const std::string cfg = "--config \"" + (dir / "small.cfg").string() + "\"";
    REQUIRE(run("gen-data " + cfg + " --out \"" + (dir / "a").string() + "\"", dir / "log").code == 0);
    REQUIRE(run("gen-data " + cfg + " --out \"" + (dir / "b").string() + "\"", dir / "log").code == 0);
    for (const char* f : {"dataset.csv", "test.csv", "proportions.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / "dataset.csv").rfind("32,5,200\n", 0) == 0);
    CHECK(slurp(dir / "a" / "test.csv").rfind("32,5,50\n", 0) == 0);
  }

  TEST_CASE("custom three-class schedule") {
    const fs::path dir = scratch("k3");
    write_file(dir / "k3.csv", "early,1,0,0\nmid,0.2,0.6,0.2\nlate,0,0.3,0.7\n");
    write_file(dir / "k3.cfg", "num_classes = 3\nschedule_file = k3.csv\nper_date_count = 20\ntest_per_date_count = 5\n");
    REQUIRE(run("gen-data --config \"" + (dir / "k3.cfg").string() + "\" --out \"" + (dir / "out").string() + "\"",
                dir / "log")
                .code == 0);
    std::ifstream in(dir / "out" / "proportions.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 3);
    CHECK(slurp(dir / "out" / "dataset.csv").rfind("32,3,60\n", 0) == 0);
  }

  TEST_CASE("missing inputs fail with a clear error") {
    const fs::path dir = scratch("missing");
    const Run r = run("train --data \"" + (dir / "nope.csv").string() + "\" --out \"" + (dir / "run").string() + "\"",
                      dir / "log");
    CHECK(r.code != 0);
    CHECK(r.output.find("file not found") != std::string::npos);
    const Run e = run("eval --checkpoint \"" + (dir / "nope.ckpt").string() + "\" --data x.csv", dir / "log");
    CHECK(e.code != 0);
    CHECK(e.output.find("file not found") != std::string::npos);
  }

  TEST_CASE("malformed dataset and bad config fail") {
    const fs::path dir = scratch("malformed");
    write_file(dir / "bad.csv", "32,5,1\nday0,1,0.5\n");
    write_file(dir / "proportions.csv", "day0,1,0,0,0,0\n");
    const Run r = run("train --data \"" + (dir / "bad.csv").string() + "\" --out \"" + (dir / "run").string() + "\"",
                      dir / "log");
    CHECK(r.code != 0);
    CHECK(r.output.find("line 2") != std::string::npos);
    write_file(dir / "typo.cfg", "sigmaa = 0.1\n");
    const Run c = run("gen-data --config \"" + (dir / "typo.cfg").string() + "\" --out \"" + (dir / "o").string() + "\"",
                      dir / "log");
    CHECK(c.code != 0);
    CHECK(c.output.find("sigmaa") != std::string::npos);
  }

  TEST_CASE("small end-to-end run produces every artifact" * doctest::timeout(120)) {
    const fs::path dir = scratch("e2e");
    write_file(dir / "tiny.cfg",
               "per_date_count = 64\ntest_per_date_count = 16\nbag_size = 16\nstage1_epochs = 2\n"
               "stage1_steps_per_epoch = 3\nstage2_epochs = 2\ncheckpoint_every = 1\n");
    const std::string cfg = "--config \"" + (dir / "tiny.cfg").string() + "\"";
    const fs::path data = dir / "data";
    REQUIRE(run("gen-data " + cfg + " --out \"" + data.string() + "\"", dir / "log").code == 0);

    const fs::path out = dir / "run";
    const Run t = run("train " + cfg + " --deterministic --data \"" + (data / "dataset.csv").string() + "\" --out \"" +
                          out.string() + "\"",
                      dir / "log");
    REQUIRE_MESSAGE(t.code == 0, t.output);
    for (const char* f : {"manifest.json", "config.txt", "train_log.csv", "baseline_log.csv", "stage1.ckpt",
                          "stage1_epoch1.ckpt", "stage2.ckpt", "model.ckpt", "baseline.ckpt"}) {
      CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK(slurp(out / "manifest.json").find("\"complete\"") != std::string::npos);

    const fs::path m = dir / "metrics";
    const Run e = run("eval --checkpoint \"" + (out / "model.ckpt").string() + "\" --data \"" +
                          (data / "test.csv").string() + "\" --class-order 1,2,3,4,5 --out \"" + m.string() + "\"",
                      dir / "log");
    REQUIRE_MESSAGE(e.code == 0, e.output);
    CHECK(slurp(m / "metrics.csv").rfind("accuracy,recall,precision,f1,rmse\n", 0) == 0);
    for (const char* f : {"metrics.txt", "metrics.json", "confusion.csv"}) CHECK(fs::exists(m / f));

    const fs::path h = dir / "hist";
    const Run i = run("inspect-hist " + cfg + " --checkpoint \"" + (out / "model.ckpt").string() + "\" --data \"" +
                          (data / "dataset.csv").string() + "\" --bags day0:0,day0:1 --out \"" + h.string() + "\"",
                      dir / "log");
    REQUIRE_MESSAGE(i.code == 0, i.output);
    std::ifstream csv(h / "histogram.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "bin_center,p_hat,p");
    double p_hat = 0.0, p = 0.0, top_p = 0.0;
    int rows = 0;
    while (std::getline(csv, line)) {
      double c = 0, a = 0, b = 0;
      REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &c, &a, &b) == 3);
      p_hat += a;
      p += b;
      if (c > 0.75) top_p += b;
      ++rows;
    }
    CHECK(rows == 20);
    CHECK(std::abs(p_hat - 1.0) < 1e-6);
    CHECK(std::abs(p - 1.0) < 1e-6);
    CHECK(top_p > 0.9);

    const Run bad = run("inspect-hist " + cfg + " --checkpoint \"" + (out / "model.ckpt").string() + "\" --data \"" +
                            (data / "dataset.csv").string() + "\" --bags day0,day99",
                        dir / "log");
    CHECK(bad.code != 0);
    CHECK(bad.output.find("day99") != std::string::npos);
  }

  TEST_CASE("all-unknown truth labels are rejected") {
    const fs::path dir = scratch("unknown");
    write_file(dir / "unknown.csv", "4,5,2\nday0,-1,0,0,0,1\nday0,-1,1,0,0,0\n");
    write_file(dir / "proportions.csv", "day0,1,0,0,0,0\nday1,0,1,0,0,0\n");
    write_file(dir / "tiny.cfg",
               "input_dim = 4\nbackbone_hidden = 4\nfeature_dim = 2\nhead_hidden = 3\nbag_size = 4\n"
               "stage1_epochs = 1\nstage1_steps_per_epoch = 1\nstage2_epochs = 1\ntrain_baseline = false\n");
    std::string two = "4,5,16\n";
    for (int i = 0; i < 8; ++i) two += "day0,1," + std::to_string(i) + ",0,0,1\n";
    for (int i = 0; i < 8; ++i) two += "day1,2,0," + std::to_string(i) + ",1,0\n";
    write_file(dir / "train.csv", two);
    const Run t = run("train --config \"" + (dir / "tiny.cfg").string() + "\" --data \"" + (dir / "train.csv").string() +
                          "\" --out \"" + (dir / "run").string() + "\"",
                      dir / "log");
    REQUIRE_MESSAGE(t.code == 0, t.output);
    const Run e = run("eval --checkpoint \"" + (dir / "run" / "model.ckpt").string() + "\" --data \"" +
                          (dir / "unknown.csv").string() + "\"",
                      dir / "log");
    CHECK(e.code != 0);
    CHECK(e.output.find("no evaluable instances") != std::string::npos);
  }
}
