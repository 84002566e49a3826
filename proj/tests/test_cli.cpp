/*
 * Copyright 2026 The dynbucket Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end checks of the command-line tool. The tool path comes from the
// DYNBUCKET_CLI environment variable.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

class Workdir {
 public:
  Workdir() {
    static int n = 0;
    dir_ = fs::temp_directory_path() /
           ("dynbucket_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(n++));
    fs::create_directories(dir_);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  Run run(const std::string& args) const {
    const char* cli = std::getenv("DYNBUCKET_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "DYNBUCKET_CLI is not set");
    const fs::path out = dir_ / "stdout.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" +
                            fs::absolute(cli).string() + "' " +
                            args + " > '" + out.string() + "' 2>/dev/null";
    Run r;
    const int raw = std::system(cmd.c_str());
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read(out.filename().string());
    return r;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  bool exists(const std::string& name) const { return fs::exists(dir_ / name); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_CASE("gen-data is deterministic") {
  Workdir w;
  REQUIRE(w.run("gen-data --count 1000 --seed 7 --output a.jsonl").status == 0);
  REQUIRE(w.run("gen-data --count 1000 --seed 7 --output b.jsonl").status == 0);
  CHECK(w.read("a.jsonl") == w.read("b.jsonl"));
  CHECK(w.read("a.jsonl").size() > 1000);
}

TEST_CASE("gen-data rejects a zero count as a usage error") {
  Workdir w;
  const Run r = w.run("gen-data --count 0 --output x.jsonl");
  CHECK(r.status == 2);
  CHECK_FALSE(w.exists("x.jsonl"));
}

TEST_CASE("gen-data summary matches an independent recount") {
  Workdir w;
  const Run r = w.run("gen-data --output m.jsonl --format json");
  REQUIRE(r.status == 0);
  const json summary = json::parse(r.out);
  std::istringstream lines(w.read("m.jsonl"));
  std::string line;
  double seconds = 0, tps_sum = 0;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const json rec = json::parse(line);
    const double d = rec["duration"].get<double>();
    seconds += d;
    tps_sum += rec["num_tokens"].get<double>() / d;
    ++n;
  }
  CHECK(n == 100'000);
  CHECK(summary["count"] == n);
  CHECK(summary["total_hours"].get<double>() == doctest::Approx(seconds / 3600));
  CHECK(summary["mean_tps"].get<double>() == doctest::Approx(tps_sum / n));
}

TEST_CASE("estimate-buckets shapes") {
  Workdir w;
  REQUIRE(w.run("gen-data --count 20000 --output m.jsonl").status == 0);

  const Run two = w.run(
      "estimate-buckets -m m.jsonl --buckets 30 --sub-buckets 2 --output s.txt "
      "--format json");
  REQUIRE(two.status == 0);
  const json j = json::parse(two.out);
  CHECK(j["flat_buckets"].get<int>() <= 60);
  CHECK(j["occupancy_within_tolerance"] == true);
  CHECK(w.read("s.txt").rfind("dynbucket-bucket-spec 1\n", 0) == 0);

  const Run one = w.run("estimate-buckets -m m.jsonl --buckets 1 --sub-buckets 1");
  REQUIRE(one.status == 0);
  std::istringstream lines(w.read("m.jsonl"));
  std::string line;
  double max_d = 0;
  long long max_t = 0;
  while (std::getline(lines, line)) {
    const json rec = json::parse(line);
    max_d = std::max(max_d, rec["duration"].get<double>());
    max_t = std::max(max_t, rec["num_tokens"].get<long long>());
  }
  std::ostringstream expected;
  expected << "dynbucket-bucket-spec 1\nduration_bins 1\nsub_bins 1\n"
           << "duration_bounds " << max_d << "\ntoken_bounds 0 " << max_t << "\n";
  CHECK(one.out == expected.str());
}

TEST_CASE("oomptimize closed form and infeasible capacity") {
  Workdir w;
  w.write("s.txt",
          "dynbucket-bucket-spec 1\nduration_bins 1\nsub_bins 1\n"
          "duration_bounds 10\ntoken_bounds 0 5\n");
  const Run ok = w.run("oomptimize --spec s.txt --model linear --capacity 100");
  REQUIRE(ok.status == 0);
  CHECK(ok.out == "dynbucket-batch-sizes 1\nbuckets 1\n0 10\n");
  const Run bad = w.run("oomptimize --spec s.txt --model linear --capacity 5");
  CHECK(bad.status == 16);  // 10 + calibration error
  const Run no_spec = w.run("oomptimize --spec missing.txt");
  CHECK(no_spec.status != 0);
}

TEST_CASE("profile: fixed batches pad more than 30x2 buckets") {
  Workdir w;
  REQUIRE(w.run("gen-data --count 30000 --output m.jsonl").status == 0);
  const Run fixed = w.run("profile -m m.jsonl --mode fixed --format json");
  const Run d = w.run("profile -m m.jsonl --scheme D --format json");
  const Run a = w.run("profile -m m.jsonl --scheme A --format json");
  REQUIRE(fixed.status == 0);
  REQUIRE(d.status == 0);
  REQUIRE(a.status == 0);
  const json jf = json::parse(fixed.out), jd = json::parse(d.out),
             ja = json::parse(a.out);
  CHECK(jd["padding"]["input_pad_frac"].get<double>() <
        jf["padding"]["input_pad_frac"].get<double>());
  CHECK(jd["padding"]["output_pad_frac"].get<double>() <
        jf["padding"]["output_pad_frac"].get<double>());
  CHECK(ja["mean_batch_size"].get<double>() > 0.0);
}

TEST_CASE("profile: the tps filter removes exactly the generated outliers") {
  Workdir w;
  const Run gen = w.run(
      "gen-data --count 20000 --rate-constant 10 --prompt-tokens 0 "
      "--outlier-frac 0.02 --outlier-factor 4 --output m.jsonl --format json");
  REQUIRE(gen.status == 0);
  const auto outliers = json::parse(gen.out)["outliers_generated"].get<long>();
  CHECK(outliers > 0);
  REQUIRE(w.run("estimate-buckets -m m.jsonl --buckets 10 --output s.txt").status == 0);
  const Run p = w.run(
      "profile -m m.jsonl --spec s.txt --tps-filter 25 --format json "
      "--series series.csv");
  REQUIRE(p.status == 0);
  CHECK(json::parse(p.out)["samples_filtered_tps"].get<long>() == outliers);
  CHECK(w.read("series.csv").rfind("step,bucket,batch_size", 0) == 0);
}

TEST_CASE("simulate-ddp degenerate cases") {
  Workdir w;
  const Run one = w.run(
      "simulate-ddp --world-sizes 1 --steps 50 --samples-per-rank 5000 "
      "--format json");
  REQUIRE(one.status == 0);
  CHECK(json::parse(one.out)[0]["speedup_percent"].get<double>() == 0.0);
  const Run flat = w.run(
      "simulate-ddp --world-sizes 4 --steps 50 --samples-per-rank 5000 "
      "--cost constant --format json");
  REQUIRE(flat.status == 0);
  CHECK(std::abs(json::parse(flat.out)[0]["speedup_percent"].get<double>()) <
        1e-9);
}

TEST_CASE("rtfx extrapolation") {
  Workdir w;
  const Run r = w.run("rtfx --format json");
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(j["predictions"][2]["rtfx"].get<double>() ==
        doctest::Approx(923.4).epsilon(0.001));
}

TEST_CASE("a config file is equivalent to flags") {
  Workdir w;
  REQUIRE(w.run("gen-data --count 3000 --output m.jsonl").status == 0);
  REQUIRE(w.run("estimate-buckets -m m.jsonl --buckets 8 --output s.txt").status == 0);
  w.write("exp.toml",
          "[sample]\nmanifest = \"m.jsonl\"\nspec = \"s.txt\"\nseed = 5\n"
          "threshold = 120\nformat = \"csv\"\n");
  const Run flags = w.run(
      "sample -m m.jsonl --spec s.txt --seed 5 --threshold 120 --format csv");
  const Run config = w.run("--config exp.toml sample");
  REQUIRE(flags.status == 0);
  REQUIRE(config.status == 0);
  CHECK(flags.out == config.out);
  CHECK(flags.out.rfind("batch,bucket,size", 0) == 0);
}
