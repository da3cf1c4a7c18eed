#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"

using Catch::Matchers::WithinAbs;
using nlohmann::json;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = hq::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Materializes an embedded scenario as a real file the CLI can open.
std::string model_path(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / ("hqcli_" + name + ".model");
  if (!fs::exists(p)) {
    std::ofstream f(p);
    f << hq::scenario_text(name);
  }
  return p.string();
}

std::string temp_file(const std::string& name, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p);
  f << content;
  return p.string();
}

}  // namespace

TEST_CASE("cli: validate") {
  RunResult ok = run({"validate", "--model", model_path("treatments")});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("valid") != std::string::npos);

  std::string broken = temp_file("hqcli_broken.model",
                                 "[model]\n"
                                 "name: broken\n"
                                 "[variables]\n"
                                 "A: endogenous {0, 1}\n"
                                 "B: endogenous {0, 1}\n"
                                 "[equations]\n"
                                 "A := B\n"
                                 "B := A\n");
  RunResult bad = run({"validate", "--model", broken});
  CHECK(bad.code == 1);
  CHECK_FALSE(bad.err.empty());

  RunResult missing = run({"validate", "--model", "/nonexistent/x.model"});
  CHECK(missing.code == 3);
  CHECK_FALSE(missing.err.empty());
}

TEST_CASE("cli: solve prints the solution") {
  RunResult r = run({"solve", "--model", model_path("treatments"), "--context",
                     "g1=no,g2=no,g3=yes", "--set", "T=t2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("O = dead") != std::string::npos);

  RunResult j = run({"solve", "--model", model_path("treatments"), "--context",
                     "g1=no,g2=no,g3=yes", "--set", "T=t2", "--format", "json"});
  CHECK(j.code == 0);
  json doc = json::parse(j.out);
  CHECK(doc["engine_version"] == "0.1.0");
  CHECK(doc["assignment"]["O"] == "dead");
  CHECK(doc["assignment"]["T"] == "t2");

  RunResult tip = run({"solve", "--model", model_path("tipping"), "--context",
                       "TipChoice=30,Wallet=5", "--format", "json"});
  CHECK(json::parse(tip.out)["assignment"]["O"] == 5);

  RunResult no_ctx = run({"solve", "--model", model_path("treatments")});
  CHECK(no_ctx.code == 1);
}

TEST_CASE("cli: cause reports the verdict and witnesses") {
  std::vector<std::string> base{
      "cause",         "--model", model_path("treatments"),
      "--context",     "g1=no,g2=no,g3=yes",
      "--cause",       "T=t2",
      "--alt",         "T=none",
      "--effect",      "O=dead",
      "--alt-effect",  "O=alive",
  };
  RunResult r = run(base);
  CHECK(r.code == 0);
  CHECK(r.out.find("holds: true") != std::string::npos);
  CHECK(r.out.find("DiseaseDeath = false") != std::string::npos);

  auto with_format = base;
  with_format.push_back("--format");
  with_format.push_back("json");
  json doc = json::parse(run(with_format).out);
  CHECK(doc["holds"] == true);
  CHECK(doc["ac1"] == true);
  CHECK(doc["ac2"] == true);
  CHECK(doc["ac3"] == true);
  REQUIRE(doc["witnesses"].size() == 1);
  CHECK(doc["witnesses"][0]["held"]["DiseaseDeath"] == "false");
}

TEST_CASE("cli: cause exit codes split by failure kind") {
  // Tolerant patient: under t2 the effect O=dead is not actual, so AC1 fails.
  RunResult ac1 = run({"cause", "--model", model_path("treatments"), "--context",
                       "g1=yes,g2=yes,g3=yes", "--cause", "T=t2", "--alt", "T=none",
                       "--effect", "O=dead", "--alt-effect", "O=alive", "--format",
                       "json"});
  CHECK(ac1.code == 2);
  json doc = json::parse(ac1.out);
  CHECK(doc["ac1"] == false);
  CHECK(doc["holds"] == false);

  // AC1 passes but no witness rescues the alternative: plain zero, exit 0.
  RunResult no_cause = run({"cause", "--model", model_path("treatments"),
                            "--context", "g1=no,g2=no,g3=yes", "--cause", "T=t1",
                            "--alt", "T=none", "--effect", "O=dead", "--alt-effect",
                            "O=alive", "--format", "json"});
  CHECK(no_cause.code == 0);
  CHECK(json::parse(no_cause.out)["holds"] == false);

  RunResult malformed = run({"cause", "--model", model_path("treatments"),
                             "--context", "g1=no,g2=no,g3=yes", "--cause", "T=t2",
                             "--alt", "T=none", "--effect", "O=nope", "--alt-effect",
                             "O=alive"});
  CHECK(malformed.code == 1);
  CHECK_FALSE(malformed.err.empty());
}

TEST_CASE("cli: harm on the treatments scenario") {
  RunResult r = run({"harm", "--model", model_path("treatments"), "--context",
                     "g1=no,g2=yes,g3=yes", "--policy", "t1", "--format", "json"});
  CHECK(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["value"].get<double>() == 1.0);
  REQUIRE(doc["witnesses"].size() == 1);
  CHECK(doc["witnesses"][0]["alt"]["T"] == "t2");
  CHECK(doc["witnesses"][0]["outcome"] == "alive");

  RunResult text = run({"harm", "--model", model_path("treatments"), "--context",
                        "g1=no,g2=yes,g3=yes", "--policy", "t1"});
  CHECK(text.out.find("T = t2") != std::string::npos);
}

TEST_CASE("cli: harm agent selection and variants") {
  std::string organ = model_path("organ-donation");
  json billy = json::parse(run({"harm", "--model", organ, "--policy", "harvest",
                                "--agent", "billy", "--format", "json"})
                               .out);
  CHECK(billy["value"].get<double>() == 1.0);
  json p1 = json::parse(run({"harm", "--model", organ, "--policy", "harvest",
                             "--agent", "p1", "--format", "json"})
                            .out);
  CHECK(p1["value"].get<double>() == 0.0);

  // Ambiguous without --agent: six candidates.
  RunResult ambiguous = run({"harm", "--model", organ, "--policy", "harvest"});
  CHECK(ambiguous.code == 1);

  json qual = json::parse(run({"harm", "--model", organ, "--policy", "harvest",
                               "--agent", "billy", "--qualitative", "--format",
                               "json"})
                              .out);
  CHECK(qual["harms"] == true);
  CHECK(qual["certificate"]["alt"]["Harvest"] == "no");
  json qual_no = json::parse(run({"harm", "--model", organ, "--policy", "refrain",
                                  "--agent", "p1", "--qualitative", "--format",
                                  "json"})
                                 .out);
  CHECK(qual_no["harms"] == false);

  json benefit = json::parse(run({"harm", "--model", model_path("tipping"),
                                  "--context", "TipChoice=30,Wallet=30", "--policy",
                                  "thirty", "--benefit", "--format", "json"})
                                 .out);
  CHECK_THAT(benefit["value"].get<double>(), WithinAbs(0.05, 1e-12));

  json rbt = json::parse(run({"harm", "--model", model_path("treatments"),
                              "--context", "g1=yes,g2=no,g3=no", "--policy", "t2",
                              "--rbt", "--default-action", "T=none", "--format",
                              "json"})
                             .out);
  CHECK(rbt["value"].get<double>() == 1.0);

  RunResult no_ctx = run({"harm", "--model", model_path("driving"), "--policy",
                          "fast"});
  CHECK(no_ctx.code == 1);
}

TEST_CASE("cli: wqh with every weighting form") {
  std::string driving = model_path("driving");
  // The file's own table weighting is the default.
  json fast = json::parse(
      run({"wqh", "--model", driving, "--policy", "fast", "--format", "json"}).out);
  CHECK(fast["total"].get<double>() == 0.0);
  CHECK(fast["weighting"] == "table:2");

  json slow = json::parse(
      run({"wqh", "--model", driving, "--policy", "slow", "--format", "json"}).out);
  CHECK_THAT(slow["total"].get<double>(), WithinAbs(0.1, 1e-12));
  REQUIRE(slow["per_context"].size() == 3);
  CHECK(slow["per_context"][0]["probability"] == "999999/1000000");
  CHECK(slow["per_context"][0]["weight"].get<double>() == 1.0);

  json ident = json::parse(run({"wqh", "--model", driving, "--policy", "slow",
                                "--weighting", "identity", "--format", "json"})
                               .out);
  CHECK_THAT(ident["total"].get<double>(), WithinAbs(0.09999995, 1e-9));

  json floor = json::parse(run({"wqh", "--model", driving, "--policy", "slow",
                                "--weighting", "floor:1/1000", "--format", "json"})
                               .out);
  CHECK_THAT(floor["total"].get<double>(), WithinAbs(0.0999999, 1e-9));

  std::string weights = temp_file("hqcli_driving.weights",
                                  "1/2000000: 0\n"
                                  "999999/1000000: 1\n");
  json table = json::parse(run({"wqh", "--model", driving, "--policy", "slow",
                                "--weighting", "table:" + weights, "--format",
                                "json"})
                               .out);
  CHECK_THAT(table["total"].get<double>(), WithinAbs(0.1, 1e-12));

  json prelec_one = json::parse(run({"wqh", "--model", driving, "--policy", "slow",
                                     "--weighting", "prelec:1", "--format", "json"})
                                    .out);
  CHECK_THAT(prelec_one["total"].get<double>(), WithinAbs(0.09999995, 1e-9));

  RunResult bogus = run({"wqh", "--model", driving, "--policy", "slow",
                         "--weighting", "bogus"});
  CHECK(bogus.code == 1);

  RunResult undistributed = run({"wqh", "--model", model_path("tipping"),
                                 "--policy", "five"});
  CHECK(undistributed.code == 1);
}

TEST_CASE("cli: aggregate") {
  std::string organ = model_path("organ-donation");
  json r = json::parse(run({"aggregate", "--model", organ, "--policy", "harvest",
                            "--format", "json"})
                           .out);
  CHECK_THAT(r["total"].get<double>(), WithinAbs(2.0, 1e-12));
  CHECK(r["penalty"].get<double>() == 1.0);
  REQUIRE(r["disproportionate"].size() == 1);
  CHECK(r["disproportionate"][0] == "visitor");
  bool saw_billy = false;
  for (const auto& row : r["per_agent"]) {
    if (row["agent"] == "billy") {
      saw_billy = true;
      CHECK(row["wqh"].get<double>() == 1.0);
    }
  }
  CHECK(saw_billy);

  json refrain = json::parse(run({"aggregate", "--model", organ, "--policy",
                                  "refrain", "--format", "json"})
                                 .out);
  CHECK(refrain["total"].get<double>() == 0.0);

  json per_group = json::parse(run({"aggregate", "--model", organ, "--policy",
                                    "harvest", "--penalty-mode", "per-group",
                                    "--format", "json"})
                                   .out);
  CHECK_THAT(per_group["total"].get<double>(), WithinAbs(2.0, 1e-12));

  RunResult no_dist = run({"aggregate", "--model", model_path("tipping"),
                           "--policy", "five"});
  CHECK(no_dist.code == 1);
}

TEST_CASE("cli: compare ranks policies ascending") {
  json organ = json::parse(
      run({"compare", "--model", model_path("organ-donation"), "--format", "json"})
          .out);
  REQUIRE(organ["rankings"].size() == 2);
  CHECK(organ["rankings"][0]["policy"] == "refrain");
  CHECK(organ["rankings"][1]["policy"] == "harvest");

  json treat = json::parse(
      run({"compare", "--model", model_path("treatments"), "--format", "json"}).out);
  REQUIRE(treat["rankings"].size() == 3);
  CHECK(treat["rankings"][0]["policy"] == "t1");
  CHECK(treat["rankings"][1]["policy"] == "t2");
  CHECK(treat["rankings"][2]["policy"] == "stand_by");
  CHECK_THAT(treat["rankings"][0]["total"].get<double>(), WithinAbs(0.16, 1e-12));

  RunResult text = run({"compare", "--model", model_path("organ-donation")});
  CHECK(text.code == 0);
  CHECK(text.out.find("refrain") < text.out.find("harvest"));
}

TEST_CASE("cli: json output is byte-deterministic") {
  std::vector<std::string> cmd{"harm",      "--model", model_path("treatments"),
                               "--context", "g1=no,g2=yes,g3=yes",
                               "--policy",  "t1",
                               "--format",  "json"};
  RunResult a = run(cmd);
  RunResult b = run(cmd);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK_FALSE(a.out.empty());
}

TEST_CASE("cli: usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate", "--model", model_path("treatments")}).code == 1);
  CHECK(run({"solve", "--model", model_path("treatments"), "--context",
             "g1=no,g2=no,g3=yes", "--format", "yaml"})
            .code == 1);
  CHECK(run({"harm", "--model", model_path("treatments"), "--context",
             "g1=no,g2=yes,g3=yes", "--policy", "nosuch"})
            .code == 1);
  // Choosing both an intervention spelling and a named policy is ambiguous.
  CHECK(run({"harm", "--model", model_path("treatments"), "--context",
             "g1=no,g2=yes,g3=yes", "--policy", "t1", "--set", "T=t1"})
            .code == 1);
}
