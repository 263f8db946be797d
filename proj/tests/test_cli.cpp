#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <sys/wait.h>
#include <cstdlib>
#include <string>

#include "json.hpp"

// Exercises the installed binary end to end: exit codes, plain output, and
// the --json envelope. The binary path and fixture directory come in as
// compile definitions.

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd =
      std::string(TERMPLAN_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string fx(const std::string& name) {
  return std::string(TERMPLAN_FIXTURE_DIR) + "/" + name;
}

std::string mm() { return fx("mm.tmd") + " " + fx("mm.tmp"); }
std::string sc() { return fx("sc.tmd") + " " + fx("sc.tmp"); }
std::string nr() { return fx("nonrigid.tmd") + " " + fx("nonrigid.tmp"); }

nlohmann::json as_json(const std::string& args) {
  RunResult r = run(args + " --json");
  CAPTURE(r.out);
  return nlohmann::json::parse(r.out);
}

}  // namespace

TEST_CASE("validate") {
  for (const std::string& task : {mm(), sc(), nr()}) {
    RunResult r = run("validate " + task);
    CHECK(r.code == 0);
    CHECK(r.out == "ok\n");
  }
  nlohmann::json j = as_json("validate " + mm());
  CHECK(j["ok"] == true);
  CHECK(j["items"].empty());
}

TEST_CASE("check") {
  RunResult t =
      run("check " + sc() +
          " --formula '(forall (?x - robot_id) (knows (?x) (In b1 r2)))'");
  CHECK(t.code == 0);
  CHECK(t.out == "true\n");

  RunResult f =
      run("check " + sc() +
          " --formula '(exists (?x - robot_id) (knows (?x) (Color b1 red)))'");
  CHECK(f.code == 1);
  CHECK(f.out == "false\n");

  RunResult at = run("check " + sc() + " --at w_green --formula '(Color b1 green)'");
  CHECK(at.code == 0);
  CHECK(at.out == "true\n");

  CHECK(run("check " + sc() + " --at nowhere --formula 'true'").code == 2);
  CHECK(run("check " + sc() + " --formula '(In b1'").code == 2);
  CHECK(run("check " + sc() + " --formula '(In ?x r1)'").code == 2);

  nlohmann::json j = as_json("check " + sc() + " --formula '(In b1 r2)'");
  CHECK(j["value"] == true);
  CHECK(j["world"] == "w_red");

  // the designated point follows the update; c's referent shifts at w1
  CHECK(run("check " + nr() + " --formula '(knows (c) (= b c))'").code == 0);
  CHECK(run("check " + nr() +
            " --formula '(knows (c) (knows (c) (= b c)))'")
            .code == 1);
}

TEST_CASE("update") {
  RunResult r = run("update " + mm() + " --action 'Malfunction(m1,box)@em'");
  CHECK(r.code == 0);
  CHECK(r.out.find("(define (problem machine-park-1)") == 0);

  // @event defaults to the designated event
  nlohmann::json j = as_json("update " + mm() + " --action 'Malfunction(m1,box)'");
  CHECK(j["applicable"] == true);
  CHECK(j["worlds"] == 2);

  RunResult na = run("update " + mm() + " --action 'Reboot(a2,sn1)@er1'");
  CHECK(na.code == 1);
  CHECK(na.out == "not applicable: Reboot(a2,sn1)@er1\n");

  // written output re-validates against the same domain
  std::string out_path = "/tmp/termplan_cli_step1.tmp";
  RunResult w = run("update " + mm() + " --action 'Malfunction(m1,box)' -o " +
                    out_path);
  CHECK(w.code == 0);
  CHECK(w.out == "wrote " + out_path + "\n");
  RunResult v = run("validate " + fx("mm.tmd") + " " + out_path);
  CHECK(v.code == 0);
  CHECK(v.out == "ok\n");
  std::remove(out_path.c_str());

  CHECK(run("update " + mm() + " --action 'Reboot(a2,sn1)@ghost'").code == 2);
  CHECK(run("update " + mm() + " --action 'Vanish(a1)'").code == 2);
}

TEST_CASE("plan") {
  RunResult r = run("plan " + mm() + " --max-depth 3");
  CHECK(r.code == 0);
  CHECK(r.out == "((Malfunction m1 box @em)\n (Reboot a1 sn1 @er1))\n");

  RunResult same = run("plan " + mm() + " --max-depth 3 --strategy iddfs");
  CHECK(same.out == r.out);
  RunResult nodedup = run("plan " + mm() + " --max-depth 3 --dedup none");
  CHECK(nodedup.out == r.out);

  RunResult none = run("plan " + mm() + " --max-depth 0");
  CHECK(none.code == 1);
  CHECK(none.out == "no plan within bound\n");
  CHECK(run("plan " + mm() + " --max-depth 1").code == 1);

  nlohmann::json j = as_json("plan " + mm() + " --max-depth 3");
  CHECK(j["found"] == true);
  CHECK(j["length"] == 2);
  CHECK(j["plan"][0] == "Malfunction(m1,box)@em");
  CHECK(j["plan"][1] == "Reboot(a1,sn1)@er1");

  CHECK(run("plan " + mm() + " --max-depth 3 --strategy dfs").code == 2);
  CHECK(run("plan " + mm() + " --max-depth 3 --dedup hash").code == 2);
  CHECK(run("plan " + mm()).code == 2);  // --max-depth is required
}

TEST_CASE("verify") {
  RunResult ok = run("verify " + mm() + " --plan " + fx("mm_pi.plan"));
  CHECK(ok.code == 0);
  CHECK(ok.out == "valid\n");

  RunResult p1 = run("verify " + mm() + " --plan " + fx("mm_pi_prime.plan"));
  CHECK(p1.code == 1);
  CHECK(p1.out == "invalid: step 3 (Reboot(a2,sn2)@er1) not applicable\n");

  RunResult p2 = run("verify " + mm() + " --plan " + fx("mm_pi_prime2.plan"));
  CHECK(p2.code == 1);
  CHECK(p2.out == "invalid: step 3 (Reboot(a2,sn1)@er1) not applicable\n");

  RunResult e = run("verify " + mm() + " --plan " + fx("empty.plan"));
  CHECK(e.code == 1);
  CHECK(e.out == "invalid: goal fails in the final state\n");

  RunResult sc_ok = run("verify " + sc() + " --plan " + fx("sc.plan"));
  CHECK(sc_ok.code == 0);

  nlohmann::json j = as_json("verify " + mm() + " --plan " + fx("mm_pi.plan"));
  CHECK(j["valid"] == true);
  CHECK(j["steps"] == 2);
  CHECK(j["failure"] == "");

  CHECK(run("verify " + mm() + " --plan /nonexistent.plan").code == 2);
}

TEST_CASE("translate") {
  std::string formula =
      "'(after (Malfunction m1 box) (knows (m1) (malfunction box)))'";
  RunResult r = run("translate " + mm() + " --formula " + formula + " --trace");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "(implies (knows (m1) (malfunction box)) (implies (= m1 m1) "
        "(knows (m1) (implies (knows (m1) (malfunction box)) "
        "(malfunction box)))))\n"
        "step 1: knowledge at [root] 12 -> 9\n"
        "step 2: atom at [1.1.0] 6 -> 3\n");

  // without --trace only the result is printed
  RunResult bare = run("translate " + mm() + " --formula " + formula);
  CHECK(bare.out.substr(0, 8) == "(implies");
  CHECK(bare.out.find("step") == std::string::npos);

  nlohmann::json j = as_json("translate " + mm() + " --formula " + formula);
  CHECK(j["complexity_in"] == 12);
  CHECK(j["complexity_out"] < j["complexity_in"]);
  REQUIRE(j["steps"].size() == 2);
  CHECK(j["steps"][0]["axiom"] == "knowledge");
  CHECK(j["steps"][0]["position"] == "");
  CHECK(j["steps"][0]["before"] == 12);
  CHECK(j["steps"][0]["after"] == 9);
  for (const auto& s : j["steps"]) CHECK(s["before"] > s["after"]);

  // a static input passes through unchanged
  RunResult s = run("translate " + mm() + " --formula '(malfunction box)'");
  CHECK(s.code == 0);
  CHECK(s.out == "(malfunction box)\n");

  CHECK(run("translate " + mm() + " --formula " + formula +
            " --knowledge-row plain")
            .code == 0);
  CHECK(run("translate " + mm() + " --formula " + formula +
            " --knowledge-row fancy")
            .code == 2);
}

TEST_CASE("frames") {
  RunResult r = run("frames " + mm());
  CHECK(r.code == 0);
  CHECK(r.out ==
        "Alpha1: reflexive=yes serial=yes transitive=yes euclidean=yes\n"
        "Alpha2: reflexive=yes serial=yes transitive=yes euclidean=yes\n"
        "Mu: reflexive=yes serial=yes transitive=yes euclidean=yes\n"
        "worlds=4 agents=3 objects=2\n");

  RunResult nrr = run("frames " + nr());
  CHECK(nrr.code == 0);
  CHECK(nrr.out.find("Alpha: reflexive=no serial=no transitive=yes") !=
        std::string::npos);

  RunResult t = run("frames --check T --worlds 2");
  CHECK(t.code == 0);
  CHECK(t.out.find("confirmed") != std::string::npos);

  RunResult n2 = run("frames --check N --n 2 --agents 3 --worlds 2");
  CHECK(n2.code == 0);
  CHECK(n2.out.find("kind=N ") != std::string::npos);

  RunResult budget = run("frames --check T --budget 10");
  CHECK(budget.code == 1);
  CHECK(budget.out.find("inconclusive") != std::string::npos);
  CHECK(budget.out.find("enumeration budget exhausted") != std::string::npos);

  nlohmann::json j = as_json("frames " + mm());
  CHECK(j["worlds"] == 4);
  CHECK(j["agents"]["Mu"]["reflexive"] == true);

  CHECK(run("frames --check Z").code == 2);
  CHECK(run("frames").code == 2);
  CHECK(run("frames --check N --n 0").code == 3);
}

TEST_CASE("usage and determinism") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("conjure").code == 2);
  CHECK(run("plan --max-depth 1").code == 2);  // missing files
  CHECK(run("validate /nonexistent.tmd /nonexistent.tmp").code == 2);

  RunResult a = run("plan " + mm() + " --max-depth 3 --json");
  RunResult b = run("plan " + mm() + " --max-depth 3 --json");
  CHECK(a.out == b.out);
  RunResult c = run("translate " + sc() +
                    " --formula '(after (Move a1 r1 r2) (In a1 r2))' --trace");
  RunResult d = run("translate " + sc() +
                    " --formula '(after (Move a1 r1 r2) (In a1 r2))' --trace");
  CHECK(c.code == 0);
  CHECK(c.out == d.out);
}
