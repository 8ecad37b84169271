#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "golden.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/pipeline.hpp"

using namespace unscientify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = UNSCIENTIFY_CLI;
const fs::path kFixtures = UNSCIENTIFY_TEST_FIXTURES;
const fs::path kPatterns = UNSCIENTIFY_TEST_PATTERNS;

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& f) const { return dir / f; }
};

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const std::string cmd = kCli + " " + args + " > " + out.string() + " 2> " +
                          (scratch / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> lines_of(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("annotate") {
  Scratch s("unscientify_cli_annotate");
  SUBCASE("demo text") {
    std::ofstream(s / "demo.txt") << golden::demo_paragraph();
    auto r = run("annotate --format text --input " + (s / "demo.txt").string() + " --output " +
                     (s / "out.jsonl").string(),
                 s.dir);
    REQUIRE(r.code == 0);
    auto verdicts = lines_of(slurp(s / "out.jsonl"));
    REQUIRE(verdicts.size() == 5);
    int uncertain = 0;
    for (const auto& v : verdicts) uncertain += v["label"] == "UNCERTAINTY" ? 1 : 0;
    CHECK(uncertain == 4);
    CHECK(!fs::exists(s / "out.jsonl.partial"));
  }
  SUBCASE("CoNLL-U input matches the library path") {
    auto r = run("annotate --input " + (kFixtures / "annotated.conllu").string(), s.dir);
    REQUIRE(r.code == 0);
    auto lib = load_default_library();
    std::ifstream in(kFixtures / "annotated.conllu");
    auto expected = annotate_document(prepare_document(parse_conllu(in, "annotated"), lib), lib);
    auto got = lines_of(r.out);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == json(verdict_to_json(expected[i])));
  }
  SUBCASE("missing input leaves no output file") {
    auto r = run("annotate --input " + (s / "absent.conllu").string() + " --output " +
                     (s / "never.jsonl").string(),
                 s.dir);
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(s / "never.jsonl"));
    CHECK_FALSE(fs::exists(s / "never.jsonl.partial"));
  }
  SUBCASE("compile error exits 2") {
    auto assets = read_assets(kPatterns);
    assets["su_groups.json"]["rules"][0]["matchers"][0]["upos_in"] = {"ADJJ"};
    write_assets(s.dir, assets);
    std::ofstream(s / "x.txt") << "It may rain.";
    auto r = run("annotate --format text --input " + (s / "x.txt").string() + " --patterns " +
                     s.dir.string(),
                 s.dir);
    CHECK(r.code == 2);
    CHECK(slurp(s / "stderr.txt").find("unknown UPOS") != std::string::npos);
  }
  SUBCASE("paper-faithful flag") {
    std::ofstream(s / "err.txt") << golden::error_analysis_sentences()[0] << ' '
                                 << golden::error_analysis_sentences()[1];
    auto def = lines_of(run("annotate --format text --input " + (s / "err.txt").string(), s.dir).out);
    auto pf = lines_of(
        run("annotate --paper-faithful --format text --input " + (s / "err.txt").string(), s.dir).out);
    REQUIRE(def.size() == 2);
    REQUIRE(pf.size() == 2);
    for (int i = 0; i < 2; ++i) {
      CHECK(def[i]["label"] == "UNCERTAINTY");
      CHECK(pf[i]["label"] == "CLAIM");
    }
  }
}

TEST_CASE("evaluate") {
  Scratch s("unscientify_cli_evaluate");
  const std::string gold = "--gold " + (kFixtures / "sample_gold.tsv").string() + " --mapping " +
                           (kFixtures / "sample_mapping.json").string();
  auto r = run("evaluate " + gold + " --report " + (s / "report.json").string() +
                   " --write-predictions " + (s / "pred.jsonl").string(),
               s.dir);
  REQUIRE(r.code == 0);
  auto report = json::parse(slurp(s / "report.json"));
  CHECK(report["accuracy"] == 1.0);
  CHECK(report["library_version"] == load_default_library().version());
  CHECK(r.out.find("accuracy") != std::string::npos);

  SUBCASE("cached predictions reproduce the report") {
    auto again = run("evaluate " + gold + " --predictions " + (s / "pred.jsonl").string(), s.dir);
    CHECK(again.code == 0);
  }
  SUBCASE("truncated cache is rejected") {
    auto lines = slurp(s / "pred.jsonl");
    std::ofstream(s / "short.jsonl") << lines.substr(0, lines.find('\n') + 1);
    auto bad = run("evaluate " + gold + " --predictions " + (s / "short.jsonl").string(), s.dir);
    CHECK(bad.code != 0);
    CHECK(slurp(s / "stderr.txt").find("misaligned") != std::string::npos);
  }
  SUBCASE("reordered cache is rejected") {
    auto v = lines_of(slurp(s / "pred.jsonl"));
    std::ofstream out(s / "swapped.jsonl");
    out << v[1].dump() << '\n' << v[0].dump() << '\n' << v[2].dump() << '\n';
    out.close();
    auto bad = run("evaluate " + gold + " --predictions " + (s / "swapped.jsonl").string(), s.dir);
    CHECK(bad.code != 0);
  }
  SUBCASE("bad gold") {
    std::ofstream(s / "bad.csv") << "sentence,label\nx,maybe\n";
    auto bad = run("evaluate --gold " + (s / "bad.csv").string(), s.dir);
    CHECK(bad.code == 1);
    CHECK(slurp(s / "stderr.txt").find("row 1") != std::string::npos);
  }
}

TEST_CASE("patterns subcommands") {
  Scratch s("unscientify_cli_patterns");
  auto lint = run("patterns lint", s.dir);
  CHECK(lint.code == 0);
  CHECK(lint.out.find("0 error(s)") != std::string::npos);

  auto test = run("patterns test", s.dir);
  CHECK(test.code == 0);

  auto hash = run("patterns hash", s.dir);
  CHECK(hash.code == 0);
  CHECK(hash.out == load_default_library().version() + "\n");
  CHECK(run("patterns hash --patterns " + kPatterns.string(), s.dir).out == hash.out);

  SUBCASE("removing a rule uncovers its exemplar") {
    auto assets = read_assets(kPatterns);
    auto& rules = assets["su_groups.json"]["rules"];
    json kept = json::array();
    for (const auto& r : rules) {
      if (r["id"] != "explicit.remain_adjective") kept.push_back(r);
    }
    rules = kept;
    write_assets(s.dir, assets);
    auto r = run("patterns test --patterns " + s.dir.string() + " --fixtures " +
                     (kPatterns / "exemplars.json").string(),
                 s.dir);
    CHECK(r.code == 1);
    CHECK(r.out.find("UNCOVERED EXPLICIT_SU 'remains controversial'") != std::string::npos);
  }
  SUBCASE("lint fails on a duplicate rule") {
    auto assets = read_assets(kPatterns);
    auto& rules = assets["su_groups.json"]["rules"];
    json copy = rules[0];
    copy["id"] = "copy.of.first";
    rules.push_back(copy);
    write_assets(s.dir, assets);
    auto r = run("patterns lint --patterns " + s.dir.string(), s.dir);
    CHECK(r.code == 1);
    CHECK(r.out.find("DUPLICATE") != std::string::npos);
  }
}
