// Command-line front end: annotate, evaluate, patterns {lint,test,hash}, serve.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "unscientify/batch.hpp"
#include "unscientify/error.hpp"
#include "unscientify/evaluation.hpp"
#include "unscientify/hash.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/pipeline.hpp"
#include "unscientify/preprocess.hpp"
#include "unscientify/service.hpp"

namespace fs = std::filesystem;
using namespace unscientify;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitCompile = 2;

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary first so a failed run leaves no partial file.
void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path);
    out << content;
    if (!out) throw LoadError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

PatternLibrary load(const std::string& dir, bool paper_faithful) {
  return dir.empty() ? load_default_library(paper_faithful) : load_library(dir, paper_faithful);
}

// Runs `body`, mapping exceptions to exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const CompileError& e) {
    std::cerr << e.what() << '\n';
    return kExitCompile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

struct AnnotateOptions {
  std::string input;
  std::string format = "conllu";
  std::string patterns;
  std::string output;
  bool paper_faithful = false;
  int threads = 0;
};

int run_annotate(const AnnotateOptions& o) {
  return guarded([&] {
    PatternLibrary lib = load(o.patterns, o.paper_faithful);
    const std::string text = read_input(o.input);
    Document doc = o.format == "text" ? naive_tokenize(text, fs::path(o.input).stem().string())
                                      : parse_conllu_string(text, fs::path(o.input).stem().string());
    std::vector<Document> docs{std::move(doc)};
    std::string out;
    for (const auto& v : annotate_corpus(docs, lib, o.threads)) out += verdict_to_line(v) + '\n';
    write_output(o.output, out);
    return kExitOk;
  });
}

struct EvaluateOptions {
  std::string gold;
  std::string mapping;
  std::string patterns;
  std::string report;
  std::string predictions;
  std::string write_predictions;
  bool paper_faithful = false;
  int threads = 0;
};

std::vector<Verdict> read_predictions(const std::string& path,
                                      const std::vector<Document>& docs) {
  std::istringstream in(read_input(path));
  std::vector<Verdict> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(verdict_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError(path + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (out.size() != docs.size()) {
    throw ValidationError(path + ": " + std::to_string(out.size()) +
                          " cached predictions for " + std::to_string(docs.size()) +
                          " gold rows (misaligned cache)");
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto expected = fnv1a64_hex(preprocess_sentence(docs[i].sentences.front()).raw_text);
    if (!out[i].text_checksum.empty() && out[i].text_checksum != expected) {
      throw ValidationError(path + ": prediction " + std::to_string(i + 1) +
                            " does not match the gold sentence text (misaligned cache)");
    }
  }
  return out;
}

int run_evaluate(const EvaluateOptions& o) {
  return guarded([&] {
    ColumnMapping mapping = o.mapping.empty() ? ColumnMapping{} : load_mapping(o.mapping);
    auto gold = load_gold(fs::path(o.gold), mapping);
    auto docs = gold_documents(gold);
    std::vector<Verdict> verdicts;
    if (!o.predictions.empty()) {
      verdicts = read_predictions(o.predictions, docs);
    } else {
      PatternLibrary lib = load(o.patterns, o.paper_faithful);
      verdicts = annotate_corpus(docs, lib, o.threads);
    }
    if (!o.write_predictions.empty()) {
      std::string out;
      for (const auto& v : verdicts) out += verdict_to_line(v) + '\n';
      write_output(o.write_predictions, out);
    }
    EvalReport report = compute_metrics(gold, verdicts);
    std::cout << report.to_table();
    if (!o.report.empty()) write_output(o.report, report.to_json().dump(2) + '\n');
    return kExitOk;
  });
}

struct PatternsOptions {
  std::string patterns;
  std::string fixtures;
  bool paper_faithful = false;
};

int run_lint(const PatternsOptions& o) {
  return guarded([&] {
    auto findings = lint(load(o.patterns, o.paper_faithful));
    for (const auto& f : findings) {
      std::cout << to_string(f.severity) << ' ' << to_string(f.kind) << ' ' << f.rule_id << ": "
                << f.message << '\n';
    }
    std::size_t errors = 0;
    for (const auto& f : findings) errors += f.severity == Severity::kError ? 1 : 0;
    std::cout << findings.size() << " finding(s), " << errors << " error(s)\n";
    return errors == 0 ? kExitOk : kExitFailure;
  });
}

int run_test(const PatternsOptions& o) {
  return guarded([&] {
    PatternLibrary lib = load(o.patterns, o.paper_faithful);
    fs::path fixtures = o.fixtures;
    if (fixtures.empty()) {
      fixtures = (o.patterns.empty() ? default_patterns_dir() : fs::path(o.patterns)) /
                 "exemplars.json";
    }
    auto results = run_exemplars(lib, load_exemplars(fixtures));
    std::size_t failed = 0;
    for (const auto& r : results) {
      if (r.matched) continue;
      ++failed;
      std::cout << "UNCOVERED " << group_name(r.exemplar.group) << " '" << r.exemplar.cue
                << "' in: " << r.exemplar.sentence << '\n';
    }
    std::cout << results.size() - failed << '/' << results.size() << " exemplar cues matched\n";
    return failed == 0 ? kExitOk : kExitFailure;
  });
}

int run_hash(const PatternsOptions& o) {
  return guarded([&] {
    std::cout << load(o.patterns, o.paper_faithful).version() << '\n';
    return kExitOk;
  });
}

struct ServeOptions {
  std::string listen;
  std::string patterns;
  std::string corpus;
  bool paper_faithful = false;
  bool persist = false;
  std::size_t max_body = 1 << 20;
};

int run_serve(const ServeOptions& o) {
  return guarded([&] {
    ServiceConfig cfg;
    cfg.patterns_dir = o.patterns.empty() ? default_patterns_dir() : fs::path(o.patterns);
    cfg.paper_faithful = o.paper_faithful;
    cfg.persist = o.persist;
    cfg.max_body_bytes = o.max_body;
    cfg.corpus_path = o.corpus;
    if (!o.listen.empty()) {
      auto colon = o.listen.rfind(':');
      cfg.host = colon == std::string::npos ? cfg.host : o.listen.substr(0, colon);
      cfg.port = std::stoi(colon == std::string::npos ? o.listen : o.listen.substr(colon + 1));
    }
    cfg = cfg.with_env_overrides();
    Service service(cfg);
    std::cerr << "serving library " << service.library().version() << " on " << cfg.host << ':'
              << cfg.port << '\n';
    service.run();
    return kExitOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-based detection of scientific uncertainty expressions"};
  app.require_subcommand(1);

  AnnotateOptions ao;
  auto* annotate = app.add_subcommand("annotate", "Annotate a document, one verdict per line");
  annotate->add_option("--input", ao.input, "Input file")->required();
  annotate->add_option("--format", ao.format, "Input format")
      ->check(CLI::IsMember({"conllu", "text"}));
  annotate->add_option("--patterns", ao.patterns, "Pattern asset directory");
  annotate->add_option("--output", ao.output, "Output file (default: standard output)");
  annotate->add_flag("--paper-faithful", ao.paper_faithful, "Disable error-analysis rules");
  annotate->add_option("--threads", ao.threads, "Worker threads (0: OpenMP default)");

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Score the pipeline against a gold corpus");
  evaluate->add_option("--gold", eo.gold, "Delimited gold file")->required();
  evaluate->add_option("--mapping", eo.mapping, "Column mapping (JSON)");
  evaluate->add_option("--patterns", eo.patterns, "Pattern asset directory");
  evaluate->add_option("--report", eo.report, "Report output file");
  evaluate->add_option("--predictions", eo.predictions, "Use cached verdict lines");
  evaluate->add_option("--write-predictions", eo.write_predictions, "Save verdict lines");
  evaluate->add_flag("--paper-faithful", eo.paper_faithful, "Disable error-analysis rules");
  evaluate->add_option("--threads", eo.threads, "Worker threads (0: OpenMP default)");

  PatternsOptions po;
  auto* patterns = app.add_subcommand("patterns", "Maintain the pattern library");
  patterns->require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--patterns", po.patterns, "Pattern asset directory");
    sub->add_flag("--paper-faithful", po.paper_faithful, "Disable error-analysis rules");
  };
  auto* lint_cmd = patterns->add_subcommand("lint", "Report rule and lexicon problems");
  auto* test_cmd = patterns->add_subcommand("test", "Run the exemplar fixture suite");
  auto* hash_cmd = patterns->add_subcommand("hash", "Print the library version");
  add_common(lint_cmd);
  add_common(test_cmd);
  add_common(hash_cmd);
  test_cmd->add_option("--fixtures", po.fixtures, "Exemplar fixture file");

  ServeOptions so;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--listen", so.listen, "host:port (default 127.0.0.1:8080)");
  serve->add_option("--patterns", so.patterns, "Pattern asset directory");
  serve->add_option("--corpus", so.corpus, "Preview corpus, one sentence per line");
  serve->add_flag("--paper-faithful", so.paper_faithful, "Disable error-analysis rules");
  serve->add_flag("--persist", so.persist, "Write committed assets back to the directory");
  serve->add_option("--max-body", so.max_body, "Maximum request body in bytes");

  CLI11_PARSE(app, argc, argv);

  if (*annotate) return run_annotate(ao);
  if (*evaluate) return run_evaluate(eo);
  if (*lint_cmd) return run_lint(po);
  if (*test_cmd) return run_test(po);
  if (*hash_cmd) return run_hash(po);
  if (*serve) return run_serve(so);
  return kExitFailure;
}
