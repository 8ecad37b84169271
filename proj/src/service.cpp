#include "unscientify/service.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <httplib.h>

#include "unscientify/batch.hpp"
#include "unscientify/error.hpp"

namespace unscientify {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpResponse reply(int status, const ordered_json& body) { return {status, body.dump()}; }

HttpResponse error_reply(int status, const std::string& message) {
  ordered_json j;
  j["error"] = message;
  return reply(status, j);
}

// Verdict identity for diffs: everything except the library version.
ordered_json verdict_key(const Verdict& v) {
  auto j = verdict_to_json(v);
  j.erase("library_version");
  j.erase("explanation");
  return j;
}

std::vector<Document> read_corpus_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read preview corpus " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto text = normalize_text(line);
    if (text.empty() || text[0] == '#') continue;
    Document d;
    d.id = "line-" + std::to_string(n);
    d.sentences.push_back(make_naive_sentence("l" + std::to_string(n), text));
    docs.push_back(std::move(d));
  }
  return docs;
}

// Parses {"assets": {...}} into a bundle; nullopt plus a message when the
// body is malformed.
std::optional<AssetBundle> parse_assets(const json& body, std::string& error) {
  if (!body.is_object() || !body.contains("assets") || !body["assets"].is_object()) {
    error = "body must be an object with an \"assets\" object";
    return std::nullopt;
  }
  AssetBundle out;
  for (const auto& [name, doc] : body["assets"].items()) out[name] = doc;
  return out;
}

struct Candidate {
  std::optional<PatternLibrary> lib;
  std::string compile_error;
  std::vector<LintFinding> findings;
  bool ok() const { return lib.has_value() && !has_errors(findings); }
};

Candidate compile_candidate(const AssetBundle& assets, bool paper_faithful) {
  Candidate c;
  try {
    c.lib = compile_assets(assets, paper_faithful);
    c.findings = lint(*c.lib);
  } catch (const CompileError& e) {
    c.compile_error = e.what();
  }
  return c;
}

ordered_json candidate_json(const Candidate& c) {
  ordered_json j;
  j["ok"] = c.ok();
  if (c.lib) j["version"] = c.lib->version();
  if (!c.compile_error.empty()) j["compile_error"] = c.compile_error;
  j["findings"] = findings_to_json(c.findings);
  return j;
}

}  // namespace

ServiceConfig ServiceConfig::with_env_overrides() const {
  ServiceConfig c = *this;
  if (const char* listen = std::getenv("UNSCIENTIFY_LISTEN"); listen && *listen) {
    std::string s = listen;
    auto colon = s.rfind(':');
    try {
      if (colon == std::string::npos) {
        c.port = std::stoi(s);
      } else {
        c.host = s.substr(0, colon);
        c.port = std::stoi(s.substr(colon + 1));
      }
    } catch (const std::exception&) {
      throw ValidationError("UNSCIENTIFY_LISTEN: expected host:port, got '" + s + "'");
    }
  }
  if (const char* dir = std::getenv("UNSCIENTIFY_PATTERNS"); dir && *dir) c.patterns_dir = dir;
  return c;
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw ValidationError("port out of range: " + std::to_string(port));
  if (!std::filesystem::is_directory(patterns_dir)) {
    throw ValidationError("patterns directory does not exist: " + patterns_dir.string());
  }
  if (max_body_bytes == 0) throw ValidationError("max body size must be positive");
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  auto state = std::make_shared<State>();
  state->assets = read_assets(config_.patterns_dir);
  state->lib = compile_assets(state->assets, config_.paper_faithful);
  state_ = std::move(state);
  if (!config_.corpus_path.empty()) {
    auto docs = read_corpus_lines(config_.corpus_path);
    corpora_[config_.corpus_path.stem().string()] = docs;
    corpora_["default"] = std::move(docs);
  }
}

Service::~Service() { stop(); }

std::shared_ptr<const Service::State> Service::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

PatternLibrary Service::library() const { return snapshot()->lib; }

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) {
  if (body.size() > config_.max_body_bytes) return error_reply(413, "request body too large");
  try {
    if (path == "/annotate" && method == "POST") return annotate(body);
    if (path == "/patterns" && method == "GET") return get_patterns();
    if (path == "/patterns" && method == "PUT") return put_patterns(body);
    if (path == "/patterns/validate" && method == "POST") return validate_patterns(body);
    if (path == "/preview" && method == "POST") return preview(body);
    if (path == "/health" && method == "GET") return health();
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed body: ") + e.what());
  } catch (const ParseError& e) {
    return error_reply(400, e.what());
  } catch (const ValidationError& e) {
    return error_reply(400, e.what());
  }
  static const std::vector<std::string> kPaths = {"/annotate", "/patterns", "/patterns/validate",
                                                  "/preview", "/health"};
  for (const auto& p : kPaths) {
    if (p == path) return error_reply(405, "method not allowed");
  }
  return error_reply(404, "not found");
}

HttpResponse Service::annotate(const std::string& body) const {
  json req = json::parse(body);
  if (!req.is_object()) return error_reply(400, "body must be an object");
  const bool has_text = req.contains("text");
  const bool has_conllu = req.contains("conllu");
  if (has_text == has_conllu) return error_reply(400, "exactly one of \"text\" or \"conllu\"");
  auto state = snapshot();
  const auto& lib = state->lib;
  std::vector<Verdict> verdicts;
  if (has_text) {
    verdicts = annotate_text(req["text"].get<std::string>(), lib);
  } else {
    Document doc = parse_conllu_string(req["conllu"].get<std::string>());
    verdicts = annotate_document(prepare_document(doc, lib), lib);
  }
  ordered_json out;
  out["library_version"] = lib.version();
  out["degraded_linguistics"] = has_text;
  out["verdicts"] = ordered_json::array();
  for (const auto& v : verdicts) out["verdicts"].push_back(verdict_to_json(v));
  return reply(200, out);
}

HttpResponse Service::get_patterns() const {
  auto state = snapshot();
  ordered_json out;
  out["version"] = state->lib.version();
  out["paper_faithful"] = config_.paper_faithful;
  out["rules"] = state->lib.size();
  out["assets"] = ordered_json::object();
  for (const auto& name : kAssetFiles) {
    out["assets"][std::string(name)] = state->assets.at(std::string(name));
  }
  return reply(200, out);
}

HttpResponse Service::validate_patterns(const std::string& body) const {
  std::string error;
  auto assets = parse_assets(json::parse(body), error);
  if (!assets) return error_reply(400, error);
  auto c = compile_candidate(*assets, config_.paper_faithful);
  return reply(c.ok() ? 200 : 422, candidate_json(c));
}

HttpResponse Service::put_patterns(const std::string& body) {
  std::string error;
  auto assets = parse_assets(json::parse(body), error);
  if (!assets) return error_reply(400, error);
  auto c = compile_candidate(*assets, config_.paper_faithful);
  if (!c.ok()) return reply(422, candidate_json(c));

  std::lock_guard commit(commit_mutex_);
  auto next = std::make_shared<State>();
  next->assets = std::move(*assets);
  next->lib = *c.lib;
  if (config_.persist) {
    try {
      write_assets(config_.patterns_dir, next->assets);
    } catch (const std::exception& e) {
      return error_reply(500, std::string("could not persist assets: ") + e.what());
    }
  }
  std::string previous;
  {
    std::lock_guard lock(state_mutex_);
    previous = state_->lib.version();
    state_ = std::move(next);
  }
  ordered_json out = candidate_json(c);
  out["previous_version"] = previous;
  return reply(200, out);
}

HttpResponse Service::preview(const std::string& body) const {
  json req = json::parse(body);
  std::string error;
  auto assets = parse_assets(req, error);
  if (!assets) return error_reply(400, error);
  const std::string corpus_id = req.value("corpus_id", "default");
  auto corpus = corpora_.find(corpus_id);
  if (corpus == corpora_.end()) return error_reply(404, "unknown corpus '" + corpus_id + "'");
  auto c = compile_candidate(*assets, config_.paper_faithful);
  if (!c.lib) return reply(422, candidate_json(c));

  auto state = snapshot();
  auto before = annotate_corpus(corpus->second, state->lib);
  auto after = annotate_corpus(corpus->second, *c.lib);

  ordered_json diff = ordered_json::array();
  std::map<std::string, int> gained, lost;
  std::size_t to_uncertainty = 0, to_claim = 0;
  std::size_t k = 0;
  for (const auto& doc : corpus->second) {
    for (const auto& s : doc.sentences) {
      const Verdict& b = before[k];
      const Verdict& a = after[k];
      ++k;
      if (verdict_key(b) == verdict_key(a)) continue;
      ordered_json entry;
      entry["sentence_id"] = s.id;
      entry["text"] = s.raw_text;
      entry["before"] = verdict_to_json(b);
      entry["after"] = verdict_to_json(a);
      diff.push_back(entry);
      if (b.label != a.label) (a.label == Label::kUncertainty ? to_uncertainty : to_claim)++;
      std::set<Group> bg, ag;
      for (const auto& m : b.su_spans) bg.insert(m.group);
      for (const auto& m : a.su_spans) ag.insert(m.group);
      for (auto g : ag) {
        if (!bg.count(g)) gained[std::string(group_name(g))]++;
      }
      for (auto g : bg) {
        if (!ag.count(g)) lost[std::string(group_name(g))]++;
      }
    }
  }
  ordered_json out;
  out["corpus_id"] = corpus_id;
  out["current_version"] = state->lib.version();
  out["candidate_version"] = c.lib->version();
  out["sentences"] = before.size();
  out["changed"] = diff.size();
  out["summary"] = {{"to_uncertainty", to_uncertainty},
                    {"to_claim", to_claim},
                    {"groups_gained", gained},
                    {"groups_lost", lost}};
  out["findings"] = findings_to_json(c.findings);
  out["diff"] = diff;
  return reply(200, out);
}

HttpResponse Service::health() const {
  auto state = snapshot();
  ordered_json out;
  out["status"] = "ok";
  out["library_version"] = state->lib.version();
  out["rules"] = state->lib.size();
  out["corpora"] = ordered_json::array();
  for (const auto& [id, docs] : corpora_) out["corpora"].push_back(id);
  return reply(200, out);
}

void Service::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(config_.max_body_bytes);
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  for (const char* path : {"/annotate", "/patterns", "/patterns/validate", "/preview", "/health"}) {
    server_->Get(path, route);
    server_->Post(path, route);
    server_->Put(path, route);
  }
}

void Service::run() {
  install_routes();
  if (!server_->listen(config_.host, config_.port)) {
    throw LoadError("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

int Service::start() {
  install_routes();
  int port = config_.port == 0 ? server_->bind_to_any_port(config_.host)
                               : (server_->bind_to_port(config_.host, config_.port) ? config_.port : -1);
  if (port < 0) {
    throw LoadError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace unscientify
