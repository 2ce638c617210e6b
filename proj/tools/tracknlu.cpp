// tracknlu command line: extract, eval, serve, seeds, mock.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tracknlu/http_api.hpp"
#include "tracknlu/service.hpp"
#include "tracknlu/simulation.hpp"

using namespace tracknlu;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct Corpus {
  std::string schemas = env_or("SEED_SCHEMAS", "");
  std::string samples = env_or("SEED_SAMPLES", "");

  void add_options(CLI::App* app, bool required) {
    auto* a = app->add_option("--schemas", schemas, "Tracker schema file (line-delimited JSON)");
    auto* b = app->add_option("--samples", samples, "Sample file (line-delimited JSON)");
    if (required && schemas.empty()) a->required();
    if (required && samples.empty()) b->required();
  }

  std::shared_ptr<const SampleStore> load() const {
    if (schemas.empty() && samples.empty()) return std::make_shared<const SampleStore>();
    if (schemas.empty() || samples.empty()) {
      throw std::invalid_argument("--schemas and --samples go together");
    }
    return std::make_shared<const SampleStore>(load_store(schemas, samples));
  }
};

/// "reference" answers from the loaded corpus; everything else goes to make_backend.
std::shared_ptr<CompletionBackend> backend_for(const std::string& spec,
                                               const std::shared_ptr<const SampleStore>& store) {
  if (spec == "reference") return std::make_shared<ReferenceResponder>(store);
  return make_backend(spec);
}

std::shared_ptr<const Embedder> embedder() {
  return std::make_shared<CachingEmbedder>(make_embedder_from_env());
}

void print_session(const TrackerSchema& schema, const CaptureSession& s) {
  fmt::print("tracker: {}\n", s.tracker_id);
  fmt::print("phrase: {}\n", s.phrase);
  if (s.reference_time) fmt::print("reference_time: {}\n", format_time_point(*s.reference_time));
  fmt::print("values:\n");
  for (const auto* f : schema.columns()) {
    const auto it = s.result.values.find(f->name);
    if (it != s.result.values.end()) fmt::print("  {} = {}\n", f->name, render_value(it->second));
  }
  for (const auto& [field, prov] : s.result.provenance) {
    for (const auto& snap : prov.snaps) {
      fmt::print("snapped: {}: '{}' -> '{}' ({:.3f})\n", field, snap.raw_label, snap.label, snap.similarity);
    }
  }
  for (const auto& d : s.result.dropped) {
    fmt::print("dropped: '{}' = '{}' ({})\n", d.raw_name, d.raw_value, d.reason);
  }
  fmt::print("shots:\n");
  for (const auto& shot : s.shot_audit) {
    fmt::print("  {:<8} {} [{}] {:.4f}\n", role_name(shot.role), shot.sample_id, shot.tracker_id, shot.score);
  }
  fmt::print("prompt_sha256: {}\n", s.prompt_sha256);
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot natural-language item capture for personal trackers"};
  app.require_subcommand(1);

  // extract ------------------------------------------------------------------
  auto* extract = app.add_subcommand("extract", "Run one extraction and print values and shot audit");
  Corpus extract_corpus;
  std::string tracker_id, phrase, reference_time, store_dir = env_or("STORE_DIR", "");
  std::string extract_backend = env_or("LLM_BACKEND", "live");
  bool as_json = false, prompt_only = false;
  extract_corpus.add_options(extract, false);
  extract->add_option("--tracker", tracker_id, "Tracker id")->required();
  extract->add_option("--phrase", phrase, "Phrase to extract from")->required();
  extract->add_option("--reference-time", reference_time, "Current time as YYYY-MM-DDTHH:MM");
  extract->add_option("--store-dir", store_dir, "User store directory (read only here)");
  extract->add_option("--backend", extract_backend, "mock:DIR | live | reference");
  extract->add_flag("--json", as_json, "Print the session as JSON");
  extract->add_flag("--prompt-only", prompt_only, "Print the rendered prompt and exit");

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Leave-one-tracker-out N-shot simulation");
  Corpus eval_corpus;
  std::string styles = "augmented", shots = "0,1,2,3,4", eval_backend = "live", out, export_qa, format = "table";
  std::uint64_t seed = 0;
  eval_corpus.add_options(eval, true);
  eval->add_option("--styles", styles, "Comma list of augmented, zeroshot");
  eval->add_option("--shots", shots, "Comma list of N values");
  eval->add_option("--backend", eval_backend, "mock:DIR | live | reference");
  eval->add_option("--seed", seed, "Seed for prior-item draws");
  eval->add_option("--out", out, "Write the report here");
  eval->add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
  eval->add_option("--export-qa", export_qa, "Write QA-baseline inputs to this path and exit");

  // serve --------------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Start the HTTP capture service");
  Corpus serve_corpus;
  std::string bind_addr = env_or("BIND_ADDR", "127.0.0.1:8080");
  std::string serve_store = env_or("STORE_DIR", "store");
  std::string serve_backend = env_or("LLM_BACKEND", "live");
  serve_corpus.add_options(serve, false);
  serve->add_option("--bind", bind_addr, "host:port");
  serve->add_option("--store-dir", serve_store, "Append-only store directory");
  serve->add_option("--backend", serve_backend, "mock:DIR | live | reference");

  // seeds --------------------------------------------------------------------
  auto* seeds = app.add_subcommand("seeds", "Seed corpus tools");
  seeds->require_subcommand(1);
  auto* validate = seeds->add_subcommand("validate", "Check a schema/sample pair; nonzero exit on any violation");
  std::string v_schemas, v_samples;
  validate->add_option("schemas", v_schemas)->required();
  validate->add_option("samples", v_samples)->required();

  auto* draft = seeds->add_subcommand("draft", "Generate uncurated seed drafts for one tracker");
  Corpus draft_corpus;
  std::string draft_tracker, draft_out, draft_backend = env_or("LLM_BACKEND", "live");
  int draft_count = 10;
  std::uint64_t draft_seed = 0;
  draft_corpus.add_options(draft, true);
  draft->add_option("--tracker", draft_tracker)->required();
  draft->add_option("--count", draft_count)->check(CLI::PositiveNumber);
  draft->add_option("--seed", draft_seed);
  draft->add_option("--backend", draft_backend, "mock:DIR | live");
  draft->add_option("--out", draft_out, "Write drafts here instead of stdout");

  // mock ---------------------------------------------------------------------
  auto* mock = app.add_subcommand("mock", "Mock fixture tools");
  mock->require_subcommand(1);
  auto* record = mock->add_subcommand("record", "Record fixtures for an eval run from the reference responder");
  Corpus record_corpus;
  std::string record_dir, record_styles = "augmented,zeroshot", record_shots = "0,1,2,3,4";
  std::uint64_t record_seed = 0;
  double noise = 0.35;
  record_corpus.add_options(record, true);
  record->add_option("--dir", record_dir)->required();
  record->add_option("--styles", record_styles);
  record->add_option("--shots", record_shots);
  record->add_option("--seed", record_seed);
  record->add_option("--noise", noise)->check(CLI::Range(0.0, 1.0));

  auto* put = mock->add_subcommand("add", "Store COMPLETION as the fixture for the prompt read from stdin");
  std::string put_dir, put_completion;
  put->add_option("dir", put_dir)->required();
  put->add_option("completion", put_completion)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      const auto corpus = extract_corpus.load();
      ServiceConfig config;
      config.seeds = corpus;
      config.embedder = embedder();
      auto seen_prompt = std::make_shared<std::string>();
      config.backend = prompt_only ? std::make_shared<FunctionBackend>(
                                         [seen_prompt](const CompletionRequest& r) {
                                           *seen_prompt = r.prompt;
                                           return std::string();
                                         },
                                         "capture")
                                   : backend_for(extract_backend, corpus);
      config.store_dir = store_dir;
      CaptureService service(config);
      std::optional<TimePoint> ref;
      if (!reference_time.empty()) {
        ref = parse_time_point(reference_time);
        if (!ref) throw std::invalid_argument("--reference-time must be YYYY-MM-DDTHH:MM");
      }
      const auto session = service.extract(tracker_id, phrase, ref);
      if (prompt_only) {
        std::cout << *seen_prompt;
        return 0;
      }
      const auto schema = service.get_tracker(tracker_id);
      if (as_json) {
        std::cout << session_to_json(schema, session).dump(2) << '\n';
      } else {
        print_session(schema, session);
      }
      return 0;
    }

    if (*eval) {
      const auto store = eval_corpus.load();
      if (!export_qa.empty()) {
        export_qa_inputs(*store, export_qa);
        fmt::print(stderr, "wrote QA inputs to {}\n", export_qa);
        return 0;
      }
      SimulationConfig config;
      config.styles.clear();
      for (const auto& s : split_list(styles)) {
        const auto style = parse_style(s);
        if (!style || *style == PromptStyle::qa) throw std::invalid_argument(fmt::format("unsupported style '{}'", s));
        config.styles.push_back(*style);
      }
      config.n_shots.clear();
      for (const auto& n : split_list(shots)) config.n_shots.push_back(std::stoi(n));
      config.seed = seed;
      config.backend = backend_for(eval_backend, store);
      config.embedder = embedder();
      config.log = [](const std::string& line) { fmt::print(stderr, "{}\n", line); };
      const auto report = run_simulation(store, config);
      const auto table = emit_report(report, ReportFormat::table);
      std::cout << table;
      if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        f << (format == "json" ? emit_report(report, ReportFormat::structured) : table);
        if (!f) throw std::runtime_error(fmt::format("cannot write {}", out));
      }
      bool partial = false;
      for (const auto& c : report.conditions) partial = partial || c.partial;
      return partial ? 1 : 0;
    }

    if (*serve) {
      const auto corpus = serve_corpus.load();
      ServiceConfig config;
      config.seeds = corpus;
      config.embedder = embedder();
      config.backend = backend_for(serve_backend, corpus);
      config.store_dir = serve_store;
      CaptureService service(config);
      ApiServer server(service);
      const auto [host, port] = parse_bind_addr(bind_addr);
      if (!server.bind(host, port)) throw std::runtime_error(fmt::format("cannot bind {}", bind_addr));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      fmt::print(stderr, "listening on {}:{}\n", host, port);
      server.listen_after_bind();
      return 0;
    }

    if (*validate) {
      const auto store = load_store(v_schemas, v_samples);
      fmt::print("ok: {} trackers, {} samples\n", store.trackers().size(), store.samples().size());
      return 0;
    }

    if (*draft) {
      const auto store = draft_corpus.load();
      const auto* schema = store->find_tracker(draft_tracker);
      if (!schema) throw std::invalid_argument(fmt::format("no tracker '{}'", draft_tracker));
      auto backend = make_backend(draft_backend);
      const auto batch = generate_seed_drafts(*schema, draft_count, *backend, draft_seed);
      for (const auto& w : batch.warnings) fmt::print(stderr, "warning: {}\n", w);
      std::ofstream file;
      if (!draft_out.empty()) file.open(draft_out, std::ios::binary);
      std::ostream& os = draft_out.empty() ? std::cout : file;
      for (const auto& d : batch.drafts) os << sample_to_json(*schema, d).dump() << '\n';
      return 0;
    }

    if (*record) {
      const auto store = record_corpus.load();
      auto recorder = std::make_shared<RecordingBackend>(std::make_shared<ReferenceResponder>(store, noise), record_dir);
      SimulationConfig config;
      config.styles.clear();
      for (const auto& s : split_list(record_styles)) {
        const auto style = parse_style(s);
        if (!style || *style == PromptStyle::qa) throw std::invalid_argument(fmt::format("unsupported style '{}'", s));
        config.styles.push_back(*style);
      }
      config.n_shots.clear();
      for (const auto& n : split_list(record_shots)) config.n_shots.push_back(std::stoi(n));
      config.seed = record_seed;
      config.backend = recorder;
      config.embedder = embedder();
      const auto report = run_simulation(store, config);
      fmt::print("recorded {} fixtures over {} runs\n", recorder->recorded(), report.runs);
      return 0;
    }

    if (*put) {
      std::stringstream prompt;
      prompt << std::cin.rdbuf();
      std::filesystem::create_directories(put_dir);
      const auto path = MockBackend::fixture_path(put_dir, prompt.str());
      std::ofstream f(path, std::ios::binary);
      f << put_completion << '\n';
      if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
      fmt::print("{}\n", path.string());
      return 0;
    }
  } catch (const ServiceError& e) {
    fmt::print(stderr, "error: {} ({})\n", e.what(), e.code_name());
    for (const auto& d : e.details()) fmt::print(stderr, "  {}\n", d);
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
