#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <unistd.h>

#include "tracknlu/seed_store.hpp"

namespace fixture {

inline std::filesystem::path dir() { return TRACKNLU_FIXTURE_DIR; }
inline std::filesystem::path corpus_schemas() { return dir() / "corpus" / "schemas.jsonl"; }
inline std::filesystem::path corpus_samples() { return dir() / "corpus" / "samples.jsonl"; }
inline std::filesystem::path desk_schemas() { return dir() / "desk" / "schemas.jsonl"; }
inline std::filesystem::path desk_samples() { return dir() / "desk" / "samples.jsonl"; }

inline std::shared_ptr<const tracknlu::SampleStore> corpus() {
  static const auto store =
      std::make_shared<const tracknlu::SampleStore>(tracknlu::load_store(corpus_schemas(), corpus_samples()));
  return store;
}

inline std::shared_ptr<const tracknlu::SampleStore> desk() {
  return std::make_shared<const tracknlu::SampleStore>(tracknlu::load_store(desk_schemas(), desk_samples()));
}

/// {Exercise: short text, Repetitions: number, Intensity: light/moderate/vigorous}
inline tracknlu::TrackerSchema exercise(bool with_time = false) {
  using namespace tracknlu;
  TrackerSchema s;
  s.tracker_id = "exercise";
  s.name = "Exercise";
  s.fields = {{"Exercise", ShortTextKind{}, "the name of the exercise"},
              {"Repetitions", NumberKind{}, "the number of repetitions or laps of the exercise"},
              {"Intensity", SingleChoiceKind{{"light", "moderate", "vigorous"}}, "the intensity of the exercise"}};
  if (with_time) s.time_field = FieldSpec{"Time", TimePointKind{}, "the time of the entry"};
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("tracknlu-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace fixture
