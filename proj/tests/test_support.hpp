#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "emocorpus/lexicons.hpp"
#include "emocorpus/transcript.hpp"

namespace emocorpus::testing {

inline std::filesystem::path source_dir() { return EMOCORPUS_SOURCE_DIR; }
inline std::filesystem::path samples_dir() { return source_dir() / "samples"; }
inline std::filesystem::path lexicon_dir() { return source_dir() / "lexicons"; }

struct SampleSample {
  std::string file;
  Emotion emotion;
  Cefr cefr;
};

inline const std::vector<SampleSample>& bundled_samples() {
  static const std::vector<SampleSample> samples = {
      {"anger_a2.txt", Emotion::Anger, Cefr::A2},
      {"anger_b2.txt", Emotion::Anger, Cefr::B2},
      {"anger_c2.txt", Emotion::Anger, Cefr::C2},
      {"surprise_a2.txt", Emotion::Surprise, Cefr::A2},
      {"surprise_b2.txt", Emotion::Surprise, Cefr::B2},
      {"surprise_c2.txt", Emotion::Surprise, Cefr::C2},
  };
  return samples;
}

inline Dialogue load_sample(const SampleSample& s) {
  auto d = transcript::parse(lexicon::read_file(samples_dir() / s.file));
  d.id = s.file.substr(0, s.file.size() - 4);
  d.meta.target_emotion = s.emotion;
  d.meta.cefr = s.cefr;
  d.meta.scenario = "customer service of a hypothetical phone company";
  d.meta.provider = "sample";
  return d;
}

/// A fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("emocorpus-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace emocorpus::testing
