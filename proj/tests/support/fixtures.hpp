#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include "faqsearch/corpus.hpp"
#include "faqsearch/index.hpp"
#include "faqsearch/question_space.hpp"
#include "faqsearch/random.hpp"

namespace fixture {

inline std::vector<faqsearch::FaqEntry> device_faqs() {
  return {
      {"faq-1", "How do I connect a Bluetooth device to my Apple TV?", "Open Settings, then Remotes and Devices.", {}},
      {"faq-2", "How do I reset my Kindle?", "Hold the power button for 40 seconds.", {}},
      {"faq-3", "Can I return a package without a receipt?", "Yes, within 30 days.", {}},
      {"faq-4", "Why won't my Echo connect to wifi?", "Restart the router and the Echo.", {}},
      {"faq-5", "How do I update the software on my Fire tablet?", "Settings, Device Options, System Updates.", {}},
  };
}

inline std::shared_ptr<const faqsearch::QuestionSpace> space_of(
    const std::vector<faqsearch::FaqEntry>& faqs) {
  auto index = std::make_shared<const faqsearch::InvertedIndex>(faqsearch::InvertedIndex::build(faqs));
  return std::make_shared<const faqsearch::QuestionSpace>(index);
}

/// Corpus of random questions over a small vocabulary, so terms repeat.
inline std::vector<faqsearch::FaqEntry> random_faqs(faqsearch::Rng& rng, std::size_t n,
                                                    std::size_t vocabulary = 30) {
  std::vector<faqsearch::FaqEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = 1 + rng.uniform_index(9);
    std::string q;
    for (std::size_t t = 0; t < len; ++t) {
      if (!q.empty()) q += ' ';
      q += "w" + std::to_string(rng.uniform_index(vocabulary));
    }
    out.push_back({"faq-" + std::to_string(i), q, "answer " + std::to_string(i), {}});
  }
  return out;
}

inline std::string random_query(faqsearch::Rng& rng, std::size_t vocabulary = 30) {
  const auto len = 1 + rng.uniform_index(4);
  std::string q;
  for (std::size_t t = 0; t < len; ++t) {
    if (!q.empty()) q += ' ';
    q += "w" + std::to_string(rng.uniform_index(vocabulary + 5));
  }
  return q;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("faqsearch-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
