#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

namespace faqsearch {

enum class Verdict { Helpful, NotHelpful };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);  // helpful|not_helpful

struct FeedbackRecord {
  std::int64_t timestamp_ms = 0;  // UTC milliseconds since the epoch
  std::string query;
  std::string faq_id;
  Verdict verdict = Verdict::Helpful;
  std::string session_id;
  bool degraded = false;  // the response that showed the FAQ was degraded

  bool operator==(const FeedbackRecord&) const = default;
};

std::string format_utc(std::int64_t timestamp_ms);  // 2026-01-02T03:04:05.678Z

std::string feedback_to_json_line(const FeedbackRecord& r);  // no trailing newline
/// Throws ParseError(line_number) on malformed input.
FeedbackRecord feedback_from_json_line(std::string_view line, std::size_t line_number = 0);

struct FeedbackReadResult {
  std::vector<FeedbackRecord> records;
  std::size_t corrupt_lines = 0;   // complete lines that failed to parse
  bool partial_tail = false;       // bytes after the last newline
};

/// Reads every complete line; a trailing partial line is reported, not parsed.
FeedbackReadResult read_feedback_log(const std::filesystem::path& path);

/// Durable append-only feedback log. All writes go through one writer
/// thread; append() returns only after the line is written and fsynced.
/// Identical (session, normalised query, faq, verdict) records within the
/// dedup window are acknowledged without writing. On open, bytes after the
/// last newline are moved to "<path>.quarantine" and cut from the log.
class FeedbackLog {
 public:
  struct Options {
    std::filesystem::path path;
    std::chrono::milliseconds dedup_window{std::chrono::minutes(10)};
    bool sync = true;
    std::function<std::int64_t()> clock;  // defaults to the system clock
  };

  enum class AppendResult { Appended, Duplicate };

  explicit FeedbackLog(Options options);
  ~FeedbackLog();
  FeedbackLog(const FeedbackLog&) = delete;
  FeedbackLog& operator=(const FeedbackLog&) = delete;

  /// Stamps the record with the log clock and persists it. Throws
  /// std::runtime_error when the write fails.
  AppendResult append(FeedbackRecord record);

  const std::filesystem::path& path() const noexcept { return options_.path; }
  std::size_t recovered_records() const noexcept { return recovered_; }
  std::size_t quarantined_bytes() const noexcept { return quarantined_bytes_; }

 private:
  using Key = std::tuple<std::string, std::string, std::string, Verdict>;
  struct Pending {
    FeedbackRecord record;
    std::promise<AppendResult> done;
  };

  void recover();
  void writer_loop();
  AppendResult write_one(FeedbackRecord& record);

  Options options_;
  int fd_ = -1;
  std::size_t recovered_ = 0;
  std::size_t quarantined_bytes_ = 0;
  std::map<Key, std::int64_t> last_seen_;  // writer thread only after construction

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Pending> queue_;
  bool stopping_ = false;
  std::thread writer_;
};

}  // namespace faqsearch
