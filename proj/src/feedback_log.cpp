#include "faqsearch/feedback_log.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

using nlohmann::json;

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("feedback log write failed");
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string_view to_string(Verdict v) { return v == Verdict::Helpful ? "helpful" : "not_helpful"; }

Verdict parse_verdict(std::string_view s) {
  if (s == "helpful") return Verdict::Helpful;
  if (s == "not_helpful") return Verdict::NotHelpful;
  throw ValidationError("verdict must be \"helpful\" or \"not_helpful\"");
}

std::string format_utc(std::int64_t timestamp_ms) {
  const std::time_t secs = static_cast<std::time_t>(timestamp_ms / 1000);
  const int millis = static_cast<int>(((timestamp_ms % 1000) + 1000) % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, millis);
  return out;
}

std::string feedback_to_json_line(const FeedbackRecord& r) {
  json j{{"timestamp", format_utc(r.timestamp_ms)},
         {"ts_ms", r.timestamp_ms},
         {"query", r.query},
         {"faq_id", r.faq_id},
         {"verdict", to_string(r.verdict)},
         {"session_id", r.session_id},
         {"degraded", r.degraded}};
  return j.dump();
}

FeedbackRecord feedback_from_json_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, e.what());
  }
  try {
    FeedbackRecord r;
    r.timestamp_ms = j.at("ts_ms").get<std::int64_t>();
    r.query = j.at("query").get<std::string>();
    r.faq_id = j.at("faq_id").get<std::string>();
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.session_id = j.value("session_id", std::string{});
    r.degraded = j.value("degraded", false);
    return r;
  } catch (const json::exception& e) {
    throw ParseError(line_number, e.what());
  } catch (const ValidationError& e) {
    throw ParseError(line_number, e.what());
  }
}

FeedbackReadResult read_feedback_log(const std::filesystem::path& path) {
  FeedbackReadResult out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < data.size()) {
    const auto nl = data.find('\n', start);
    if (nl == std::string::npos) {
      out.partial_tail = true;
      break;
    }
    ++lineno;
    const std::string_view line(data.data() + start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.records.push_back(feedback_from_json_line(line, lineno));
    } catch (const ParseError&) {
      ++out.corrupt_lines;
    }
  }
  return out;
}

FeedbackLog::FeedbackLog(Options options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_now_ms;
  if (options_.path.has_parent_path()) std::filesystem::create_directories(options_.path.parent_path());
  recover();
  fd_ = ::open(options_.path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw_errno("cannot open feedback log " + options_.path.string());
  writer_ = std::thread([this] { writer_loop(); });
}

FeedbackLog::~FeedbackLog() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (writer_.joinable()) writer_.join();
  if (fd_ >= 0) ::close(fd_);
}

void FeedbackLog::recover() {
  std::error_code ec;
  if (!std::filesystem::exists(options_.path, ec)) return;
  std::string data;
  {
    std::ifstream in(options_.path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    data = buf.str();
  }
  const auto last_nl = data.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep < data.size()) {
    const auto quarantine = options_.path.string() + ".quarantine";
    std::ofstream q(quarantine, std::ios::binary | std::ios::app);
    q << data.substr(keep) << '\n';
    q.flush();
    if (!q) throw std::runtime_error("cannot write " + quarantine);
    quarantined_bytes_ = data.size() - keep;
    std::filesystem::resize_file(options_.path, keep);
  }
  const auto existing = read_feedback_log(options_.path);
  recovered_ = existing.records.size();
  for (const auto& r : existing.records) {
    Key key{r.session_id, normalize_query(r.query), r.faq_id, r.verdict};
    auto& seen = last_seen_[key];
    seen = std::max(seen, r.timestamp_ms);
  }
}

FeedbackLog::AppendResult FeedbackLog::append(FeedbackRecord record) {
  std::future<AppendResult> done;
  {
    std::lock_guard lock(mutex_);
    if (stopping_) throw std::runtime_error("feedback log is closed");
    queue_.push_back({std::move(record), {}});
    done = queue_.back().done.get_future();
  }
  cv_.notify_one();
  return done.get();
}

void FeedbackLog::writer_loop() {
  for (;;) {
    Pending item;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      item = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      item.done.set_value(write_one(item.record));
    } catch (...) {
      item.done.set_exception(std::current_exception());
    }
  }
}

FeedbackLog::AppendResult FeedbackLog::write_one(FeedbackRecord& record) {
  record.timestamp_ms = options_.clock();
  Key key{record.session_id, normalize_query(record.query), record.faq_id, record.verdict};
  auto it = last_seen_.find(key);
  if (it != last_seen_.end() && record.timestamp_ms - it->second < options_.dedup_window.count()) {
    return AppendResult::Duplicate;
  }
  write_all(fd_, feedback_to_json_line(record) + '\n');
  if (options_.sync && ::fsync(fd_) != 0) throw_errno("feedback log fsync failed");
  last_seen_[key] = record.timestamp_ms;
  return AppendResult::Appended;
}

}  // namespace faqsearch
