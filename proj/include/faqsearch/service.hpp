#pragma once

#include <chrono>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>

#include "faqsearch/feedback_log.hpp"
#include "faqsearch/pipeline.hpp"

namespace faqsearch {

/// {products, faq|null, intent: {label, probability}, degraded, timings}.
std::string search_response_json(const SearchResponse& r);

/// Capacity-bounded LRU of the FAQ shown per (session, normalised query).
class ServedCache {
 public:
  struct Entry {
    std::string faq_id;
    bool degraded = false;
    std::chrono::steady_clock::time_point served_at;
  };

  explicit ServedCache(std::size_t capacity, std::chrono::milliseconds ttl);

  void put(const std::string& session, std::string_view query, Entry entry);
  std::optional<Entry> get(const std::string& session, std::string_view query);
  std::size_t size() const;

 private:
  using Key = std::string;
  static Key key_of(const std::string& session, std::string_view query);

  std::size_t capacity_;
  std::chrono::milliseconds ttl_;
  mutable std::mutex mutex_;
  std::list<std::pair<Key, Entry>> order_;  // most recent first
  std::unordered_map<Key, std::list<std::pair<Key, Entry>>::iterator> map_;
};

struct ServiceOptions {
  std::size_t cache_capacity = 4096;
  std::chrono::milliseconds served_ttl{std::chrono::minutes(30)};
};

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Request handlers independent of the HTTP transport. Never mutates the
/// pipeline's models.
class SearchService {
 public:
  SearchService(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<FeedbackLog> log,
                ServiceOptions options = {});

  HttpReply handle_search(std::string_view query, const std::string& session);
  HttpReply handle_feedback(std::string_view body);
  HttpReply handle_health() const;

  const ServedCache& served() const noexcept { return served_; }

 private:
  std::shared_ptr<const Pipeline> pipeline_;
  std::shared_ptr<FeedbackLog> log_;
  ServedCache served_;
};

/// cpp-httplib server exposing GET /search, POST /feedback, GET /healthz.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<SearchService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace faqsearch
