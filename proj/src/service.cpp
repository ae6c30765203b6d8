#include "faqsearch/service.hpp"

#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

using nlohmann::json;

std::string error_body(std::string_view message) { return json{{"error", message}}.dump(); }

json response_json(const SearchResponse& r) {
  json products = json::array();
  for (const auto& p : r.products) products.push_back({{"id", p.id}, {"title", p.title}, {"score", p.score}});
  json faq = nullptr;
  if (r.faq) {
    faq = {{"id", r.faq->entry.id},
           {"question", r.faq->entry.question},
           {"answer", r.faq->entry.answer},
           {"score", r.faq->score}};
  }
  json timings = json::object();
  for (const auto& [k, v] : r.timings_ms) timings[k] = v;
  return {{"products", products},
          {"faq", faq},
          {"intent", {{"label", to_string(r.intent.intent)}, {"probability", r.intent.probability}}},
          {"degraded", r.degraded},
          {"timings", timings}};
}

}  // namespace

std::string search_response_json(const SearchResponse& r) { return response_json(r).dump(); }

ServedCache::ServedCache(std::size_t capacity, std::chrono::milliseconds ttl)
    : capacity_(std::max<std::size_t>(capacity, 1)), ttl_(ttl) {}

ServedCache::Key ServedCache::key_of(const std::string& session, std::string_view query) {
  return session + '\x1f' + normalize_query(query);
}

void ServedCache::put(const std::string& session, std::string_view query, Entry entry) {
  auto key = key_of(session, query);
  std::lock_guard lock(mutex_);
  if (auto it = map_.find(key); it != map_.end()) {
    order_.erase(it->second);
    map_.erase(it);
  }
  order_.emplace_front(key, std::move(entry));
  map_[key] = order_.begin();
  while (order_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::optional<ServedCache::Entry> ServedCache::get(const std::string& session,
                                                   std::string_view query) {
  const auto key = key_of(session, query);
  std::lock_guard lock(mutex_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  if (std::chrono::steady_clock::now() - it->second->second.served_at > ttl_) {
    order_.erase(it->second);
    map_.erase(it);
    return std::nullopt;
  }
  order_.splice(order_.begin(), order_, it->second);
  return order_.front().second;
}

std::size_t ServedCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

SearchService::SearchService(std::shared_ptr<const Pipeline> pipeline,
                             std::shared_ptr<FeedbackLog> log, ServiceOptions options)
    : pipeline_(std::move(pipeline)),
      log_(std::move(log)),
      served_(options.cache_capacity, options.served_ttl) {
  if (!pipeline_) throw ValidationError("service needs a pipeline");
}

HttpReply SearchService::handle_search(std::string_view query, const std::string& session) {
  if (normalize_query(query).empty()) return {400, error_body("query parameter q is required")};
  SearchResponse resp;
  try {
    resp = pipeline_->search(query);
  } catch (const std::exception&) {
    // Products never depend on the FAQ path, so they are recomputed alone.
    resp = SearchResponse{};
    resp.products = pipeline_->models().products->search(query, pipeline_->config().product_limit);
    resp.degraded = true;
  }
  if (resp.faq) {
    served_.put(session, query, {resp.faq->entry.id, resp.degraded, std::chrono::steady_clock::now()});
  }
  return {200, search_response_json(resp)};
}

HttpReply SearchService::handle_feedback(std::string_view body) {
  if (!log_) return {503, error_body("feedback logging is disabled")};
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return {400, error_body("body must be a JSON object")};
  }
  if (!j.is_object()) return {400, error_body("body must be a JSON object")};
  for (const char* field : {"query", "faq_id", "verdict"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      return {400, error_body(std::string("missing string field ") + field)};
    }
  }
  FeedbackRecord r;
  r.query = j["query"].get<std::string>();
  r.faq_id = j["faq_id"].get<std::string>();
  r.session_id = j.value("session_id", std::string{});
  try {
    r.verdict = parse_verdict(j["verdict"].get<std::string>());
  } catch (const ValidationError& e) {
    return {400, error_body(e.what())};
  }
  if (normalize_query(r.query).empty()) return {400, error_body("query is empty")};
  const auto served = served_.get(r.session_id, r.query);
  if (!served || served->faq_id != r.faq_id) {
    return {422, error_body("faq \"" + r.faq_id + "\" was not served for this query in this session")};
  }
  r.degraded = served->degraded;
  try {
    const auto result = log_->append(r);
    return {200, json{{"status", result == FeedbackLog::AppendResult::Appended ? "recorded" : "duplicate"}}.dump()};
  } catch (const std::exception& e) {
    return {500, error_body(std::string("feedback not persisted: ") + e.what())};
  }
}

HttpReply SearchService::handle_health() const { return {200, json{{"status", "ok"}}.dump()}; }

struct HttpServer::Impl {
  std::shared_ptr<SearchService> service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(std::shared_ptr<SearchService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto* svc = impl_->service.get();
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get("/search", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    const auto q = req.has_param("q") ? req.get_param_value("q") : std::string{};
    const auto session = req.has_param("session") ? req.get_param_value("session") : std::string{};
    reply(res, svc->handle_search(q, session));
  });
  impl_->server.Post("/feedback", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->handle_feedback(req.body));
  });
  impl_->server.Get("/healthz", [svc, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->handle_health());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace faqsearch
