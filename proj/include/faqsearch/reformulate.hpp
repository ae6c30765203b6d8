#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faqsearch {

struct ReformulationPair {
  std::string query;
  std::string question;
};

/// Token statistics of the query spans that filled one slot during mining.
struct SlotProfile {
  std::map<std::string, std::size_t> first;
  std::map<std::string, std::size_t> last;
  std::map<std::string, std::size_t> all;
  std::size_t fills = 0;

  void add(std::span<const std::string> span);
  void merge(const SlotProfile& other);
  bool operator==(const SlotProfile&) const = default;
};

/// A question pattern. An empty element is a slot; anything else is a
/// literal token.
struct Template {
  std::vector<std::string> pattern;
  std::size_t support = 0;
  std::vector<SlotProfile> slots;  // one per slot, in pattern order

  std::size_t slot_count() const;
  bool operator==(const Template&) const = default;
};

/// Aligns query tokens to question tokens and slots each maximal matched
/// run (articles between matched tokens are absorbed into the run).
/// Identical patterns merge; result is sorted by support, highest first.
std::vector<Template> mine_templates(std::span<const ReformulationPair> pairs);

/// Line-delimited JSON: {"pattern": [...], "support": n, "slots": [...]},
/// slots in the pattern written as null. "slots" is optional on read.
void write_templates(std::ostream& out, std::span<const Template> templates);
std::vector<Template> read_templates(std::istream& in);
void save_templates(const std::filesystem::path& path, std::span<const Template> templates);
std::vector<Template> load_templates(const std::filesystem::path& path);

enum class ReformulatorKind { Identity, Template, External };

std::string_view to_string(ReformulatorKind kind);
ReformulatorKind parse_reformulator_kind(std::string_view s);  // identity|template|external

struct ExternalEndpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:8090"
  std::string path = "/reformulate";
  std::chrono::milliseconds timeout{500};
};

struct Reformulation {
  std::string text;
  bool fallback = false;   // input returned because nothing applied or the call failed
  bool degraded = false;   // external call failed
  std::optional<std::size_t> template_index;
};

/// Query-to-question rewriting. reformulate() never returns empty text and
/// never throws; immutable and safe to share across threads.
class Reformulator {
 public:
  static Reformulator identity();
  static Reformulator from_templates(std::vector<Template> templates);
  static Reformulator external(ExternalEndpoint endpoint);

  ReformulatorKind kind() const noexcept { return kind_; }
  const std::vector<Template>& templates() const noexcept { return templates_; }

  Reformulation reformulate(std::string_view query) const;

  /// Best fill of one template for tokenized `query`, or nullopt when the
  /// template has more slots than tokens or a literal collides with the
  /// query. The score is the template's log prior plus, per slot, the
  /// log-likelihood ratio of its span against the pooled slot distribution.
  /// Each slot's counts are augmented with those of every other slot,
  /// weighted by the cosine similarity of their token distributions, so a
  /// rarely mined template still sees the vocabulary of its slot type.
  std::optional<std::pair<std::string, double>> fill(std::size_t template_index,
                                                     std::span<const std::string> tokens) const;

 private:
  Reformulation reformulate_template(std::string_view query) const;
  Reformulation reformulate_external(std::string_view query) const;
  using Counts = std::map<std::string, double>;
  // Slot statistics after borrowing from similar slots of every template.
  struct SmoothedSlot {
    Counts first, last, all;
    double fills = 0.0;
    double all_total = 0.0;
  };

  double token_log_prob(const Counts& counts, double total, const std::string& token) const;
  // Slot log-probability relative to the pooled slot distribution.
  double token_log_ratio(const Counts& counts, double total, const std::string& token) const;

  ReformulatorKind kind_ = ReformulatorKind::Identity;
  std::vector<Template> templates_;
  std::size_t total_support_ = 0;
  std::size_t vocabulary_ = 0;
  std::vector<std::vector<SmoothedSlot>> smoothed_;  // parallel to templates_[i].slots
  Counts background_;
  double background_total_ = 0.0;
  ExternalEndpoint endpoint_;
};

}  // namespace faqsearch
