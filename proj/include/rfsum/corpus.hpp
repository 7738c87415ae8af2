#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rfsum/errors.hpp"

namespace rfsum {

using Tokens = std::vector<std::string>;

// One radiology report: background gives exam context, findings is the
// summarization source, impression is the reference summary.
struct Report {
  std::string id;
  std::string body_part;
  Tokens background;
  Tokens findings;
  Tokens impression;
};

// Filtering thresholds for keepable reports.
constexpr int kMinFindingsTokens = 10;
constexpr int kMinImpressionTokens = 2;

enum class DropReason {
  MissingBackground,
  MissingFindings,
  MissingImpression,
  AmbiguousSections,
  FindingsTooShort,
  ImpressionTooShort,
};
const char* drop_reason_name(DropReason r);

// Keep/drop decision; empty optional means keep. Findings length is checked
// before impression length.
std::optional<DropReason> filter_report(const Report& r);

// Lowercases, splits on whitespace, and detaches punctuation into its own
// tokens. Placeholder tokens like <date> survive intact.
Tokens tokenize(const std::string& text);
std::string detokenize(const Tokens& tokens);

// One JSONL record -> Report. Section fields may be arrays of pre-tokenized
// strings (canonical) or a single string (tokenized here). Throws
// MissingSection for absent/empty sections, AmbiguousSections for duplicated
// section keys, MalformedRecord for everything structurally wrong.
Report parse_report(const std::string& json_line);
std::string report_to_json(const Report& r);

struct IngestLedger {
  std::vector<std::string> kept_ids;
  std::vector<std::pair<std::string, DropReason>> dropped;  // record tag + reason
  std::map<std::string, int> kept_per_part;
  int kept() const { return static_cast<int>(kept_ids.size()); }
  int total() const { return kept() + static_cast<int>(dropped.size()); }
};

struct IngestResult {
  std::vector<Report> reports;
  IngestLedger ledger;
};

// Lenient corpus read: section-level problems become ledger drops, invalid
// JSON aborts with MalformedRecord carrying the 1-based line number.
IngestResult ingest_corpus_text(const std::string& text);
IngestResult ingest_corpus_file(const std::string& path);

// Strict canonical-corpus IO for already-filtered data.
std::vector<Report> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<Report>& reports);

struct CorpusSplit {
  std::vector<Report> train;
  std::vector<Report> dev;
  std::vector<Report> test;
};

// Deterministic shuffled split; each split size is within one report of its
// exact proportion (largest-remainder apportionment).
CorpusSplit split_corpus(const std::vector<Report>& reports, double train_frac,
                         double dev_frac, double test_frac, std::uint64_t seed);

// Reserves every report with the given body part as test; splits the rest
// into train/dev at (1 - dev_fraction, dev_fraction).
CorpusSplit holdout_body_part(const std::vector<Report>& reports,
                              const std::string& part, double dev_fraction,
                              std::uint64_t seed);

// Randomly caps the number of reports per body part, keeping original order.
std::vector<Report> cap_per_body_part(const std::vector<Report>& reports,
                                      int cap, std::uint64_t seed);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;

  Vocabulary();  // reserved tokens only

  // Appends the token if new; returns its id either way.
  int add(const std::string& token);
  bool contains(const std::string& token) const;
  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;  // IdOutOfRange when invalid
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const Tokens& tokens) const;
  std::uint64_t hash() const;  // FNV-1a over tokens in id order

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  static Vocabulary from_tokens(const std::vector<std::string>& all_tokens);
  const std::vector<std::string>& all_tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Frequency-ordered vocabulary over all three sections; ties broken by
// lexicographic order; max_size includes the four reserved entries.
Vocabulary build_vocab(const std::vector<Report>& reports, int max_size = 50000,
                       int min_count = 1);

// Desk-scale corpus where the laterality token appears only in background and
// impression, never in findings, so recovering it requires the background.
std::vector<Report> generate_synthetic_corpus(int n, std::uint64_t seed);

}  // namespace rfsum
