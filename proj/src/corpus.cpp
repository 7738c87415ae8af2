#include "rfsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rfsum/rng.hpp"

namespace rfsum {

using nlohmann::json;

const char* drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::MissingBackground: return "MissingBackground";
    case DropReason::MissingFindings: return "MissingFindings";
    case DropReason::MissingImpression: return "MissingImpression";
    case DropReason::AmbiguousSections: return "AmbiguousSections";
    case DropReason::FindingsTooShort: return "FindingsTooShort";
    case DropReason::ImpressionTooShort: return "ImpressionTooShort";
  }
  return "Unknown";
}

std::optional<DropReason> filter_report(const Report& r) {
  if (static_cast<int>(r.findings.size()) < kMinFindingsTokens)
    return DropReason::FindingsTooShort;
  if (static_cast<int>(r.impression.size()) < kMinImpressionTokens)
    return DropReason::ImpressionTooShort;
  return std::nullopt;
}

Tokens tokenize(const std::string& text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c == '-' || c == '\'' || c == '_' ||
               c == '<' || c == '>') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      // punctuation becomes its own token
      flush();
      out.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  return out;
}

std::string detokenize(const Tokens& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

// Counts top-level object keys so duplicated section keys can be rejected;
// the DOM parser silently keeps only the last duplicate.
struct DupKeyScanner : json::json_sax_t {
  int depth = 0;
  std::map<std::string, int> top_keys;

  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_object(std::size_t) override {
    ++depth;
    return true;
  }
  bool key(string_t& k) override {
    if (depth == 1) ++top_keys[k];
    return true;
  }
  bool end_object() override {
    --depth;
    return true;
  }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::detail::exception&) override {
    return false;
  }
};

bool is_section(const std::string& key) {
  return key == "background" || key == "findings" || key == "impression";
}

Tokens read_section(const json& rec, const std::string& name) {
  if (!rec.contains(name)) throw MissingSection(name);
  const json& field = rec.at(name);
  Tokens toks;
  if (field.is_array()) {
    for (const auto& item : field) {
      if (!item.is_string())
        throw MalformedRecord("section \"" + name + "\" has a non-string token");
      toks.push_back(item.get<std::string>());
    }
  } else if (field.is_string()) {
    toks = tokenize(field.get<std::string>());
  } else {
    throw MalformedRecord("section \"" + name +
                          "\" must be an array of strings or a string");
  }
  if (toks.empty()) throw MissingSection(name);
  return toks;
}

}  // namespace

Report parse_report(const std::string& json_line) {
  DupKeyScanner scanner;
  if (!json::sax_parse(json_line, &scanner))
    throw MalformedRecord("invalid JSON");
  for (const auto& [key, count] : scanner.top_keys) {
    if (count > 1) {
      if (is_section(key)) throw AmbiguousSections("duplicate \"" + key + "\" section");
      throw MalformedRecord("duplicate key \"" + key + "\"");
    }
  }
  json rec = json::parse(json_line);
  if (!rec.is_object()) throw MalformedRecord("record is not a JSON object");
  Report r;
  if (!rec.contains("id") || !rec.at("id").is_string())
    throw MalformedRecord("missing string field \"id\"");
  r.id = rec.at("id").get<std::string>();
  if (rec.contains("body_part")) {
    if (!rec.at("body_part").is_string())
      throw MalformedRecord("field \"body_part\" must be a string");
    r.body_part = rec.at("body_part").get<std::string>();
  }
  r.background = read_section(rec, "background");
  r.findings = read_section(rec, "findings");
  r.impression = read_section(rec, "impression");
  return r;
}

std::string report_to_json(const Report& r) {
  json rec;
  rec["id"] = r.id;
  rec["body_part"] = r.body_part;
  rec["background"] = r.background;
  rec["findings"] = r.findings;
  rec["impression"] = r.impression;
  return rec.dump();
}

IngestResult ingest_corpus_text(const std::string& text) {
  IngestResult res;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string tag = "line " + std::to_string(lineno);
    Report r;
    try {
      r = parse_report(line);
    } catch (const MissingSection& e) {
      DropReason reason = DropReason::MissingBackground;
      if (std::string(e.what()) == "findings") reason = DropReason::MissingFindings;
      if (std::string(e.what()) == "impression") reason = DropReason::MissingImpression;
      res.ledger.dropped.emplace_back(tag, reason);
      continue;
    } catch (const AmbiguousSections&) {
      res.ledger.dropped.emplace_back(tag, DropReason::AmbiguousSections);
      continue;
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(tag + ": " + e.what());
    }
    if (auto reason = filter_report(r)) {
      res.ledger.dropped.emplace_back(r.id, *reason);
      continue;
    }
    res.ledger.kept_ids.push_back(r.id);
    res.ledger.kept_per_part[r.body_part.empty() ? "(unspecified)" : r.body_part]++;
    res.reports.push_back(std::move(r));
  }
  return res;
}

IngestResult ingest_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_corpus_text(buf.str());
}

std::vector<Report> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Report> reports;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      reports.push_back(parse_report(line));
    } catch (const Error& e) {
      throw MalformedRecord(path + " line " + std::to_string(lineno) + ": " +
                            e.what());
    }
  }
  return reports;
}

void write_corpus(const std::string& path, const std::vector<Report>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : reports) out << report_to_json(r) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

namespace {

// Largest-remainder apportionment of n items to the given fractions: every
// bucket ends within one of its exact quota.
std::vector<int> apportion(int n, const std::vector<double>& fracs) {
  std::vector<int> sizes(fracs.size());
  std::vector<std::pair<double, size_t>> rema;
  int assigned = 0;
  for (size_t i = 0; i < fracs.size(); ++i) {
    const double quota = n * fracs[i];
    sizes[i] = static_cast<int>(std::floor(quota));
    assigned += sizes[i];
    rema.emplace_back(quota - sizes[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < n - assigned; ++i) sizes[rema[i % rema.size()].second]++;
  return sizes;
}

}  // namespace

CorpusSplit split_corpus(const std::vector<Report>& reports, double train_frac,
                         double dev_frac, double test_frac, std::uint64_t seed) {
  if (std::fabs(train_frac + dev_frac + test_frac - 1.0) > 1e-9)
    throw InvalidArgument("split fractions must sum to 1");
  if (reports.empty()) throw EmptyCorpus("no reports to split");
  std::vector<size_t> order(reports.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const int n = static_cast<int>(reports.size());
  auto sizes = apportion(n, {train_frac, dev_frac, test_frac});
  CorpusSplit split;
  int pos = 0;
  for (int i = 0; i < sizes[0]; ++i) split.train.push_back(reports[order[pos++]]);
  for (int i = 0; i < sizes[1]; ++i) split.dev.push_back(reports[order[pos++]]);
  for (int i = 0; i < sizes[2]; ++i) split.test.push_back(reports[order[pos++]]);
  return split;
}

CorpusSplit holdout_body_part(const std::vector<Report>& reports,
                              const std::string& part, double dev_fraction,
                              std::uint64_t seed) {
  CorpusSplit split;
  std::vector<Report> remainder;
  for (const auto& r : reports) {
    if (r.body_part == part)
      split.test.push_back(r);
    else
      remainder.push_back(r);
  }
  if (split.test.empty()) throw UnknownBodyPart(part);
  std::vector<size_t> order(remainder.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  auto sizes = apportion(static_cast<int>(remainder.size()),
                         {1.0 - dev_fraction, dev_fraction});
  int pos = 0;
  for (int i = 0; i < sizes[0]; ++i) split.train.push_back(remainder[order[pos++]]);
  for (int i = 0; i < sizes[1]; ++i) split.dev.push_back(remainder[order[pos++]]);
  return split;
}

std::vector<Report> cap_per_body_part(const std::vector<Report>& reports,
                                      int cap, std::uint64_t seed) {
  if (cap <= 0) return reports;
  // choose a random keep-set per part, then emit in original order
  std::map<std::string, std::vector<size_t>> by_part;
  for (size_t i = 0; i < reports.size(); ++i)
    by_part[reports[i].body_part].push_back(i);
  std::vector<bool> keep(reports.size(), false);
  Rng rng(seed);
  for (auto& [part, idxs] : by_part) {
    rng.shuffle(idxs);
    for (size_t i = 0; i < idxs.size() && i < static_cast<size_t>(cap); ++i)
      keep[idxs[i]] = true;
  }
  std::vector<Report> out;
  for (size_t i = 0; i < reports.size(); ++i)
    if (keep[i]) out.push_back(reports[i]);
  return out;
}

namespace {
const char* kReservedTokens[] = {"<pad>", "<unk>", "<sos>", "<eos>"};
}

Vocabulary::Vocabulary() {
  for (const char* tok : kReservedTokens) {
    ids_[tok] = static_cast<int>(tokens_.size());
    tokens_.push_back(tok);
  }
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  ids_[token] = id;
  tokens_.push_back(token);
  return id;
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw IdOutOfRange("vocabulary id " + std::to_string(id) + " not in [0, " +
                       std::to_string(size()) + ")");
  return tokens_[id];
}

std::vector<int> Vocabulary::encode(const Tokens& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& t : tokens_) out << t << "\n";
  if (!out) throw IoError("write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    toks.push_back(line);
  }
  while (!toks.empty() && toks.back().empty()) toks.pop_back();
  return from_tokens(toks);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& all_tokens) {
  if (all_tokens.size() < kReserved)
    throw FormatError("vocabulary must start with the four reserved tokens");
  for (int i = 0; i < kReserved; ++i)
    if (all_tokens[i] != kReservedTokens[i])
      throw FormatError("reserved token line " + std::to_string(i) +
                        " must be " + kReservedTokens[i]);
  Vocabulary v;
  for (size_t i = kReserved; i < all_tokens.size(); ++i) {
    if (all_tokens[i].empty())
      throw FormatError("empty vocabulary line " + std::to_string(i));
    if (v.contains(all_tokens[i]))
      throw FormatError("duplicate vocabulary token " + all_tokens[i]);
    v.add(all_tokens[i]);
  }
  return v;
}

Vocabulary build_vocab(const std::vector<Report>& reports, int max_size,
                       int min_count) {
  std::map<std::string, long long> counts;
  for (const auto& r : reports) {
    for (const auto* section : {&r.background, &r.findings, &r.impression})
      for (const auto& tok : *section) ++counts[tok];
  }
  Vocabulary vocab;
  std::vector<std::pair<std::string, long long>> entries;
  for (auto& [tok, count] : counts) {
    if (count < min_count) continue;
    if (vocab.contains(tok)) continue;  // reserved literal used in text
    entries.emplace_back(tok, count);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, count] : entries) {
    if (vocab.size() >= max_size) break;
    vocab.add(tok);
  }
  return vocab;
}

namespace {

Tokens subst(std::initializer_list<const char*> tmpl, const std::string& part,
             const std::string& lat = "") {
  Tokens out;
  for (const char* w : tmpl) {
    std::string s = w;
    if (s == "<part>") s = part;
    else if (s == "<lat>") s = lat;
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<Report> generate_synthetic_corpus(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("synthetic corpus needs n >= 1");
  static const std::vector<std::string> parts = {
      "ankle", "knee", "wrist", "elbow", "shoulder", "hip", "foot", "hand"};
  static const std::vector<std::string> lats = {"left", "right"};
  static const std::vector<std::string> views = {"two", "three"};

  Rng rng(seed);
  std::vector<Report> reports;
  reports.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::string& part = rng.pick(parts);
    const std::string& lat = rng.pick(lats);
    const int condition = static_cast<int>(rng.index(4));
    const std::string age = std::to_string(20 + rng.index(60));
    const std::string& view = rng.pick(views);

    Report r;
    char idbuf[24];
    std::snprintf(idbuf, sizeof idbuf, "syn-%06d", i);
    r.id = idbuf;
    r.body_part = part;
    r.background = subst({"clinical", "history", ":", "<age>", "year", "old",
                          "patient", "with", "<lat>", "<part>", "pain", ".",
                          "comparison", ":", "none", ".", "views", ":",
                          "<views>", "."},
                         part, lat);
    for (auto& tok : r.background) {
      if (tok == "<age>") tok = age;
      if (tok == "<views>") tok = view;
    }
    switch (condition) {
      case 0:
        r.findings = subst({"the", "<part>", "joint", "spaces", "are", "well",
                            "maintained", ".", "no", "acute", "fracture", "or",
                            "dislocation", "is", "identified", ".", "soft",
                            "tissues", "are", "unremarkable", "."},
                           part);
        r.impression = subst({"normal", "<lat>", "<part>", "radiographs", "."},
                             part, lat);
        break;
      case 1:
        r.findings = subst({"there", "is", "an", "acute", "fracture",
                            "involving", "the", "distal", "<part>", ".",
                            "alignment", "is", "otherwise", "anatomic", ".",
                            "soft", "tissue", "swelling", "is", "present", "."},
                           part);
        r.impression = subst(
            {"acute", "fracture", "of", "the", "<lat>", "<part>", "."}, part, lat);
        break;
      case 2:
        r.findings = subst({"a", "moderate", "joint", "effusion", "is",
                            "present", "in", "the", "<part>", ".", "no",
                            "acute", "fracture", "is", "seen", ".", "bony",
                            "mineralization", "is", "normal", "."},
                           part);
        r.impression = subst(
            {"joint", "effusion", "of", "the", "<lat>", "<part>", "."}, part, lat);
        break;
      default:
        r.findings = subst({"there", "are", "degenerative", "changes", "of",
                            "the", "<part>", "with", "joint", "space",
                            "narrowing", ".", "no", "acute", "fracture", "is",
                            "identified", ".", "osteophytes", "are", "noted",
                            "."},
                           part);
        r.impression = subst(
            {"degenerative", "changes", "of", "the", "<lat>", "<part>", "."},
            part, lat);
        break;
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace rfsum
