#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fuzzloc/store.hpp"
#include "json.hpp"

namespace fuzzloc::dedup {

struct SubscriberRecord {
  long row_id = 0;
  std::string name;
  std::string email;
  std::string phone;
  std::string company;
  std::string street;
  std::string la;

  bool all_empty() const {
    return name.empty() && email.empty() && phone.empty() && company.empty() &&
           street.empty();
  }
};

// Suffix/nickname knowledge shipped as data files, one group per line,
// canonical token first.
class SynonymTable {
 public:
  static SynonymTable parse(const std::string& content);
  static SynonymTable load(const std::string& path);

  // canonical token for `word`, or `word` itself when unmapped
  const std::string& canonical(const std::string& word) const;
  // true when both words resolve to the same canonical token
  bool same_group(const std::string& a, const std::string& b) const;

 private:
  std::map<std::string, std::string> canonical_;
};

struct MatchTables {
  SynonymTable nicknames;
  SynonymTable company_suffixes;
  SynonymTable street_suffixes;

  static MatchTables load(const std::string& directory);
};

// Lowercase, strip punctuation, collapse whitespace, canonicalize
// company/street suffix tokens, reduce phones to digits (leading country
// code 1 dropped from 11-digit numbers).
SubscriberRecord normalize(const SubscriberRecord& r, const MatchTables& tables);

std::string normalize_text(const std::string& text);
std::string normalize_phone(const std::string& text);

// American Soundex, 4-character code; empty input gives empty code.
std::string soundex(const std::string& word);

std::size_t levenshtein(const std::string& a, const std::string& b);

struct SimilarityScore {
  std::optional<double> name_edit;
  std::optional<double> name_phonetic;
  std::optional<double> nickname;
  std::optional<double> email_local;
  std::optional<double> phone;
  std::optional<double> company;
  std::optional<double> street;
  double combined = 0.0;
};

// Optional per-component weights; combined is the weighted mean over
// components whose underlying fields are present on both records.
struct Weights {
  double name_edit = 1, name_phonetic = 1, nickname = 1, email_local = 1,
         phone = 1, company = 1, street = 1;
};

// Both records must already be normalized. Throws SemanticError when both
// records have no comparable fields.
SimilarityScore similarity(const SubscriberRecord& a, const SubscriberRecord& b,
                           const MatchTables& tables,
                           const Weights& weights = {});

struct DuplicateGroup {
  std::vector<long> members;  // ascending row ids, size >= 2
  double min_pair_score = 1.0;
  long primary = 0;  // lowest row id
};

struct GroupingOptions {
  // All-pairs scoring below this size; blocking above. force_blocking
  // overrides for tests and benchmarks.
  std::size_t blocking_min_records = 1000;
  bool force_blocking = false;
  Weights weights;
};

std::vector<DuplicateGroup> find_duplicate_groups(
    const std::vector<SubscriberRecord>& records, double threshold,
    const MatchTables& tables, const GroupingOptions& options = {});

struct FieldChange {
  std::string field;
  long source_row;
  std::string old_value;
  std::string new_value;
};

struct MergeResult {
  SubscriberRecord merged;
  std::vector<FieldChange> history;
};

// Primary (lowest id) wins on every nonempty field; empty fields fill from
// the first nonempty value by ascending row id. Adoptions are recorded.
MergeResult merge_group(const DuplicateGroup& g,
                        const std::vector<SubscriberRecord>& records);

// Extraction from the subscriber CSV; phone falls back to the `mobile`
// column when no `phone` column exists.
std::vector<SubscriberRecord> records_from_table(const store::CsvTable& table);

nlohmann::json groups_to_json(const std::vector<DuplicateGroup>& groups);
nlohmann::json merge_report_to_json(const std::vector<MergeResult>& merges);

}  // namespace fuzzloc::dedup
