#include "fuzzloc/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>

#include "fuzzloc/errors.hpp"
#include "fuzzloc/io.hpp"

namespace fuzzloc::dedup {

namespace {

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

SynonymTable SynonymTable::parse(const std::string& content) {
  SynonymTable table;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    for (const auto& tok : tokens) table.canonical_[tok] = tokens.front();
  }
  return table;
}

SynonymTable SynonymTable::load(const std::string& path) {
  return parse(io::read_file(path));
}

const std::string& SynonymTable::canonical(const std::string& word) const {
  auto it = canonical_.find(word);
  return it == canonical_.end() ? word : it->second;
}

bool SynonymTable::same_group(const std::string& a, const std::string& b) const {
  return canonical(a) == canonical(b);
}

MatchTables MatchTables::load(const std::string& directory) {
  return MatchTables{SynonymTable::load(directory + "/nicknames.txt"),
                     SynonymTable::load(directory + "/company_suffixes.txt"),
                     SynonymTable::load(directory + "/street_suffixes.txt")};
}

std::string normalize_text(const std::string& text) {
  std::string out;
  bool last_space = true;
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
      last_space = false;
    } else if (!last_space) {
      out += ' ';
      last_space = true;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string normalize_phone(const std::string& text) {
  std::string digits;
  for (char c : text)
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  if (digits.size() == 11 && digits.front() == '1') digits.erase(0, 1);
  return digits;
}

namespace {

// Emails keep their '@' and dots; only case and whitespace are normalized so
// the local part stays recoverable.
std::string normalize_email(const std::string& text) {
  std::string out;
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string normalize_with_suffixes(const std::string& text,
                                    const SynonymTable& suffixes) {
  auto tokens = split_tokens(normalize_text(text));
  for (auto& tok : tokens) tok = suffixes.canonical(tok);
  return join_tokens(tokens);
}

}  // namespace

SubscriberRecord normalize(const SubscriberRecord& r,
                           const MatchTables& tables) {
  SubscriberRecord out;
  out.row_id = r.row_id;
  out.name = normalize_text(r.name);
  out.email = normalize_email(r.email);
  out.phone = normalize_phone(r.phone);
  out.company = normalize_with_suffixes(r.company, tables.company_suffixes);
  out.street = normalize_with_suffixes(r.street, tables.street_suffixes);
  out.la = normalize_text(r.la);
  return out;
}

std::string soundex(const std::string& word) {
  auto code_of = [](char c) -> char {
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'b': case 'f': case 'p': case 'v': return '1';
      case 'c': case 'g': case 'j': case 'k':
      case 'q': case 's': case 'x': case 'z': return '2';
      case 'd': case 't': return '3';
      case 'l': return '4';
      case 'm': case 'n': return '5';
      case 'r': return '6';
      default: return 0;  // vowels, h, w, y, non-letters
    }
  };
  std::string letters;
  for (char c : word)
    if (std::isalpha(static_cast<unsigned char>(c))) letters += c;
  if (letters.empty()) return "";

  std::string out(1, static_cast<char>(
                         std::toupper(static_cast<unsigned char>(letters[0]))));
  char prev_code = code_of(letters[0]);
  for (std::size_t i = 1; i < letters.size() && out.size() < 4; ++i) {
    const char lower = static_cast<char>(
        std::tolower(static_cast<unsigned char>(letters[i])));
    const char code = code_of(letters[i]);
    if (lower == 'h' || lower == 'w') continue;  // transparent to adjacency
    if (code == 0) {
      prev_code = 0;  // vowel separates equal codes
      continue;
    }
    if (code != prev_code) out += code;
    prev_code = code;
  }
  while (out.size() < 4) out += '0';
  return out;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

double edit_similarity(const std::string& a, const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(longest);
}

std::string swapped_name(const std::string& name) {
  auto tokens = split_tokens(name);
  std::reverse(tokens.begin(), tokens.end());
  return join_tokens(tokens);
}

std::string first_token(const std::string& text) {
  const auto tokens = split_tokens(text);
  return tokens.empty() ? "" : tokens.front();
}

std::string last_token(const std::string& text) {
  const auto tokens = split_tokens(text);
  return tokens.empty() ? "" : tokens.back();
}

std::string email_local_part(const std::string& email) {
  const auto at = email.find('@');
  return at == std::string::npos ? email : email.substr(0, at);
}

bool name_tokens_in_local(const std::string& name, const std::string& local) {
  for (const auto& tok : split_tokens(name)) {
    if (tok.size() < 2) continue;
    if (local.find(tok) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

SimilarityScore similarity(const SubscriberRecord& a, const SubscriberRecord& b,
                           const MatchTables& tables, const Weights& weights) {
  if (a.all_empty() && b.all_empty())
    throw SemanticError("no comparable fields");

  SimilarityScore score;
  if (!a.name.empty() && !b.name.empty()) {
    // Field-swap check: also score against the token-reversed name.
    score.name_edit = std::max(edit_similarity(a.name, b.name),
                               edit_similarity(a.name, swapped_name(b.name)));
    score.name_phonetic =
        soundex(last_token(a.name)) == soundex(last_token(b.name)) ? 1.0 : 0.0;
    score.nickname =
        tables.nicknames.same_group(first_token(a.name), first_token(b.name))
            ? 1.0
            : 0.0;
  }
  if (!a.email.empty() && !b.email.empty()) {
    const std::string la = email_local_part(a.email);
    const std::string lb = email_local_part(b.email);
    const bool equal_emails = a.email == b.email;
    const bool containment = name_tokens_in_local(a.name, lb) ||
                             name_tokens_in_local(b.name, la);
    score.email_local = (equal_emails || containment) ? 1.0 : 0.0;
  }
  if (!a.phone.empty() && !b.phone.empty())
    score.phone = a.phone == b.phone ? 1.0 : 0.0;
  if (!a.company.empty() && !b.company.empty())
    score.company = edit_similarity(a.company, b.company);
  if (!a.street.empty() && !b.street.empty())
    score.street = edit_similarity(a.street, b.street);

  double weighted = 0.0, total_weight = 0.0;
  auto fold = [&](const std::optional<double>& component, double weight) {
    if (component && weight > 0.0) {
      weighted += *component * weight;
      total_weight += weight;
    }
  };
  fold(score.name_edit, weights.name_edit);
  fold(score.name_phonetic, weights.name_phonetic);
  fold(score.nickname, weights.nickname);
  fold(score.email_local, weights.email_local);
  fold(score.phone, weights.phone);
  fold(score.company, weights.company);
  fold(score.street, weights.street);
  score.combined = total_weight > 0.0 ? weighted / total_weight : 0.0;
  return score;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<DuplicateGroup> find_duplicate_groups(
    const std::vector<SubscriberRecord>& records, double threshold,
    const MatchTables& tables, const GroupingOptions& options) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw SemanticError("threshold must lie in (0,1]");

  std::vector<SubscriberRecord> norm;
  norm.reserve(records.size());
  for (const auto& r : records) norm.push_back(normalize(r, tables));

  const bool use_blocking =
      options.force_blocking || norm.size() > options.blocking_min_records;

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  if (use_blocking) {
    std::map<std::string, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < norm.size(); ++i) {
      const std::string code = soundex(last_token(norm[i].name));
      if (!code.empty()) blocks["s:" + code].push_back(i);
      if (!norm[i].phone.empty()) blocks["p:" + norm[i].phone].push_back(i);
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [_, members] : blocks)
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
          seen.insert({std::min(members[i], members[j]),
                       std::max(members[i], members[j])});
    candidates.assign(seen.begin(), seen.end());
  } else {
    for (std::size_t i = 0; i < norm.size(); ++i)
      for (std::size_t j = i + 1; j < norm.size(); ++j)
        candidates.push_back({i, j});
  }

  UnionFind uf(norm.size());
  for (const auto& [i, j] : candidates) {
    if (norm[i].all_empty() || norm[j].all_empty()) continue;
    if (similarity(norm[i], norm[j], tables, options.weights).combined >=
        threshold)
      uf.unite(i, j);
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < norm.size(); ++i)
    components[uf.find(i)].push_back(i);

  std::vector<DuplicateGroup> groups;
  for (const auto& [_, members] : components) {
    if (members.size() < 2) continue;
    DuplicateGroup group;
    for (std::size_t idx : members) group.members.push_back(norm[idx].row_id);
    std::sort(group.members.begin(), group.members.end());
    group.primary = group.members.front();
    group.min_pair_score = 1.0;
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        group.min_pair_score = std::min(
            group.min_pair_score,
            similarity(norm[members[i]], norm[members[j]], tables,
                       options.weights)
                .combined);
    groups.push_back(std::move(group));
  }
  std::sort(groups.begin(), groups.end(),
            [](const DuplicateGroup& a, const DuplicateGroup& b) {
              return a.members.front() < b.members.front();
            });
  return groups;
}

MergeResult merge_group(const DuplicateGroup& g,
                        const std::vector<SubscriberRecord>& records) {
  auto by_id = [&](long row_id) -> const SubscriberRecord* {
    for (const auto& r : records)
      if (r.row_id == row_id) return &r;
    return nullptr;
  };
  const SubscriberRecord* primary = by_id(g.primary);
  if (primary == nullptr)
    throw SemanticError("merge group references unknown primary row " +
                        std::to_string(g.primary));

  MergeResult result;
  result.merged = *primary;
  result.merged.row_id = primary->row_id;

  struct Field {
    const char* label;
    std::string SubscriberRecord::* member;
  };
  static const Field kFields[] = {
      {"name", &SubscriberRecord::name},     {"email", &SubscriberRecord::email},
      {"phone", &SubscriberRecord::phone},   {"company", &SubscriberRecord::company},
      {"street", &SubscriberRecord::street}, {"la", &SubscriberRecord::la}};

  for (const Field& field : kFields) {
    for (long member_id : g.members) {
      if (member_id == g.primary) continue;
      const SubscriberRecord* donor = by_id(member_id);
      if (donor == nullptr)
        throw SemanticError("merge group references unknown row " +
                            std::to_string(member_id));
      const std::string& donor_value = donor->*(field.member);
      if (donor_value.empty()) continue;
      std::string& merged_value = result.merged.*(field.member);
      if (merged_value.empty()) {
        result.history.push_back(
            {field.label, member_id, "", donor_value});
        merged_value = donor_value;
      } else if (merged_value != donor_value) {
        // conflicting value loses to what the merged record already holds
        result.history.push_back(
            {field.label, member_id, donor_value, merged_value});
      }
    }
  }
  return result;
}

std::vector<SubscriberRecord> records_from_table(const store::CsvTable& table) {
  auto col = [&](const char* name) { return table.column_index(name); };
  const auto name_col = col("subscriber_name") ? col("subscriber_name") : col("name");
  const auto email_col = col("email");
  const auto phone_col = col("phone") ? col("phone") : col("mobile");
  const auto company_col = col("company");
  const auto street_col = col("street");
  const auto la_col = col("la");

  std::vector<SubscriberRecord> records;
  records.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    SubscriberRecord rec;
    rec.row_id = static_cast<long>(r);
    if (name_col) rec.name = table.cell(r, *name_col);
    if (email_col) rec.email = table.cell(r, *email_col);
    if (phone_col) rec.phone = table.cell(r, *phone_col);
    if (company_col) rec.company = table.cell(r, *company_col);
    if (street_col) rec.street = table.cell(r, *street_col);
    if (la_col) rec.la = table.cell(r, *la_col);
    records.push_back(std::move(rec));
  }
  return records;
}

nlohmann::json groups_to_json(const std::vector<DuplicateGroup>& groups) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : groups)
    out.push_back({{"members", g.members},
                   {"min_pair_score", g.min_pair_score},
                   {"primary", g.primary}});
  return {{"groups", out}};
}

nlohmann::json merge_report_to_json(const std::vector<MergeResult>& merges) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : merges) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : m.history)
      history.push_back({{"field", h.field},
                         {"source_row", h.source_row},
                         {"old", h.old_value},
                         {"new", h.new_value}});
    out.push_back({{"primary", m.merged.row_id},
                   {"merged",
                    {{"name", m.merged.name},
                     {"email", m.merged.email},
                     {"phone", m.merged.phone},
                     {"company", m.merged.company},
                     {"street", m.merged.street},
                     {"la", m.merged.la}}},
                   {"history", history}});
  }
  return {{"merges", out}};
}

}  // namespace fuzzloc::dedup
