#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "assoc/ingest.hpp"

namespace assoc {

class WikiClient;
class LlmClient;

// Spell-check interface: word -> accepted.
class Lexicon {
 public:
  virtual ~Lexicon() = default;
  virtual bool accepts(std::string_view word) const = 0;
  virtual bool empty() const = 0;

  // A phrase passes when each of its space-separated words is accepted.
  bool accepts_phrase(std::string_view phrase) const;
};

// Exact-match word list; one word per line, UTF-8.
class WordListLexicon : public Lexicon {
 public:
  WordListLexicon() = default;
  explicit WordListLexicon(std::unordered_set<std::string> words) : words_(std::move(words)) {}
  static WordListLexicon load(const std::filesystem::path& path);

  bool accepts(std::string_view word) const override { return words_.count(std::string(word)) > 0; }
  bool empty() const override { return words_.empty(); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// ---------------------------------------------------------------------------
// Participant exclusion

// Thresholds in whole percent. A participant is excluded when
//   multi-word responses   > max_multiword_pct   of their response tokens,
//   repeated responses     > max_repeat_pct      of their response tokens,
//   lexicon-passing tokens < min_spell_pass_pct  of their response tokens,
//   unknown/missing slots  > max_missing_pct     of all their response slots.
struct FilterThresholds {
  int max_multiword_pct = 30;
  int max_repeat_pct = 20;
  int min_spell_pass_pct = 60;
  int max_missing_pct = 60;
};

enum class Criterion { multiword, repeats, spell_check, missing };
inline constexpr std::size_t kCriterionCount = 4;
const char* to_string(Criterion c);

struct ParticipantQuality {
  std::string participant_id;
  std::int64_t n_trials = 0;
  std::int64_t n_slots = 0;
  std::int64_t n_tokens = 0;  // response slots with non-empty cleaned text
  std::int64_t n_multiword = 0;
  std::int64_t n_repeats = 0;
  std::int64_t n_spell_pass = 0;
  std::int64_t n_missing = 0;  // unknown_word, no_more_responses, missing, or empty after cleaning
  std::array<bool, kCriterionCount> failed{};

  bool retained() const { return !failed[0] && !failed[1] && !failed[2] && !failed[3]; }
};

struct FilterReport {
  std::int64_t total_participants = 0;
  std::int64_t total_trials = 0;
  std::array<std::int64_t, kCriterionCount> excluded_by_criterion{};
  std::array<std::int64_t, kCriterionCount> trials_by_criterion{};
  std::int64_t excluded_participants = 0;  // union over criteria
  std::int64_t retained_participants = 0;
  std::int64_t retained_trials = 0;

  double criterion_fraction(Criterion c) const;
  double retained_participant_fraction() const;
  double retained_trial_fraction() const;
};

struct FilterResult {
  std::vector<ParticipantRecord> participants;
  std::vector<TrialRecord> trials;
  std::vector<ParticipantQuality> quality;  // one per input participant, input order
  FilterReport report;
};

ParticipantQuality assess_participant(const std::string& participant_id,
                                      const std::vector<const TrialRecord*>& trials, const Lexicon& lexicon,
                                      const FilterThresholds& thresholds = {});

FilterResult filter_participants(const std::vector<TrialRecord>& trials,
                                 const std::vector<ParticipantRecord>& participants, const Lexicon& lexicon,
                                 const FilterThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Spelling normalization

std::string clean_text(std::string_view raw);

inline constexpr std::size_t kMaxVariants = 64;

// Umlaut (ae/oe/ue <-> ä/ö/ü), sharp-s (ss <-> ß) and casing variants of a
// cleaned word. The input comes first; order is deterministic; at most
// `cap` strings are returned.
std::vector<std::string> orthographic_variants(std::string_view word, std::size_t cap = kMaxVariants);

enum class Stage { whitelisted_raw, variant_normalized, wikipedia, llm_corrected, unresolved };
const char* to_string(Stage s);
Stage parse_stage(std::string_view s);

struct NormalizedResponse {
  std::string raw_text;
  std::string final_text;
  Stage stage = Stage::unresolved;
  bool whitelisted = false;
  std::string note;  // client errors, review flags
};

// Identifies one response slot of a trial list.
struct SlotRef {
  std::size_t trial = 0;
  std::size_t position = 0;
};

struct StageReport {
  std::int64_t total = 0;  // response tokens considered
  std::array<std::int64_t, 5> resolved_by_stage{};  // indexed by Stage
  std::int64_t client_errors = 0;

  // Fraction whitelisted after each of the four stages; non-decreasing.
  std::array<double, 4> cumulative_fractions() const;
};

struct WhitelistOptions {
  std::size_t max_in_flight = 4;
};

struct WhitelistResult {
  std::vector<SlotRef> slots;                  // response slots, trial order
  std::vector<NormalizedResponse> responses;   // aligned with slots
  StageReport report;
};

// Resolves each marker=response slot at the first accepting stage:
// lexicon, orthographic variant, Wikipedia title, LLM correction.
// Null clients skip their stage. Client failures leave a note and fall
// through; the pipeline never throws for them.
WhitelistResult whitelist_pipeline(const std::vector<TrialRecord>& trials, const Lexicon& lexicon,
                                   WikiClient* wiki, LlmClient* llm, const WhitelistOptions& options = {});

// Copies `trials` with each response text replaced by its final text.
// Unresolved responses keep their cleaned text unless `drop_unresolved`,
// in which case the slot becomes marker=missing. Slots cleaned to nothing
// become marker=missing.
std::vector<TrialRecord> apply_normalization(const std::vector<TrialRecord>& trials,
                                             const WhitelistResult& result, bool drop_unresolved = false);

// Exact-match accuracy after clean_text on both sides.
double score_correction_accuracy(const std::vector<std::pair<std::string, std::string>>& corrections);

struct GoldCorrection {
  std::string cue;
  std::string raw;
  std::string gold;
};

// TSV with header "cue<TAB>raw<TAB>gold".
std::vector<GoldCorrection> load_gold_corrections(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Cue balancing

struct BalanceConfig {
  std::int64_t min_trials_per_cue = 55;
  std::int64_t sample_size = 55;
  std::uint64_t rng_seed = 0;
};

struct BalanceReport {
  std::int64_t cues_in = 0;
  std::int64_t cues_dropped = 0;
  std::int64_t cues_retained = 0;
  std::int64_t trials_in = 0;
  std::int64_t trials_removed_dropped_cues = 0;
  std::int64_t trials_removed_sampling = 0;
  std::int64_t trials_out = 0;
  std::vector<std::string> dropped_cues;

  double dropped_cue_fraction() const;
  double removed_trial_fraction() const;
};

struct BalanceResult {
  std::vector<TrialRecord> trials;  // input order preserved
  BalanceReport report;
};

// Each cue draws from its own stream seeded by (rng_seed, cue), so the
// sample of one cue does not depend on which other cues are present.
BalanceResult balance_cues(const std::vector<TrialRecord>& trials, const BalanceConfig& config);

}  // namespace assoc
