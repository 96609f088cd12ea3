#include "assoc/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "assoc/clients.hpp"
#include "assoc/error.hpp"
#include "assoc/parallel.hpp"
#include "assoc/rng.hpp"
#include "assoc/text.hpp"

namespace assoc {

bool Lexicon::accepts_phrase(std::string_view phrase) const {
  if (phrase.empty()) return false;
  for (const auto& word : text::split(phrase, ' '))
    if (word.empty() || !accepts(word)) return false;
  return true;
}

WordListLexicon WordListLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = text::trim(line);
    if (!w.empty()) words.emplace(w);
  }
  return WordListLexicon(std::move(words));
}

std::string clean_text(std::string_view raw) { return text::clean_text(raw); }

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::multiword: return "multiword";
    case Criterion::repeats: return "repeats";
    case Criterion::spell_check: return "spell_check";
    case Criterion::missing: return "missing";
  }
  return "";
}

double FilterReport::criterion_fraction(Criterion c) const {
  if (total_participants == 0) return 0.0;
  return static_cast<double>(excluded_by_criterion[static_cast<std::size_t>(c)]) /
         static_cast<double>(total_participants);
}

double FilterReport::retained_participant_fraction() const {
  return total_participants ? static_cast<double>(retained_participants) / static_cast<double>(total_participants)
                            : 0.0;
}

double FilterReport::retained_trial_fraction() const {
  return total_trials ? static_cast<double>(retained_trials) / static_cast<double>(total_trials) : 0.0;
}

ParticipantQuality assess_participant(const std::string& participant_id,
                                      const std::vector<const TrialRecord*>& trials, const Lexicon& lexicon,
                                      const FilterThresholds& th) {
  ParticipantQuality q;
  q.participant_id = participant_id;
  q.n_trials = static_cast<std::int64_t>(trials.size());
  std::unordered_set<std::string> seen;
  for (const auto* t : trials) {
    for (const auto& slot : t->responses) {
      ++q.n_slots;
      if (!slot.is_response()) {
        ++q.n_missing;
        continue;
      }
      const auto cleaned = text::clean_text(slot.raw_text);
      if (cleaned.empty()) {
        ++q.n_missing;
        continue;
      }
      ++q.n_tokens;
      if (text::contains_space(cleaned)) ++q.n_multiword;
      if (!seen.insert(text::lowercase(cleaned)).second) ++q.n_repeats;
      if (lexicon.accepts_phrase(cleaned)) ++q.n_spell_pass;
    }
  }
  // Integer comparisons keep the thresholds exact.
  q.failed[0] = q.n_multiword * 100 > th.max_multiword_pct * q.n_tokens;
  q.failed[1] = q.n_repeats * 100 > th.max_repeat_pct * q.n_tokens;
  q.failed[2] = q.n_tokens > 0 && q.n_spell_pass * 100 < th.min_spell_pass_pct * q.n_tokens;
  q.failed[3] = q.n_missing * 100 > th.max_missing_pct * q.n_slots;
  return q;
}

FilterResult filter_participants(const std::vector<TrialRecord>& trials,
                                 const std::vector<ParticipantRecord>& participants, const Lexicon& lexicon,
                                 const FilterThresholds& thresholds) {
  if (lexicon.empty()) throw ConfigError("filter_participants: empty lexicon (spell-check criterion undefined)");

  std::unordered_map<std::string, std::vector<const TrialRecord*>> by_participant;
  std::unordered_set<std::string> known;
  for (const auto& p : participants) known.insert(p.participant_id);
  for (const auto& t : trials) {
    if (!known.count(t.participant_id))
      throw DataError("trial references unknown participant '" + t.participant_id + "'");
    by_participant[t.participant_id].push_back(&t);
  }

  FilterResult result;
  auto& rep = result.report;
  rep.total_participants = static_cast<std::int64_t>(participants.size());
  rep.total_trials = static_cast<std::int64_t>(trials.size());

  std::unordered_set<std::string> retained;
  for (const auto& p : participants) {
    const auto it = by_participant.find(p.participant_id);
    static const std::vector<const TrialRecord*> kNone;
    auto q = assess_participant(p.participant_id, it == by_participant.end() ? kNone : it->second, lexicon,
                                thresholds);
    for (std::size_t c = 0; c < kCriterionCount; ++c) {
      if (q.failed[c]) {
        ++rep.excluded_by_criterion[c];
        rep.trials_by_criterion[c] += q.n_trials;
      }
    }
    if (q.retained()) {
      retained.insert(p.participant_id);
      result.participants.push_back(p);
      ++rep.retained_participants;
      rep.retained_trials += q.n_trials;
    } else {
      ++rep.excluded_participants;
    }
    result.quality.push_back(std::move(q));
  }
  for (const auto& t : trials)
    if (retained.count(t.participant_id)) result.trials.push_back(t);
  return result;
}

// --- Orthographic variants --------------------------------------------------

namespace {

struct Site {
  std::u32string original;
  std::u32string alternative;
};

// Splits a word into fixed segments and substitution sites, left to right.
std::vector<std::pair<std::u32string, std::optional<Site>>> segment(const std::u32string& w) {
  std::vector<std::pair<std::u32string, std::optional<Site>>> parts;
  std::u32string fixed;
  auto flush = [&] {
    if (!fixed.empty()) parts.push_back({fixed, std::nullopt});
    fixed.clear();
  };
  auto umlaut_of = [](char32_t c) -> char32_t {
    switch (c) {
      case U'a': return U'ä';
      case U'o': return U'ö';
      case U'u': return U'ü';
      case U'A': return U'Ä';
      case U'O': return U'Ö';
      case U'U': return U'Ü';
      default: return 0;
    }
  };
  auto digraph_of = [](char32_t c) -> std::u32string {
    switch (c) {
      case U'ä': return U"ae";
      case U'ö': return U"oe";
      case U'ü': return U"ue";
      case U'Ä': return U"Ae";
      case U'Ö': return U"Oe";
      case U'Ü': return U"Ue";
      case U'ß': return U"ss";
      default: return {};
    }
  };
  std::size_t i = 0;
  while (i < w.size()) {
    const char32_t c = w[i];
    const char32_t next = i + 1 < w.size() ? w[i + 1] : 0;
    if (umlaut_of(c) && (next == U'e' || next == U'E')) {
      flush();
      parts.push_back({{}, Site{w.substr(i, 2), std::u32string(1, umlaut_of(c))}});
      i += 2;
    } else if (c == U's' && next == U's') {
      flush();
      parts.push_back({{}, Site{U"ss", U"ß"}});
      i += 2;
    } else if (auto d = digraph_of(c); !d.empty()) {
      flush();
      parts.push_back({{}, Site{std::u32string(1, c), d}});
      i += 1;
    } else {
      fixed.push_back(c);
      i += 1;
    }
  }
  flush();
  return parts;
}

}  // namespace

std::vector<std::string> orthographic_variants(std::string_view word, std::size_t cap) {
  std::vector<std::string> out;
  if (cap == 0) return out;
  const auto parts = segment(text::decode_utf8(word));
  const std::size_t n_sites = static_cast<std::size_t>(
      std::count_if(parts.begin(), parts.end(), [](const auto& p) { return p.second.has_value(); }));
  // Beyond 2^16 combinations the cap is always hit long before.
  const std::uint64_t n_masks = std::uint64_t{1} << std::min<std::size_t>(n_sites, 16);

  std::unordered_set<std::string> seen;
  auto emit = [&](std::string s) {
    if (out.size() < cap && seen.insert(s).second) out.push_back(std::move(s));
  };
  emit(std::string(word));

  // Casing outermost so that spelling-only changes are tried first.
  for (int casing = 0; casing < 3 && out.size() < cap; ++casing) {
    for (std::uint64_t mask = 0; mask < n_masks && out.size() < cap; ++mask) {
      std::u32string candidate;
      std::size_t site = 0;
      for (const auto& [fixed, s] : parts) {
        if (!s) {
          candidate += fixed;
          continue;
        }
        const bool flip = site < 64 && ((mask >> site) & 1U);
        candidate += flip ? s->alternative : s->original;
        ++site;
      }
      auto utf8 = text::encode_utf8(candidate);
      if (casing == 1) utf8 = text::lowercase(utf8);
      if (casing == 2) utf8 = text::capitalize(utf8);
      emit(std::move(utf8));
    }
  }
  return out;
}

// --- Whitelisting -----------------------------------------------------------

const char* to_string(Stage s) {
  switch (s) {
    case Stage::whitelisted_raw: return "whitelisted_raw";
    case Stage::variant_normalized: return "variant_normalized";
    case Stage::wikipedia: return "wikipedia";
    case Stage::llm_corrected: return "llm_corrected";
    case Stage::unresolved: return "unresolved";
  }
  return "";
}

Stage parse_stage(std::string_view s) {
  for (auto st : {Stage::whitelisted_raw, Stage::variant_normalized, Stage::wikipedia, Stage::llm_corrected,
                  Stage::unresolved})
    if (s == to_string(st)) return st;
  throw DataError("unknown stage '" + std::string(s) + "'");
}

std::array<double, 4> StageReport::cumulative_fractions() const {
  std::array<double, 4> out{};
  std::int64_t acc = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    acc += resolved_by_stage[k];
    out[k] = total ? static_cast<double>(acc) / static_cast<double>(total) : 0.0;
  }
  return out;
}

WhitelistResult whitelist_pipeline(const std::vector<TrialRecord>& trials, const Lexicon& lexicon,
                                   WikiClient* wiki, LlmClient* llm, const WhitelistOptions& options) {
  WhitelistResult result;
  for (std::size_t t = 0; t < trials.size(); ++t)
    for (std::size_t k = 0; k < 3; ++k)
      if (trials[t].responses[k].is_response()) result.slots.push_back({t, k});

  auto& out = result.responses;
  out.resize(result.slots.size());
  std::vector<std::string> cleaned(result.slots.size());
  for (std::size_t i = 0; i < result.slots.size(); ++i) {
    const auto& slot = trials[result.slots[i].trial].responses[result.slots[i].position];
    out[i].raw_text = slot.raw_text;
    cleaned[i] = text::clean_text(slot.raw_text);
    out[i].final_text = cleaned[i];
  }

  // Stages 1-3 depend only on the cleaned string; resolve each distinct one once.
  struct Resolution {
    Stage stage = Stage::unresolved;
    std::string text;
    std::string note;
  };
  std::map<std::string, Resolution> by_string;
  for (const auto& c : cleaned) by_string.try_emplace(c);

  std::vector<std::string> need_wiki;
  for (auto& [s, r] : by_string) {
    if (s.empty()) {
      r.note = "empty after cleaning";
      continue;
    }
    if (lexicon.accepts_phrase(s)) {
      r = {Stage::whitelisted_raw, s, {}};
      continue;
    }
    const auto variants = orthographic_variants(s);
    const auto hit = std::find_if(variants.begin() + 1, variants.end(),
                                  [&](const std::string& v) { return lexicon.accepts_phrase(v); });
    if (hit != variants.end()) {
      r = {Stage::variant_normalized, *hit, {}};
      continue;
    }
    if (wiki) need_wiki.push_back(s);
  }

  std::int64_t client_errors = 0;
  if (wiki) {
    std::vector<Resolution> found(need_wiki.size());
    parallel_for(need_wiki.size(), options.max_in_flight, [&](std::size_t i) {
      try {
        const auto res = wiki->lookup(need_wiki[i]);
        if (res.matched_title && !res.matched_title->empty()) found[i] = {Stage::wikipedia, *res.matched_title, {}};
      } catch (const Error& e) {
        found[i].note = std::string("wikipedia: ") + e.what();
      }
    });
    for (std::size_t i = 0; i < need_wiki.size(); ++i) {
      if (!found[i].note.empty()) ++client_errors;
      by_string[need_wiki[i]] = std::move(found[i]);
    }
  }

  std::vector<std::size_t> need_llm;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& r = by_string[cleaned[i]];
    out[i].note = r.note;
    if (r.stage != Stage::unresolved) {
      out[i].stage = r.stage;
      out[i].final_text = r.text;
      out[i].whitelisted = true;
    } else if (llm && !cleaned[i].empty()) {
      need_llm.push_back(i);
    }
  }

  if (llm) {
    std::vector<Resolution> fixed(need_llm.size());
    parallel_for(need_llm.size(), options.max_in_flight, [&](std::size_t j) {
      const auto i = need_llm[j];
      const auto& ref = result.slots[i];
      const auto& trial = trials[ref.trial];
      std::array<std::string, 3> context;
      for (std::size_t k = 0; k < 3; ++k)
        context[k] = trial.responses[k].is_response() ? text::clean_text(trial.responses[k].raw_text) : "";
      try {
        const auto reply = text::clean_text(llm->correct(make_correction_request(trial.cue, context, ref.position, {})));
        if (reply.empty()) {
          fixed[j].note = "llm: reply empty after cleaning";
        } else {
          fixed[j] = {Stage::llm_corrected, reply, text::contains_space(reply) ? "review: multi-word reply" : ""};
        }
      } catch (const Error& e) {
        fixed[j].note = std::string("llm: ") + e.what();
      }
    });
    for (std::size_t j = 0; j < need_llm.size(); ++j) {
      auto& resp = out[need_llm[j]];
      auto& f = fixed[j];
      if (f.stage == Stage::llm_corrected) {
        resp.stage = f.stage;
        resp.final_text = f.text;
        resp.whitelisted = true;
        if (!f.note.empty()) resp.note = resp.note.empty() ? f.note : resp.note + "; " + f.note;
      } else {
        ++client_errors;
        resp.note = resp.note.empty() ? f.note : resp.note + "; " + f.note;
      }
    }
  }

  result.report.total = static_cast<std::int64_t>(out.size());
  result.report.client_errors = client_errors;
  for (const auto& r : out) ++result.report.resolved_by_stage[static_cast<std::size_t>(r.stage)];
  return result;
}

std::vector<TrialRecord> apply_normalization(const std::vector<TrialRecord>& trials, const WhitelistResult& result,
                                             bool drop_unresolved) {
  auto out = trials;
  for (std::size_t i = 0; i < result.slots.size(); ++i) {
    const auto& ref = result.slots[i];
    const auto& r = result.responses[i];
    auto& slot = out[ref.trial].responses[ref.position];
    if (r.whitelisted) {
      slot.raw_text = r.final_text;
    } else if (drop_unresolved || r.final_text.empty()) {
      slot.raw_text.clear();
      slot.marker = Marker::missing;
    } else {
      slot.raw_text = r.final_text;
    }
  }
  return out;
}

double score_correction_accuracy(const std::vector<std::pair<std::string, std::string>>& corrections) {
  if (corrections.empty()) throw DataError("score_correction_accuracy: empty correction list");
  std::size_t hits = 0;
  for (const auto& [proposed, gold] : corrections)
    if (text::clean_text(proposed) == text::clean_text(gold)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(corrections.size());
}

std::vector<GoldCorrection> load_gold_corrections(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open gold corrections " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::vector<GoldCorrection> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    if (lineno == 1) {
      if (cells != std::vector<std::string>{"cue", "raw", "gold"})
        throw DataError(path.string() + ":1: header must be cue<TAB>raw<TAB>gold");
      continue;
    }
    if (cells.size() != 3)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
    out.push_back({cells[0], cells[1], cells[2]});
  }
  return out;
}

// --- Balancing --------------------------------------------------------------

double BalanceReport::dropped_cue_fraction() const {
  return cues_in ? static_cast<double>(cues_dropped) / static_cast<double>(cues_in) : 0.0;
}

double BalanceReport::removed_trial_fraction() const {
  return trials_in ? static_cast<double>(trials_removed_dropped_cues + trials_removed_sampling) /
                         static_cast<double>(trials_in)
                   : 0.0;
}

BalanceResult balance_cues(const std::vector<TrialRecord>& trials, const BalanceConfig& config) {
  if (config.sample_size < 1) throw ConfigError("balance: sample_size must be >= 1");
  if (config.sample_size > config.min_trials_per_cue)
    throw ConfigError("balance: sample_size (" + std::to_string(config.sample_size) +
                      ") exceeds min_trials_per_cue (" + std::to_string(config.min_trials_per_cue) + ")");

  std::map<std::string, std::vector<std::size_t>> by_cue;
  for (std::size_t i = 0; i < trials.size(); ++i) by_cue[trials[i].cue].push_back(i);

  BalanceResult result;
  auto& rep = result.report;
  rep.cues_in = static_cast<std::int64_t>(by_cue.size());
  rep.trials_in = static_cast<std::int64_t>(trials.size());

  std::vector<bool> keep(trials.size(), false);
  for (const auto& [cue, idx] : by_cue) {
    const auto n = static_cast<std::int64_t>(idx.size());
    if (n < config.min_trials_per_cue) {
      ++rep.cues_dropped;
      rep.dropped_cues.push_back(cue);
      rep.trials_removed_dropped_cues += n;
      continue;
    }
    ++rep.cues_retained;
    Rng rng(derive_seed(config.rng_seed, cue));
    for (auto j : rng.sample_indices(idx.size(), static_cast<std::size_t>(config.sample_size))) keep[idx[j]] = true;
    rep.trials_removed_sampling += n - config.sample_size;
  }
  for (std::size_t i = 0; i < trials.size(); ++i)
    if (keep[i]) result.trials.push_back(trials[i]);
  rep.trials_out = static_cast<std::int64_t>(result.trials.size());
  return result;
}

}  // namespace assoc
