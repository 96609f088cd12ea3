// Synthetic participants for the exclusion thresholds.
#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "assoc/ingest.hpp"
#include "assoc/preprocess.hpp"

namespace fixture {

// Letters-only word, distinct for each index.
inline std::string word(int i) {
  std::string s = "Wort";
  for (int k = 0; k < 3; ++k) {
    s += static_cast<char>('a' + i % 26);
    i /= 26;
  }
  return s;
}

inline assoc::WordListLexicon lexicon(int n = 2000) {
  std::unordered_set<std::string> words;
  for (int i = 0; i < n; ++i) words.insert(word(i));
  return assoc::WordListLexicon(std::move(words));
}

// Counts over the 300 slots of a 100-trial participant. Missing slots come
// first; the remaining slots are response tokens: `multiword` two-word
// phrases, then one word followed by `repeats` copies of it in alternating
// case, then `misspelled` words outside the lexicon, then distinct lexicon
// words.
struct Profile {
  int missing = 0;
  int multiword = 0;
  int repeats = 0;
  int misspelled = 0;
};

inline constexpr int kTrials = 100;
inline constexpr int kSlots = 3 * kTrials;

inline std::vector<assoc::TrialRecord> participant(const std::string& pid, const Profile& p) {
  std::vector<assoc::TrialRecord> trials(kTrials);
  const std::string repeated = word(1999);
  std::string shouted = repeated;
  for (auto& c : shouted) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const int first_repeat = p.multiword;
  const int first_misspelled = first_repeat + (p.repeats > 0 ? p.repeats + 1 : 0);
  int next_word = 0;
  for (int s = 0; s < kSlots; ++s) {
    auto& t = trials[static_cast<std::size_t>(s / 3)];
    t.participant_id = pid;
    t.cue = "Cue" + std::to_string(s / 3);
    t.trial_index = s / 3 + 1;
    auto& slot = t.responses[static_cast<std::size_t>(s % 3)];
    slot.position = static_cast<assoc::Position>(s % 3);
    const int token = s - p.missing;
    if (token < 0) {
      slot.marker = s % 2 ? assoc::Marker::unknown_word : assoc::Marker::missing;
      continue;
    }
    slot.marker = assoc::Marker::response;
    if (token < first_repeat) {
      slot.raw_text = word(next_word) + " " + word(next_word + 1);
      next_word += 2;
    } else if (token < first_misspelled) {
      slot.raw_text = (token - first_repeat) % 2 ? shouted : repeated;
    } else if (token < first_misspelled + p.misspelled) {
      slot.raw_text = word(next_word++) + "qx";
    } else {
      slot.raw_text = word(next_word++);
    }
  }
  return trials;
}

inline assoc::ParticipantRecord record(const std::string& pid) {
  assoc::ParticipantRecord r;
  r.participant_id = pid;
  return r;
}

}  // namespace fixture
