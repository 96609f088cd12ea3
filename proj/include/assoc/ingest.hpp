#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace assoc {

enum class Gender { female, male, x, unreported };
enum class Education { none, elementary, secondary, high_school, higher, unreported };
enum class Marker { response, unknown_word, no_more_responses, missing };
enum class Position { r1, r2, r3 };

const char* to_string(Gender g);
const char* to_string(Education e);
const char* to_string(Marker m);
const char* to_string(Position p);

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct ParticipantRecord {
  std::string participant_id;
  std::optional<int> age;
  Gender gender = Gender::unreported;
  std::string native_language;  // empty when unreported
  Education education = Education::unreported;
  std::optional<GeoPoint> location;
  std::optional<std::chrono::sys_seconds> timestamp;

  bool operator==(const ParticipantRecord&) const = default;
};

struct ResponseSlot {
  std::string raw_text;
  Marker marker = Marker::missing;
  Position position = Position::r1;

  bool is_response() const { return marker == Marker::response; }
  bool operator==(const ResponseSlot&) const = default;
};

struct TrialRecord {
  std::string participant_id;
  std::string cue;
  std::array<ResponseSlot, 3> responses;
  int trial_index = 1;  // 1-based ordinal within the participant, in file order

  bool operator==(const TrialRecord&) const = default;
};

struct Dataset {
  std::vector<ParticipantRecord> participants;
  std::vector<TrialRecord> trials;

  bool operator==(const Dataset&) const = default;
};

// Column order of the trial TSV format. The header row must match exactly.
inline constexpr std::array<const char*, 15> kTrialColumns{
    "participant_id", "age", "gender", "native_language", "education",
    "lat", "lon", "timestamp", "cue",
    "R1", "R1_marker", "R2", "R2_marker", "R3", "R3_marker"};

// Parses the trial TSV format. Rows of one participant must agree on the
// participant columns. Throws DataError citing the 1-based line number.
Dataset parse_dataset(std::istream& in);
Dataset parse_dataset(const std::filesystem::path& path);

// Writes the trial TSV format; parse_dataset(write_dataset(d)) == d.
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

// Builds the participant table restricted to ids that occur in `trials`,
// keeping the order of `all`.
std::vector<ParticipantRecord> participants_of(const std::vector<TrialRecord>& trials,
                                               const std::vector<ParticipantRecord>& all);

std::set<std::string> cue_set(const std::vector<TrialRecord>& trials);

struct DatasetStats {
  std::int64_t n_participants = 0;
  std::int64_t n_trials = 0;
  std::int64_t n_tokens = 0;
  std::array<std::int64_t, 3> tokens_by_position{};
  std::int64_t n_types = 0;
  std::int64_t n_one_off_types = 0;
  std::int64_t n_covered_tokens = 0;
  double one_off_type_fraction = 0.0;
  double one_off_token_fraction = 0.0;
  double coverage_fraction = 0.0;
};

// Counts marker=response slots. Strings are compared exactly as given.
DatasetStats compute_stats(const std::vector<TrialRecord>& trials, const std::set<std::string>& cues);

struct CategoryCount {
  std::string label;
  std::int64_t count = 0;
  double percent = 0.0;           // of all participants
  double percent_reported = 0.0;  // of participants who reported this field
};

struct Demographics {
  std::int64_t n_participants = 0;
  std::vector<CategoryCount> gender;
  std::vector<CategoryCount> native_language;
  std::vector<CategoryCount> education;
  std::vector<CategoryCount> age_histogram;  // decade bins, e.g. "20-29"
  std::int64_t n_with_age = 0;
  double mean_age = 0.0;
  double sd_age = 0.0;  // sample standard deviation
  std::optional<int> min_age;
  std::optional<int> max_age;
};

Demographics summarize_demographics(const std::vector<ParticipantRecord>& participants);

}  // namespace assoc
