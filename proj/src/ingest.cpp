#include "assoc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "assoc/error.hpp"
#include "assoc/text.hpp"

namespace assoc {

const char* to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::x: return "X";
    case Gender::unreported: return "";
  }
  return "";
}

const char* to_string(Education e) {
  switch (e) {
    case Education::none: return "none";
    case Education::elementary: return "elementary";
    case Education::secondary: return "secondary";
    case Education::high_school: return "high_school";
    case Education::higher: return "higher";
    case Education::unreported: return "";
  }
  return "";
}

const char* to_string(Marker m) {
  switch (m) {
    case Marker::response: return "response";
    case Marker::unknown_word: return "unknown_word";
    case Marker::no_more_responses: return "no_more_responses";
    case Marker::missing: return "missing";
  }
  return "";
}

const char* to_string(Position p) {
  switch (p) {
    case Position::r1: return "R1";
    case Position::r2: return "R2";
    case Position::r3: return "R3";
  }
  return "";
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

Gender parse_gender(const std::string& s, std::size_t line) {
  if (s.empty()) return Gender::unreported;
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "X" || s == "x") return Gender::x;
  fail(line, "unknown gender '" + s + "'");
}

Education parse_education(const std::string& s, std::size_t line) {
  if (s.empty()) return Education::unreported;
  for (auto e : {Education::none, Education::elementary, Education::secondary, Education::high_school,
                 Education::higher}) {
    if (s == to_string(e)) return e;
  }
  fail(line, "unknown education '" + s + "'");
}

Marker parse_marker(const std::string& s, const std::string& text, std::size_t line) {
  // An empty marker cell is inferred from the text cell.
  if (s.empty()) return text.empty() ? Marker::missing : Marker::response;
  for (auto m : {Marker::response, Marker::unknown_word, Marker::no_more_responses, Marker::missing}) {
    if (s == to_string(m)) return m;
  }
  fail(line, "unknown marker '" + s + "'");
}

std::optional<int> parse_age(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) fail(line, "age '" + s + "' is not an integer");
  if (v < 16 || v > 120) fail(line, "age " + s + " outside [16, 120]");
  return v;
}

std::optional<double> parse_coord(const std::string& s, std::size_t line, const char* name) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    fail(line, std::string(name) + " '" + s + "' is not a number");
  return v;
}

std::optional<std::chrono::sys_seconds> parse_timestamp(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  char tail[2] = {0, 0};
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%1s", &y, &mo, &d, &sep, &h, &mi, &sec, tail);
  const bool ok_tail = n == 7 || (n == 8 && tail[0] == 'Z');
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (n < 7 || !ok_tail || (sep != 'T' && sep != ' ') || !ymd.ok() || h > 23 || mi > 59 || sec > 60)
    fail(line, "timestamp '" + s + "' is not YYYY-MM-DDTHH:MM:SSZ");
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{sec};
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw DataError("line 1: missing header row");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = text::split(line, '\t');
  if (header.size() != kTrialColumns.size() || !std::equal(header.begin(), header.end(), kTrialColumns.begin()))
    fail(lineno, "header does not match the trial column set");

  std::unordered_map<std::string, std::size_t> participant_index;
  std::unordered_map<std::string, int> trial_counter;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    if (cells.size() != kTrialColumns.size())
      fail(lineno, "expected " + std::to_string(kTrialColumns.size()) + " columns, found " +
                       std::to_string(cells.size()));

    ParticipantRecord p;
    p.participant_id = cells[0];
    if (p.participant_id.empty()) fail(lineno, "empty participant_id");
    p.age = parse_age(cells[1], lineno);
    p.gender = parse_gender(cells[2], lineno);
    p.native_language = cells[3];
    p.education = parse_education(cells[4], lineno);
    const auto lat = parse_coord(cells[5], lineno, "lat");
    const auto lon = parse_coord(cells[6], lineno, "lon");
    if (lat.has_value() != lon.has_value()) fail(lineno, "lat and lon must both be present or both empty");
    if (lat) {
      if (*lat < -90 || *lat > 90 || *lon < -180 || *lon > 180) fail(lineno, "location out of range");
      p.location = GeoPoint{*lat, *lon};
    }
    p.timestamp = parse_timestamp(cells[7], lineno);

    TrialRecord t;
    t.participant_id = p.participant_id;
    t.cue = cells[8];
    if (t.cue.empty()) fail(lineno, "empty cue");
    bool ended = false;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& txt = cells[9 + 2 * k];
      const auto marker = parse_marker(cells[10 + 2 * k], txt, lineno);
      const auto pos_name = std::string(to_string(static_cast<Position>(k)));
      if (marker == Marker::response && txt.empty()) fail(lineno, pos_name + " marked response but empty");
      if (marker != Marker::response && !txt.empty())
        fail(lineno, pos_name + " has text but marker '" + to_string(marker) + "'");
      if (ended && marker == Marker::response) fail(lineno, pos_name + " follows a no_more_responses marker");
      if (marker == Marker::no_more_responses) ended = true;
      t.responses[k] = ResponseSlot{txt, marker, static_cast<Position>(k)};
    }

    auto [it, inserted] = participant_index.try_emplace(p.participant_id, data.participants.size());
    if (inserted) {
      data.participants.push_back(p);
    } else if (!(data.participants[it->second] == p)) {
      fail(lineno, "participant '" + p.participant_id + "' has conflicting participant columns");
    }
    t.trial_index = ++trial_counter[t.participant_id];
    data.trials.push_back(std::move(t));
  }
  return data;
}

Dataset parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trial file " + path.string());
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (std::size_t i = 0; i < kTrialColumns.size(); ++i) out << (i ? "\t" : "") << kTrialColumns[i];
  out << '\n';
  std::unordered_map<std::string, const ParticipantRecord*> by_id;
  for (const auto& p : data.participants) by_id.emplace(p.participant_id, &p);
  for (const auto& t : data.trials) {
    const auto it = by_id.find(t.participant_id);
    if (it == by_id.end()) throw DataError("trial references unknown participant '" + t.participant_id + "'");
    const auto& p = *it->second;
    out << p.participant_id << '\t' << (p.age ? std::to_string(*p.age) : "") << '\t' << to_string(p.gender)
        << '\t' << p.native_language << '\t' << to_string(p.education) << '\t'
        << (p.location ? text::format_double(p.location->latitude) : "") << '\t'
        << (p.location ? text::format_double(p.location->longitude) : "") << '\t'
        << (p.timestamp ? format_timestamp(*p.timestamp) : "") << '\t' << t.cue;
    for (const auto& slot : t.responses) out << '\t' << slot.raw_text << '\t' << to_string(slot.marker);
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset(out, data);
}

std::vector<ParticipantRecord> participants_of(const std::vector<TrialRecord>& trials,
                                               const std::vector<ParticipantRecord>& all) {
  std::unordered_set<std::string> ids;
  for (const auto& t : trials) ids.insert(t.participant_id);
  std::vector<ParticipantRecord> out;
  for (const auto& p : all)
    if (ids.count(p.participant_id)) out.push_back(p);
  return out;
}

std::set<std::string> cue_set(const std::vector<TrialRecord>& trials) {
  std::set<std::string> cues;
  for (const auto& t : trials) cues.insert(t.cue);
  return cues;
}

DatasetStats compute_stats(const std::vector<TrialRecord>& trials, const std::set<std::string>& cues) {
  if (trials.empty()) throw DataError("compute_stats: empty trial list");
  DatasetStats s;
  std::unordered_set<std::string> participants;
  std::unordered_map<std::string, std::int64_t> type_counts;
  for (const auto& t : trials) {
    participants.insert(t.participant_id);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& slot = t.responses[k];
      if (!slot.is_response()) continue;
      ++s.n_tokens;
      ++s.tokens_by_position[k];
      ++type_counts[slot.raw_text];
      if (cues.count(slot.raw_text)) ++s.n_covered_tokens;
    }
  }
  s.n_participants = static_cast<std::int64_t>(participants.size());
  s.n_trials = static_cast<std::int64_t>(trials.size());
  s.n_types = static_cast<std::int64_t>(type_counts.size());
  for (const auto& [_, c] : type_counts)
    if (c == 1) ++s.n_one_off_types;
  if (s.n_tokens > 0) {
    s.one_off_type_fraction = static_cast<double>(s.n_one_off_types) / static_cast<double>(s.n_types);
    s.one_off_token_fraction = static_cast<double>(s.n_one_off_types) / static_cast<double>(s.n_tokens);
    s.coverage_fraction = static_cast<double>(s.n_covered_tokens) / static_cast<double>(s.n_tokens);
  }
  return s;
}

namespace {

std::vector<CategoryCount> tabulate(const std::map<std::string, std::int64_t>& counts, std::int64_t total,
                                    const std::string& unreported_label) {
  std::int64_t reported = 0;
  for (const auto& [label, c] : counts)
    if (label != unreported_label) reported += c;
  std::vector<CategoryCount> out;
  for (const auto& [label, c] : counts) {
    CategoryCount cc{label, c, 0.0, 0.0};
    if (total > 0) cc.percent = 100.0 * static_cast<double>(c) / static_cast<double>(total);
    if (label != unreported_label && reported > 0)
      cc.percent_reported = 100.0 * static_cast<double>(c) / static_cast<double>(reported);
    out.push_back(cc);
  }
  // Largest bucket first, unreported last.
  std::stable_sort(out.begin(), out.end(), [&](const CategoryCount& a, const CategoryCount& b) {
    const bool ua = a.label == unreported_label, ub = b.label == unreported_label;
    if (ua != ub) return ub;
    return a.count > b.count;
  });
  return out;
}

}  // namespace

Demographics summarize_demographics(const std::vector<ParticipantRecord>& participants) {
  static const std::string kUnreported = "unreported";
  Demographics d;
  d.n_participants = static_cast<std::int64_t>(participants.size());
  std::map<std::string, std::int64_t> gender, language, education, ages;
  double sum = 0.0;
  for (const auto& p : participants) {
    ++gender[p.gender == Gender::unreported ? kUnreported : to_string(p.gender)];
    ++language[p.native_language.empty() ? kUnreported : p.native_language];
    ++education[p.education == Education::unreported ? kUnreported : to_string(p.education)];
    if (p.age) {
      const int lo = (*p.age / 10) * 10;
      char label[32];
      std::snprintf(label, sizeof label, "%03d-%03d", lo, lo + 9);
      ++ages[label];
      ++d.n_with_age;
      sum += *p.age;
      d.min_age = d.min_age ? std::min(*d.min_age, *p.age) : *p.age;
      d.max_age = d.max_age ? std::max(*d.max_age, *p.age) : *p.age;
    } else {
      ++ages[kUnreported];
    }
  }
  d.gender = tabulate(gender, d.n_participants, kUnreported);
  d.native_language = tabulate(language, d.n_participants, kUnreported);
  d.education = tabulate(education, d.n_participants, kUnreported);
  d.age_histogram = tabulate(ages, d.n_participants, kUnreported);
  // Histogram stays in age order; zero-padded labels sort correctly.
  std::stable_sort(d.age_histogram.begin(), d.age_histogram.end(),
                   [&](const CategoryCount& a, const CategoryCount& b) {
                     if ((a.label == kUnreported) != (b.label == kUnreported)) return b.label == kUnreported;
                     return a.label < b.label;
                   });
  for (auto& bin : d.age_histogram) {
    if (bin.label == kUnreported) continue;
    const int lo = std::stoi(bin.label.substr(0, 3));
    bin.label = std::to_string(lo) + "-" + std::to_string(lo + 9);
  }
  if (d.n_with_age > 0) {
    d.mean_age = sum / static_cast<double>(d.n_with_age);
    if (d.n_with_age > 1) {
      double ss = 0.0;
      for (const auto& p : participants)
        if (p.age) ss += (*p.age - d.mean_age) * (*p.age - d.mean_age);
      d.sd_age = std::sqrt(ss / static_cast<double>(d.n_with_age - 1));
    }
  }
  return d;
}

}  // namespace assoc
