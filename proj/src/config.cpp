#include "assoc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "assoc/clients.hpp"
#include "assoc/error.hpp"
#include "assoc/text.hpp"

namespace assoc {

namespace {

std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_quotes) {
      ++i;
    } else if (line[i] == '"') {
      in_quotes = !in_quotes;
    } else if (line[i] == '#' && !in_quotes) {
      return line.substr(0, i);
    }
  }
  return line;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return true;
}

std::string unquote(const std::string& v, const std::string& where) {
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\') {
      if (i + 2 >= v.size()) throw ConfigError(where + ": dangling escape");
      const char e = v[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError(where + ": unknown escape \\" + std::string(1, e));
      }
    } else {
      out += v[i];
    }
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(const std::string& s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& content, const std::string& origin) {
  KeyValueFile f;
  f.origin_ = origin;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto stripped = strip_comment(line);
    const std::string body(text::trim(stripped));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(text::trim(std::string_view(body).substr(0, eq)));
    std::string value(text::trim(std::string_view(body).substr(eq + 1)));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": missing value for " + key);
    if (f.values_.count(key)) throw ConfigError(where + ": duplicate key " + key);
    bool quoted = false;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw ConfigError(where + ": unterminated string");
      value = unquote(value, where);
      quoted = true;
    }
    f.values_[key] = value;
    f.quoted_[key] = quoted;
  }
  return f;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (!quoted_.at(key)) throw ConfigError(origin_ + ": " + key + " must be a quoted string");
  return it->second;
}

std::optional<std::int64_t> KeyValueFile::get_int(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto v = quoted_.at(key) ? std::nullopt : parse_number<std::int64_t>(it->second);
  if (!v) throw ConfigError(origin_ + ": " + key + " must be an integer");
  return v;
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto v = quoted_.at(key) ? std::nullopt : parse_number<double>(it->second);
  if (!v) throw ConfigError(origin_ + ": " + key + " must be a number");
  return v;
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (!quoted_.at(key)) {
    if (it->second == "true") return true;
    if (it->second == "false") return false;
  }
  throw ConfigError(origin_ + ": " + key + " must be true or false");
}

std::optional<std::vector<double>> KeyValueFile::get_doubles(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto& v = it->second;
  if (quoted_.at(key) || v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError(origin_ + ": " + key + " must be a list like [1, 2.5]");
  std::vector<double> out;
  const std::string inner(text::trim(std::string_view(v).substr(1, v.size() - 2)));
  if (inner.empty()) return out;
  for (const auto& item : text::split(inner, ',')) {
    const std::string t(text::trim(item));
    const auto d = parse_number<double>(t);
    if (!d) throw ConfigError(origin_ + ": " + key + ": bad list element '" + t + "'");
    out.push_back(*d);
  }
  return out;
}

namespace {

struct Binding {
  std::function<void(const KeyValueFile&, const std::string&)> read;
  std::function<std::string()> show;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == '\t') {
      out += "\\t";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string show_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + text::format_double(v[i]);
  return out + "]";
}

Binding bind(std::string& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) { field = *f.get_string(k); },
          [&field] { return quote(field); }};
}
Binding bind(std::int64_t& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) { field = *f.get_int(k); },
          [&field] { return std::to_string(field); }};
}
Binding bind(std::uint64_t& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) {
            const auto v = *f.get_int(k);
            if (v < 0) throw ConfigError(k + " must be non-negative");
            field = static_cast<std::uint64_t>(v);
          },
          [&field] { return std::to_string(field); }};
}
Binding bind(double& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) { field = *f.get_double(k); },
          [&field] { return text::format_double(field); }};
}
Binding bind(bool& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) { field = *f.get_bool(k); },
          [&field] { return std::string(field ? "true" : "false"); }};
}
Binding bind(std::vector<double>& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) { field = *f.get_doubles(k); },
          [&field] { return show_list(field); }};
}
Binding bind_names(std::vector<std::string>& field) {
  return {[&field](const KeyValueFile& f, const std::string& k) {
            field.clear();
            for (const auto& item : text::split(*f.get_string(k), ',')) {
              const std::string t(text::trim(item));
              if (!t.empty()) field.push_back(t);
            }
          },
          [&field] {
            std::string joined;
            for (std::size_t i = 0; i < field.size(); ++i) joined += (i ? "," : "") + field[i];
            return quote(joined);
          }};
}

std::map<std::string, Binding> bindings(PipelineConfig& c) {
  return {
      {"input", bind(c.input)},
      {"lexicon", bind(c.lexicon)},
      {"gold", bind(c.gold)},
      {"corpus_frequency", bind(c.corpus_frequency)},
      {"ldt", bind(c.ldt)},
      {"judgments", bind(c.judgments)},
      {"norms", bind_names(c.norms)},
      {"out", bind(c.out)},
      {"wiki.enabled", bind(c.wiki_enabled)},
      {"wiki.base_url", bind(c.wiki_base_url)},
      {"llm.enabled", bind(c.llm_enabled)},
      {"llm.url", bind(c.llm_url)},
      {"llm.model", bind(c.llm_model)},
      {"cache_dir", bind(c.cache_dir)},
      {"max_in_flight", bind(c.max_in_flight)},
      {"retry.attempts", bind(c.retry_attempts)},
      {"retry.backoff_ms", bind(c.retry_backoff_ms)},
      {"timeout_ms", bind(c.timeout_ms)},
      {"balance.min_trials_per_cue", bind(c.min_trials_per_cue)},
      {"balance.sample_size", bind(c.sample_size)},
      {"seed", bind(c.seed)},
      {"matrix.min_response_frequency", bind(c.min_response_frequency)},
      {"svd.k", bind(c.svd_k)},
      {"svd.oversampling", bind(c.svd_oversampling)},
      {"svd.power_iterations", bind(c.svd_power_iterations)},
      {"rw.alpha", bind(c.rw_alpha)},
      {"rw.steps", bind(c.rw_steps)},
      {"rw.closed_form", bind(c.rw_closed_form)},
      {"graph.distance", bind(c.distance)},
      {"eval.lambda_grid", bind(c.lambda_grid)},
      {"eval.bootstrap", bind(c.bootstrap)},
      {"eval.folds", bind(c.folds)},
      {"eval.test_fraction", bind(c.test_fraction)},
      {"eval.split_seed", bind(c.split_seed)},
      {"eval.min_overlap", bind(c.min_overlap)},
  };
}

}  // namespace

void PipelineConfig::apply(const KeyValueFile& file) {
  auto table = bindings(*this);
  for (const auto& [key, value] : file.raw()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key " + key);
    it->second.read(file, key);
  }
  if (distance != "inverse_weight" && distance != "weight")
    throw ConfigError("graph.distance must be \"inverse_weight\" or \"weight\"");
}

void PipelineConfig::apply_environment() {
  if (const char* key = std::getenv("ASSOC_LLM_API_KEY")) llm_api_key = key;
}

std::string PipelineConfig::canonical() const {
  auto table = bindings(const_cast<PipelineConfig&>(*this));
  std::string out;
  for (const auto& [key, binding] : table)
    if (key != "out") out += key + " = " + binding.show() + "\n";
  return out;
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical()); }

}  // namespace assoc
