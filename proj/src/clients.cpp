#include "assoc/clients.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "assoc/error.hpp"
#include "assoc/text.hpp"

namespace assoc {

const std::string_view kCorrectionSystemPrompt = R"PROMPT(Du hilfst mir potenziell falsch geschriebene Responses in einer Studie mit freien Assoziationen zu korrigieren. Ändere so wenig wie möglich und folge den Regeln.

WICHTIG: Antworte ausschließlich mit der korrigierten Response, ohne Anführungszeichen oder Zusatztext.

REGELN:

1. Wenn eine Response a) richtig geschrieben ist auf Deutsch, b) richtig geschrieben ist in einer anderen Sprache und kein typisches, deutsches falsch geschriebenes Wort ist, oder c) ein korrekt geschriebener Eigenname ist: Die originale Response verwenden.

Beispiele:
Cue: Mensch; Response: Homo sapiens; Korrigiert: Homo sapiens
Cue: Theorie; Response: The Big Bang Theory; Korrigiert: The Big Bang Theory

2. Wenn eine Response falsch geschrieben ist und (in Betracht des Cues und der anderen Assoziationen) die richtige Schreibweise zugerordnet werden kann: Die korrekt geschriebene Response verwenden.

Beispiele:
Cue: Argument; Response: Diskussoin; Korrigiert: Diskussion
Cue: Marketing; Response: Werbungh; Korrigiert: Werbung

3. Wenn eine Response Wortkonstrukte enthält die auf mehrere Responses in einem Antwortfeld hinweisen: Die erste Response verwenden.

Beispiele:
Cue: hören; Response: sehen, fühlen, riechen; Korrigiert: sehen
Cue: Schleifpapier; Response: feinkörnig/grobkörnig; Korrigiert: feinkörnig

4. Wenn eine Assoziation Wortkonstrukte enthält, die den Cue wiederholen und eine zusätzliche, eigenständige Komponente enthalten: Die korrekt geschriebene eigenständige Komponente verwenden.

Beispiele:
Cue: lokal; Response: Lokal/Bar; Korrigiert: Bar

5. Wenn eine Response ein unvollständiges Wort ist aber in Kombination mit dem Cue Sinn macht: Die sinnvolle Kombination verwenden.

Beispiele:
Cue: Gebiet; Response: Hohheits; Korrigiert: Hoheitsgebiet
Cue: notwendig; Response: keit; Korrigiert: Notwendigkeit)PROMPT";

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::put(const std::string& key, const std::string& value) {
  std::lock_guard lock(mutex_);
  memory_[key] = value;
  if (!dir_) return;
  // Write-then-rename so readers never see a partial entry.
  const auto tmp = *dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    out << value;
  }
  std::filesystem::rename(tmp, *dir_ / key);
}

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("URL without scheme: " + std::string(url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), ""};
  std::string path(url.substr(path_start));
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  if (path == "/") path.clear();
  return {std::string(url.substr(0, path_start)), path};
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

namespace {

httplib::Client make_client(const std::string& origin, const RetryPolicy& retry) {
  httplib::Client cli(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(retry.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(retry.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_follow_location(true);
  return cli;
}

[[noreturn]] void transport_failure(const std::string& what, httplib::Error err) {
  throw TransportError(what + ": " + httplib::to_string(err));
}

}  // namespace

// --- Wikipedia ---------------------------------------------------------------

HttpWikiClient::HttpWikiClient(WikiConfig config, ResponseCache* cache)
    : config_(std::move(config)), cache_(cache) {}

WikiLookupResult HttpWikiClient::lookup(const std::string& word) {
  const auto key = sha256_hex("wiki\n" + config_.base_url + "\n" + word);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      const auto j = nlohmann::json::parse(*hit);
      WikiLookupResult r{word, std::nullopt, j.value("redirect", false)};
      if (j.contains("title") && j["title"].is_string()) r.matched_title = j["title"].get<std::string>();
      return r;
    }
  }
  auto result = with_retries(config_.retry, [&] { return fetch(word); });
  if (cache_) {
    nlohmann::json j;
    j["title"] = result.matched_title ? nlohmann::json(*result.matched_title) : nlohmann::json(nullptr);
    j["redirect"] = result.via_search_redirect;
    cache_->put(key, j.dump());
  }
  return result;
}

WikiLookupResult HttpWikiClient::fetch(const std::string& word) {
  const auto url = split_url(config_.base_url);
  auto cli = make_client(url.origin, config_.retry);
  const httplib::Headers headers{{"User-Agent", config_.user_agent}, {"Accept", "application/json"}};

  WikiLookupResult result{word, std::nullopt, false};

  std::string title = word;
  std::replace(title.begin(), title.end(), ' ', '_');
  ++network_calls_;
  auto res = cli.Get(url.path + "/api/rest_v1/page/summary/" + percent_encode(title), headers);
  if (!res) transport_failure("wikipedia title lookup", res.error());
  if (res->status == 200) {
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    std::string matched = word;
    if (!j.is_discarded()) {
      if (j.contains("titles") && j["titles"].contains("normalized") && j["titles"]["normalized"].is_string())
        matched = j["titles"]["normalized"].get<std::string>();
      else if (j.contains("title") && j["title"].is_string())
        matched = j["title"].get<std::string>();
    }
    result.matched_title = matched;
    return result;
  }
  if (res->status >= 500) throw TransportError("wikipedia title lookup: HTTP " + std::to_string(res->status));
  if (res->status != 404)
    throw ProtocolError("wikipedia title lookup: HTTP " + std::to_string(res->status));

  ++network_calls_;
  res = cli.Get(url.path + "/w/api.php?action=opensearch&format=json&limit=1&namespace=0&redirects=resolve&search=" +
                    percent_encode(word),
                headers);
  if (!res) transport_failure("wikipedia search", res.error());
  if (res->status == 404) return result;
  if (res->status >= 500) throw TransportError("wikipedia search: HTTP " + std::to_string(res->status));
  if (res->status != 200) throw ProtocolError("wikipedia search: HTTP " + std::to_string(res->status));
  const auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_array() || j.size() < 2 || !j[1].is_array())
    throw ProtocolError("wikipedia search: unexpected response body");
  if (!j[1].empty() && j[1][0].is_string()) {
    result.matched_title = j[1][0].get<std::string>();
    result.via_search_redirect = true;
  }
  return result;
}

// --- LLM ---------------------------------------------------------------------

Prompt build_prompt(const LlmCorrectionRequest& request) {
  const auto masks = std::count(request.responses.begin(), request.responses.end(), std::string(kMask));
  if (masks != 1)
    throw ConfigError("correction request must mask exactly one response, found " + std::to_string(masks));
  std::string user;
  user += "Responses zum Cue '" + request.cue + "' von dieser Person sind: 1. '" + request.responses[0] +
          "', 2. '" + request.responses[1] + "', 3. '" + request.responses[2] + "'.\n";
  user += "Die Person hat statt der Maske 'WORD' ursprünglich die Response '" + request.incorrect +
          "' hingeschrieben.\n";
  user += "Wie sollte die Response '" + request.incorrect + "' korrigiert lauten?\n";
  user += "Antworte nur mit der korrigierten Response!";
  return {std::string(kCorrectionSystemPrompt), std::move(user)};
}

LlmCorrectionRequest make_correction_request(std::string cue, std::array<std::string, 3> responses,
                                             std::size_t position, std::string model_id) {
  if (position > 2) throw ConfigError("response position out of range");
  LlmCorrectionRequest req;
  req.cue = std::move(cue);
  req.incorrect = responses[position];
  responses[position] = std::string(kMask);
  req.responses = std::move(responses);
  req.model_id = std::move(model_id);
  return req;
}

std::string strip_reply(std::string_view reply) {
  auto cps = text::decode_utf8(reply);
  auto is_quote = [](char32_t c) {
    return c == U'"' || c == U'\'' || c == U'`' || c == 0x201E || c == 0x201C || c == 0x201D ||
           c == 0x201A || c == 0x2018 || c == 0x2019 || c == 0xAB || c == 0xBB;
  };
  std::size_t b = 0, e = cps.size();
  while (true) {
    const auto b0 = b, e0 = e;
    while (b < e && text::is_space(cps[b])) ++b;
    while (e > b && text::is_space(cps[e - 1])) --e;
    while (b < e && is_quote(cps[b])) ++b;
    while (e > b && is_quote(cps[e - 1])) --e;
    if (b == b0 && e == e0) break;
  }
  return text::encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

HttpLlmClient::HttpLlmClient(LlmConfig config, ResponseCache* cache)
    : config_(std::move(config)), cache_(cache) {}

std::string HttpLlmClient::correct(const LlmCorrectionRequest& request) {
  const auto prompt = build_prompt(request);
  const std::string& model = request.model_id.empty() ? config_.model : request.model_id;

  nlohmann::json body;
  body["model"] = model;
  body["temperature"] = request.temperature;
  body["stream"] = false;
  body["messages"] = nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                                            {{"role", "user"}, {"content", prompt.user}}});
  const auto payload = body.dump();
  const auto key = sha256_hex("llm\n" + config_.url + "\n" + payload);

  std::string reply;
  if (auto hit = cache_ ? cache_->get(key) : std::nullopt) {
    reply = *hit;
  } else {
    const auto url = split_url(config_.url);
    reply = with_retries(config_.retry, [&] {
      auto cli = make_client(url.origin, config_.retry);
      httplib::Headers headers;
      if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
      ++network_calls_;
      auto res = cli.Post(url.path.empty() ? "/" : url.path, headers, payload, "application/json");
      if (!res) transport_failure("llm request", res.error());
      if (res->status >= 500) throw TransportError("llm request: HTTP " + std::to_string(res->status));
      if (res->status != 200) throw ProtocolError("llm request: HTTP " + std::to_string(res->status));
      const auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) throw ProtocolError("llm request: response is not JSON");
      // OpenAI-style chat completion, or Ollama's native /api/chat shape.
      if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& msg = j["choices"][0]["message"];
        if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
      }
      if (j.contains("message") && j["message"].contains("content") && j["message"]["content"].is_string())
        return j["message"]["content"].get<std::string>();
      throw ProtocolError("llm request: no message content in response");
    });
    if (cache_) cache_->put(key, reply);
  }

  auto corrected = strip_reply(reply);
  if (corrected.empty()) throw CorrectionFailed("llm returned an empty correction for '" + request.incorrect + "'");
  return corrected;
}

}  // namespace assoc
