// assocnorms: command-line front end for the association-norms pipeline.

#include <CLI11.hpp>

#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "artifacts.hpp"
#include "assoc/clients.hpp"
#include "assoc/config.hpp"
#include "assoc/error.hpp"
#include "assoc/evalsuite.hpp"
#include "assoc/ingest.hpp"
#include "assoc/matrix.hpp"
#include "assoc/preprocess.hpp"
#include "assoc/semnet.hpp"
#include "assoc/text.hpp"
#include "reports.hpp"

namespace fs = std::filesystem;
using namespace assocnorms;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::string> input;
  std::optional<std::string> lexicon;

  // whitelist
  bool wiki = false, no_wiki = false, llm = false, no_llm = false, drop_unresolved = false;
  std::optional<std::string> wiki_url, llm_url, llm_model, cache_dir, gold;
  std::optional<std::int64_t> max_in_flight;

  // balance
  std::optional<std::int64_t> min_trials, sample_size;

  // matrix
  std::string transform = "raw";
  std::optional<std::int64_t> min_freq, svd_k;

  // graph
  std::optional<std::string> edges, counts;
  bool metrics = false, baselines = false, scc = false;
  std::optional<std::string> distance;

  // match
  std::int64_t match_cues = 0, match_trials = 0;

  // evaluation
  std::optional<std::string> frequency, corpus_frequency, ldt;
  std::vector<std::string> judgments, embeddings, norms, concat;
  std::optional<std::string> ppmi_counts, rw_counts;
  std::optional<double> alpha;
  std::optional<std::int64_t> steps, bootstrap;
  bool closed_form = false;

  // report
  std::optional<std::string> dir;
  std::vector<std::string> metrics_files;
};

assoc::PipelineConfig resolve_config(const Options& o) {
  assoc::PipelineConfig c;
  if (!o.config_path.empty()) c.apply(assoc::KeyValueFile::load(o.config_path));
  c.apply_environment();
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.split_seed) c.split_seed = *o.split_seed;
  if (o.input) c.input = *o.input;
  if (o.lexicon) c.lexicon = *o.lexicon;
  if (o.wiki) c.wiki_enabled = true;
  if (o.no_wiki) c.wiki_enabled = false;
  if (o.llm) c.llm_enabled = true;
  if (o.no_llm) c.llm_enabled = false;
  if (o.wiki_url) c.wiki_base_url = *o.wiki_url;
  if (o.llm_url) c.llm_url = *o.llm_url;
  if (o.llm_model) c.llm_model = *o.llm_model;
  if (o.cache_dir) c.cache_dir = *o.cache_dir;
  if (o.gold) c.gold = *o.gold;
  if (o.max_in_flight) c.max_in_flight = *o.max_in_flight;
  if (o.min_trials) c.min_trials_per_cue = *o.min_trials;
  if (o.sample_size) c.sample_size = *o.sample_size;
  if (o.min_freq) c.min_response_frequency = *o.min_freq;
  if (o.svd_k) c.svd_k = *o.svd_k;
  if (o.distance) c.distance = *o.distance;
  if (o.corpus_frequency) c.corpus_frequency = *o.corpus_frequency;
  if (o.ldt) c.ldt = *o.ldt;
  if (!o.norms.empty()) c.norms = o.norms;
  if (o.alpha) c.rw_alpha = *o.alpha;
  if (o.steps) c.rw_steps = *o.steps;
  if (o.closed_form) c.rw_closed_form = true;
  if (o.bootstrap) c.bootstrap = *o.bootstrap;
  if (c.distance != "inverse_weight" && c.distance != "weight")
    throw assoc::ConfigError("distance must be inverse_weight or weight");
  if (c.max_in_flight < 1) throw assoc::ConfigError("max_in_flight must be >= 1");
  return c;
}

fs::path require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw assoc::ConfigError("missing dependency: " + what + " (no path given)");
  if (!fs::is_regular_file(path)) throw assoc::ConfigError("missing dependency: " + what + " not found at " + path);
  return path;
}

std::pair<std::string, std::string> named(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), spec};
  if (eq == 0 || eq + 1 == spec.size()) throw assoc::ConfigError("expected name=path, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

assoc::Dataset load_trials(const assoc::PipelineConfig& c, Manifest& m) {
  const auto path = require_file(c.input, "trial table (--input)");
  m.input("trials", path);
  return assoc::parse_dataset(path);
}

std::string dataset_text(const assoc::Dataset& d) {
  std::ostringstream ss;
  assoc::write_dataset(ss, d);
  return ss.str();
}

assoc::DistanceConvention distance_of(const assoc::PipelineConfig& c) {
  return c.distance == "weight" ? assoc::DistanceConvention::weight : assoc::DistanceConvention::inverse_weight;
}

assoc::RandomWalkParams rw_params(const assoc::PipelineConfig& c) {
  assoc::RandomWalkParams p;
  p.alpha = c.rw_alpha;
  if (c.rw_steps > 0) p.max_steps = static_cast<int>(c.rw_steps);
  p.closed_form = c.rw_closed_form;
  return p;
}

// ---------------------------------------------------------------------------

void cmd_ingest(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m) {
  const auto data = load_trials(c, m);
  out.write("trials.tsv", dataset_text(data));
  out.write_json("ingest_summary.json", {{"n_participants", data.participants.size()}, {"n_trials", data.trials.size()},
                                         {"n_cues", assoc::cue_set(data.trials).size()}});
}

void cmd_filter(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m) {
  const auto data = load_trials(c, m);
  const auto lex_path = require_file(c.lexicon, "lexicon (--lexicon)");
  m.input("lexicon", lex_path);
  const auto lexicon = assoc::WordListLexicon::load(lex_path);
  const auto res = assoc::filter_participants(data.trials, data.participants, lexicon);
  out.write("trials.filtered.tsv", dataset_text({res.participants, res.trials}));
  std::ostringstream q;
  q << "participant_id\tn_trials\tn_slots\tn_tokens\tn_multiword\tn_repeats\tn_spell_pass\tn_missing\tfailed\n";
  for (const auto& p : res.quality) {
    std::string failed;
    for (std::size_t i = 0; i < assoc::kCriterionCount; ++i)
      if (p.failed[i]) failed += (failed.empty() ? "" : ",") + std::string(assoc::to_string(static_cast<assoc::Criterion>(i)));
    q << p.participant_id << '\t' << p.n_trials << '\t' << p.n_slots << '\t' << p.n_tokens << '\t' << p.n_multiword << '\t'
      << p.n_repeats << '\t' << p.n_spell_pass << '\t' << p.n_missing << '\t' << (failed.empty() ? "-" : failed) << '\n';
  }
  out.write("participant_quality.tsv", q.str());
  out.write_json("filter_report.json", to_json(res.report));
}

void cmd_whitelist(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m, bool drop_unresolved) {
  const auto data = load_trials(c, m);
  const auto lex_path = require_file(c.lexicon, "lexicon (--lexicon)");
  m.input("lexicon", lex_path);
  const auto lexicon = assoc::WordListLexicon::load(lex_path);

  std::optional<assoc::ResponseCache> cache;
  if (c.cache_dir.empty()) cache.emplace();
  else cache.emplace(fs::path(c.cache_dir));
  assoc::RetryPolicy retry;
  retry.attempts = static_cast<int>(c.retry_attempts);
  retry.initial_backoff = std::chrono::milliseconds(c.retry_backoff_ms);
  retry.timeout = std::chrono::milliseconds(c.timeout_ms);

  std::unique_ptr<assoc::HttpWikiClient> wiki;
  if (c.wiki_enabled) {
    assoc::WikiConfig wc;
    wc.base_url = c.wiki_base_url;
    wc.retry = retry;
    wiki = std::make_unique<assoc::HttpWikiClient>(wc, &*cache);
  }
  std::unique_ptr<assoc::HttpLlmClient> llm;
  if (c.llm_enabled) {
    assoc::LlmConfig lc;
    lc.url = c.llm_url;
    lc.model = c.llm_model;
    lc.api_key = c.llm_api_key;
    lc.retry = retry;
    llm = std::make_unique<assoc::HttpLlmClient>(lc, &*cache);
  }
  assoc::WhitelistOptions opts;
  opts.max_in_flight = static_cast<std::size_t>(c.max_in_flight);
  const auto res = assoc::whitelist_pipeline(data.trials, lexicon, wiki.get(), llm.get(), opts);
  const auto normalized = assoc::apply_normalization(data.trials, res, drop_unresolved);
  out.write("trials.normalized.tsv", dataset_text({assoc::participants_of(normalized, data.participants), normalized}));

  std::ostringstream rows;
  rows << "participant_id\ttrial_index\tcue\tposition\traw\tfinal\tstage\tnote\n";
  for (std::size_t i = 0; i < res.slots.size(); ++i) {
    const auto& t = data.trials[res.slots[i].trial];
    const auto& r = res.responses[i];
    rows << t.participant_id << '\t' << t.trial_index << '\t' << t.cue << "\tR" << res.slots[i].position + 1 << '\t'
         << r.raw_text << '\t' << r.final_text << '\t' << assoc::to_string(r.stage) << '\t' << r.note << '\n';
  }
  out.write("whitelist_responses.tsv", rows.str());

  json report = to_json(res.report);
  report["wikipedia_enabled"] = c.wiki_enabled;
  report["llm_enabled"] = c.llm_enabled;
  if (!c.gold.empty()) {
    const auto gold_path = require_file(c.gold, "gold corrections (--gold)");
    m.input("gold", gold_path);
    std::map<std::pair<std::string, std::string>, std::string> corrected;
    for (std::size_t i = 0; i < res.slots.size(); ++i) {
      const auto& r = res.responses[i];
      if (r.stage != assoc::Stage::llm_corrected) continue;
      corrected.emplace(std::pair{data.trials[res.slots[i].trial].cue, r.raw_text}, r.final_text);
    }
    std::vector<std::pair<std::string, std::string>> scored;
    const auto gold = assoc::load_gold_corrections(gold_path);
    for (const auto& g : gold) {
      const auto it = corrected.find({g.cue, g.raw});
      if (it != corrected.end()) scored.emplace_back(it->second, g.gold);
    }
    report["gold_items"] = gold.size();
    report["gold_scored"] = scored.size();
    report["correction_accuracy"] = scored.empty() ? json(nullptr) : json(assoc::score_correction_accuracy(scored));
  }
  out.write_json("whitelist_report.json", report);
}

void cmd_balance(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m) {
  const auto data = load_trials(c, m);
  const auto res = assoc::balance_cues(data.trials, {c.min_trials_per_cue, c.sample_size, c.seed});
  out.write("trials.balanced.tsv", dataset_text({assoc::participants_of(res.trials, data.participants), res.trials}));
  out.write_json("balance_report.json", to_json(res.report));
}

void cmd_stats(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m) {
  const auto data = load_trials(c, m);
  out.write_json("stats.json", {{"responses", to_json(assoc::compute_stats(data.trials, assoc::cue_set(data.trials)))},
                                {"demographics", to_json(assoc::summarize_demographics(data.participants))}});
}

void cmd_matrix(const assoc::PipelineConfig& c, OutputDir& out, Manifest& m, const std::string& transform) {
  const auto data = load_trials(c, m);
  const auto counts = assoc::build_count_matrix(data.trials, c.min_response_frequency);
  m.parameters()["transform"] = transform;
  {
    std::ostringstream ss;
    assoc::write_frequency(ss, assoc::frequency_vector(counts));
    out.write("frequency.tsv", ss.str());
  }
  if (transform == "raw") {
    std::ostringstream ss;
    assoc::write_triplets(ss, counts);
    out.write("counts.tsv", ss.str());
    return;
  }
  const auto weighted = assoc::ppmi_transform(counts);
  if (transform == "ppmi") {
    std::ostringstream ss;
    assoc::write_triplets(ss, weighted.row_labels, weighted.col_labels, weighted.values);
    out.write("ppmi.tsv", ss.str());
    return;
  }
  assoc::SvdOptions so;
  so.oversampling = static_cast<int>(c.svd_oversampling);
  so.power_iterations = static_cast<int>(c.svd_power_iterations);
  so.seed = c.seed;
  const auto svd = assoc::truncated_svd(weighted, static_cast<int>(c.svd_k), so);
  std::ostringstream emb;
  assoc::write_embedding(emb, svd.embedding);
  out.write("embedding.svd.txt", emb.str());
  std::ostringstream sv;
  sv << "index\tsingular_value\n";
  for (Eigen::Index i = 0; i < svd.singular_values.size(); ++i)
    sv << i + 1 << '\t' << assoc::text::format_double(svd.singular_values[i]) << '\n';
  out.write("singular_values.tsv", sv.str());
}

assoc::SemanticGraph load_graph(const assoc::PipelineConfig& c, const Options& o, Manifest& m, bool& built) {
  built = true;
  if (o.edges) {
    built = false;
    const auto path = require_file(*o.edges, "edge list (--edges)");
    m.input("edges", path);
    return assoc::read_edges(path);
  }
  if (o.counts) {
    const auto path = require_file(*o.counts, "count matrix (--counts)");
    m.input("counts", path);
    return assoc::build_graph(assoc::read_count_triplets(path));
  }
  const auto data = load_trials(c, m);
  return assoc::build_graph(assoc::build_count_matrix(data.trials, 1));
}

void cmd_graph(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  bool built = false;
  auto graph = load_graph(c, o, m, built);
  if (o.scc) graph = assoc::strongly_connected_component(graph);
  if (built || o.scc) {
    std::ostringstream ss;
    assoc::write_edges(ss, graph);
    out.write(o.scc ? "edges.scc.tsv" : "edges.tsv", ss.str());
  }
  m.parameters()["largest_scc"] = o.scc;
  if (!o.metrics && !o.baselines) return;
  assoc::MetricOptions mo;
  mo.distance = distance_of(c);
  json metrics = json::object();
  metrics["distance"] = c.distance;
  metrics["graph"] = to_json(assoc::network_metrics(graph, mo));
  if (o.baselines) {
    metrics["random"] = to_json(assoc::baseline_random(graph, c.seed, mo));
    metrics["lattice"] = to_json(assoc::baseline_lattice(graph, mo));
  }
  out.write_json("metrics.json", metrics);
}

void cmd_match(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  const auto data = load_trials(c, m);
  if (o.match_cues < 1 || o.match_trials < 1) throw assoc::ConfigError("match needs --cues and --trials-per-cue >= 1");
  m.parameters()["cues"] = o.match_cues;
  m.parameters()["trials_per_cue"] = o.match_trials;
  const auto matched = assoc::match_dataset(data.trials, o.match_cues, o.match_trials, c.seed);
  out.write("trials.matched.tsv", dataset_text({assoc::participants_of(matched, data.participants), matched}));
}

void cmd_eval_ldt(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  const std::string freq = o.frequency ? *o.frequency : (fs::path(c.out) / "frequency.tsv").string();
  const auto freq_path = require_file(freq, "association frequency artifact frequency.tsv (run `matrix` or pass --frequency)");
  const auto corpus_path = require_file(c.corpus_frequency, "corpus frequency table (--corpus-frequency)");
  const auto ldt_path = require_file(c.ldt, "LDT table (--ldt)");
  m.input("frequency", freq_path);
  m.input("corpus_frequency", corpus_path);
  m.input("ldt", ldt_path);
  const auto groups =
      assoc::ldt_analysis(assoc::read_ldt(ldt_path), assoc::read_frequency(freq_path), assoc::read_frequency(corpus_path));
  json report = json::array();
  for (const auto& g : groups) report.push_back(to_json(g));
  out.write_json("ldt_report.json", {{"groups", report}});
}

struct Scorers {
  std::deque<assoc::Embedding> embeddings;
  std::deque<assoc::WeightedMatrix> ppmi;
  std::deque<assoc::SimilarityMatrix> similarity;
  std::vector<std::pair<std::string, assoc::PairScorer>> models;
};

assoc::PairScorer sparse_row_scorer(const assoc::WeightedMatrix& w) {
  auto index = std::make_shared<std::unordered_map<std::string, Eigen::Index>>();
  for (std::size_t i = 0; i < w.row_labels.size(); ++i) index->emplace(w.row_labels[i], static_cast<Eigen::Index>(i));
  return [index, &w](const std::string& a, const std::string& b) -> std::optional<double> {
    const auto ia = index->find(a), ib = index->find(b);
    if (ia == index->end() || ib == index->end()) return std::nullopt;
    const double na = w.values.row(ia->second).norm(), nb = w.values.row(ib->second).norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return w.values.row(ia->second).dot(w.values.row(ib->second)) / (na * nb);
  };
}

void cmd_eval_relatedness(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  std::vector<std::pair<std::string, fs::path>> datasets;
  std::vector<std::string> specs = o.judgments;
  if (specs.empty() && !c.judgments.empty()) specs.push_back(c.judgments);
  if (specs.empty()) throw assoc::ConfigError("missing dependency: relatedness judgments (--judgments name=path)");
  for (const auto& s : specs) {
    auto [name, path] = named(s);
    datasets.emplace_back(name, require_file(path, "judgments " + name));
    m.input("judgments:" + name, path);
  }

  Scorers scorers;
  if (o.ppmi_counts) {
    const auto path = require_file(*o.ppmi_counts, "count matrix (--ppmi-counts)");
    m.input("ppmi_counts", path);
    scorers.ppmi.push_back(assoc::ppmi_transform(assoc::read_count_triplets(path)));
    scorers.models.emplace_back("ppmi", sparse_row_scorer(scorers.ppmi.back()));
  }
  for (const auto& s : o.embeddings) {
    auto [name, path] = named(s);
    m.input("embedding:" + name, require_file(path, "embedding " + name));
    scorers.embeddings.push_back(assoc::load_external_embedding(path));
    scorers.models.emplace_back(name, assoc::embedding_scorer(scorers.embeddings.back()));
  }
  json rw_info = nullptr;
  if (o.rw_counts) {
    const auto path = require_file(*o.rw_counts, "count matrix (--rw-counts)");
    m.input("rw_counts", path);
    const auto scc = assoc::strongly_connected_component(assoc::build_graph(assoc::read_count_triplets(path)));
    const auto params = rw_params(c);
    scorers.similarity.push_back(assoc::random_walk_relatedness(scc, params));
    scorers.models.emplace_back("ppmi_rw_ppmi", assoc::similarity_scorer(scorers.similarity.back()));
    rw_info = {{"alpha", params.alpha}, {"steps", params.steps()}, {"closed_form", params.closed_form},
               {"scc_nodes", scc.n_nodes()}};
  }
  if (scorers.models.empty()) throw assoc::ConfigError("no model given (--embedding, --ppmi-counts or --rw-counts)");

  json results = json::array();
  for (const auto& [dname, dpath] : datasets) {
    const auto judgments = assoc::read_judgments(dpath);
    for (const auto& [mname, scorer] : scorers.models) {
      json row = {{"dataset", dname}, {"model", mname}};
      try {
        row.update(to_json(assoc::relatedness_eval(judgments, scorer)));
      } catch (const assoc::DataError& e) {
        row["error"] = e.what();
      }
      results.push_back(row);
    }
  }
  out.write_json("relatedness_report.json", {{"results", results}, {"random_walk", rw_info}});
}

void cmd_eval_norms(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  if (c.norms.empty()) throw assoc::ConfigError("missing dependency: norm tables (--norms name=path)");
  if (o.embeddings.empty()) throw assoc::ConfigError("missing dependency: embeddings (--embedding name=path)");
  std::vector<std::pair<std::string, std::map<std::string, double>>> norms;
  for (const auto& s : c.norms) {
    auto [name, path] = named(s);
    m.input("norms:" + name, require_file(path, "norms " + name));
    norms.emplace_back(name, assoc::read_norms(path));
  }
  std::vector<std::pair<std::string, assoc::Embedding>> embeddings;
  for (const auto& s : o.embeddings) {
    auto [name, path] = named(s);
    m.input("embedding:" + name, require_file(path, "embedding " + name));
    embeddings.emplace_back(name, assoc::l2_normalize(assoc::load_external_embedding(path)));
  }
  for (const auto& spec : o.concat) {
    const auto plus = spec.find('+');
    if (plus == std::string::npos) throw assoc::ConfigError("--concat expects a+b, got '" + spec + "'");
    const auto find = [&](const std::string& n) -> const assoc::Embedding& {
      for (const auto& [name, e] : embeddings)
        if (name == n) return e;
      throw assoc::ConfigError("--concat names unknown embedding '" + n + "'");
    };
    const auto& a = find(spec.substr(0, plus));
    const auto& b = find(spec.substr(plus + 1));
    embeddings.emplace_back(spec, assoc::concat_embeddings(a, b));
  }

  assoc::RidgeEvalOptions ro;
  if (!c.lambda_grid.empty()) ro.lambda_grid = c.lambda_grid;
  ro.folds = static_cast<int>(c.folds);
  ro.bootstrap_resamples = static_cast<int>(c.bootstrap);
  ro.test_fraction = c.test_fraction;
  ro.min_overlap = c.min_overlap;
  json results = json::array();
  for (const auto& [nname, table] : norms) {
    for (const auto& [ename, emb] : embeddings) {
      json row = {{"norm", nname}, {"embedding", ename}};
      try {
        row.update(to_json(assoc::ridge_cv_eval(emb, table, c.split_seed, ro)));
      } catch (const assoc::DataError& e) {
        row["error"] = e.what();
      }
      results.push_back(row);
    }
  }
  out.write_json("norms_report.json", {{"results", results}});
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw assoc::DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw assoc::DataError(path.string() + ": " + e.what());
  }
}

std::string csv_number(const json& v) { return v.is_null() ? "" : assoc::text::format_double(v.get<double>()); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

void cmd_report(const assoc::PipelineConfig& c, const Options& o, OutputDir& out, Manifest& m) {
  const fs::path dir = o.dir ? fs::path(*o.dir) : fs::path(c.out);
  int written = 0;

  std::vector<std::pair<std::string, fs::path>> metric_files;
  for (const auto& s : o.metrics_files) {
    auto [name, path] = named(s);
    metric_files.emplace_back(name, require_file(path, "metrics file " + name));
  }
  if (metric_files.empty() && fs::is_regular_file(dir / "metrics.json")) metric_files.emplace_back("network", dir / "metrics.json");
  if (!metric_files.empty()) {
    std::ostringstream t;
    t << "network,graph,nodes,edges,average_strength,aspl,avg_cc\n";
    for (const auto& [name, path] : metric_files) {
      m.input("metrics:" + name, path);
      const auto j = read_json(path);
      for (const char* g : {"graph", "random", "lattice"}) {
        if (!j.contains(g)) continue;
        const auto& x = j[g];
        t << csv_field(name) << ',' << g << ',' << x["n_nodes"].get<std::int64_t>() << ',' << x["n_edges"].get<std::int64_t>()
          << ',' << csv_number(x["average_strength"]) << ',' << csv_number(x["aspl_weighted_directed"]) << ','
          << csv_number(x["avg_cc_unweighted_directed"]) << '\n';
      }
    }
    out.write("network_metrics.csv", t.str());
    ++written;
  }

  if (fs::is_regular_file(dir / "ldt_report.json")) {
    m.input("ldt_report", dir / "ldt_report.json");
    const auto j = read_json(dir / "ldt_report.json");
    std::ostringstream t;
    t << "group,source,n,abs_r,ci_lo,ci_hi,steiger_z,steiger_p,relative_gain\n";
    for (const auto& g : j["groups"]) {
      for (const char* src : {"assoc_frequency", "corpus_frequency"}) {
        const auto& r = g[src];
        const double rv = r["r"].get<double>();
        // Absolute values; the interval is mirrored along with r.
        const double lo = rv < 0 ? -r["ci_hi"].get<double>() : r["ci_lo"].get<double>();
        const double hi = rv < 0 ? -r["ci_lo"].get<double>() : r["ci_hi"].get<double>();
        t << csv_field(g["group"].get<std::string>()) << ',' << src << ',' << g["n"].get<std::int64_t>() << ','
          << assoc::text::format_double(std::abs(rv)) << ',' << assoc::text::format_double(lo) << ','
          << assoc::text::format_double(hi) << ',' << csv_number(g["steiger"]["z"]) << ',' << csv_number(g["steiger"]["p"])
          << ',' << csv_number(g["relative_gain"]) << '\n';
      }
    }
    out.write("ldt_correlations.csv", t.str());
    ++written;
  }

  if (fs::is_regular_file(dir / "relatedness_report.json")) {
    m.input("relatedness_report", dir / "relatedness_report.json");
    const auto j = read_json(dir / "relatedness_report.json");
    std::ostringstream t;
    t << "dataset,model,r,ci_lo,ci_hi,n_covered,n_pairs,coverage\n";
    for (const auto& r : j["results"]) {
      if (r.contains("error")) continue;
      t << csv_field(r["dataset"].get<std::string>()) << ',' << csv_field(r["model"].get<std::string>()) << ','
        << csv_number(r["correlation"]["r"]) << ',' << csv_number(r["correlation"]["ci_lo"]) << ','
        << csv_number(r["correlation"]["ci_hi"]) << ',' << r["n_covered"].get<std::int64_t>() << ','
        << r["n_pairs"].get<std::int64_t>() << ',' << csv_number(r["coverage"]) << '\n';
    }
    out.write("relatedness.csv", t.str());
    ++written;
  }

  if (fs::is_regular_file(dir / "norms_report.json")) {
    m.input("norms_report", dir / "norms_report.json");
    const auto j = read_json(dir / "norms_report.json");
    std::ostringstream t;
    t << "norm,embedding,r2,ci_lo,ci_hi,lambda,mean_cv_r2,n_overlap\n";
    for (const auto& r : j["results"]) {
      if (r.contains("error")) continue;
      t << csv_field(r["norm"].get<std::string>()) << ',' << csv_field(r["embedding"].get<std::string>()) << ','
        << csv_number(r["r2_test"]) << ',' << csv_number(r["ci_lo"]) << ',' << csv_number(r["ci_hi"]) << ','
        << csv_number(r["lambda_selected"]) << ',' << csv_number(r["mean_cv_r2"]) << ','
        << r["n_overlap"].get<std::int64_t>() << '\n';
    }
    out.write("norm_decoding.csv", t.str());
    ++written;
  }
  if (written == 0) throw assoc::DataError("report: no analysis outputs found in " + dir.string());
}

std::string json_escape_line(const std::string& kind, int code, const std::string& message) {
  return json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Association-norms processing pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "key = value config file");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "master seed");

  auto* ingest = app.add_subcommand("ingest", "validate and canonicalize a trial table");
  auto* filter = app.add_subcommand("filter", "participant exclusion");
  auto* whitelist = app.add_subcommand("whitelist", "spelling normalization and whitelisting");
  auto* balance = app.add_subcommand("balance", "keep cues with enough trials and sample a fixed number");
  auto* stats = app.add_subcommand("stats", "token, type, coverage and demographic statistics");
  auto* matrix = app.add_subcommand("matrix", "cue x response matrix, PPMI, SVD");
  auto* graph = app.add_subcommand("graph", "cue-cue network and metrics");
  auto* match = app.add_subcommand("match", "subsample to a given cue and trial count");
  auto* eval_ldt = app.add_subcommand("eval-ldt", "lexical decision latencies vs log frequency");
  auto* eval_rel = app.add_subcommand("eval-relatedness", "relatedness judgments vs model similarity");
  auto* eval_norms = app.add_subcommand("eval-norms", "ridge decoding of word ratings");
  auto* report = app.add_subcommand("report", "summary tables as CSV");

  for (auto* sub : {ingest, filter, whitelist, balance, stats, matrix, graph, match})
    sub->add_option("--input", o.input, "trial table (TSV)");
  for (auto* sub : {filter, whitelist}) sub->add_option("--lexicon", o.lexicon, "word list, one per line");

  whitelist->add_flag("--wiki", o.wiki, "enable the Wikipedia stage");
  whitelist->add_flag("--no-wiki", o.no_wiki, "disable the Wikipedia stage");
  whitelist->add_flag("--llm", o.llm, "enable the LLM stage");
  whitelist->add_flag("--no-llm", o.no_llm, "disable the LLM stage");
  whitelist->add_option("--wiki-url", o.wiki_url, "Wikipedia base URL");
  whitelist->add_option("--llm-url", o.llm_url, "chat-completion endpoint");
  whitelist->add_option("--llm-model", o.llm_model, "model id");
  whitelist->add_option("--cache-dir", o.cache_dir, "response cache directory");
  whitelist->add_option("--max-in-flight", o.max_in_flight, "concurrent client requests");
  whitelist->add_option("--gold", o.gold, "gold corrections TSV (cue, raw, gold)");
  whitelist->add_flag("--drop-unresolved", o.drop_unresolved, "mark unresolved responses as missing");

  balance->add_option("--min-trials", o.min_trials, "minimum trials per cue");
  balance->add_option("--sample-size", o.sample_size, "trials sampled per cue");

  matrix->add_option("--transform", o.transform, "raw, ppmi or svd")->check(CLI::IsMember({"raw", "ppmi", "svd"}));
  matrix->add_option("--min-freq", o.min_freq, "minimum total frequency of a response type");
  matrix->add_option("--k", o.svd_k, "SVD dimensions");

  graph->add_option("--edges", o.edges, "edge list TSV");
  graph->add_option("--counts", o.counts, "count triplets from `matrix`");
  graph->add_flag("--metrics", o.metrics, "compute network metrics");
  graph->add_flag("--baselines", o.baselines, "add random and lattice baselines");
  graph->add_flag("--scc", o.scc, "restrict to the largest strongly connected component");
  graph->add_option("--distance", o.distance, "inverse_weight or weight");

  match->add_option("--cues", o.match_cues, "number of cues")->required();
  match->add_option("--trials-per-cue", o.match_trials, "trials per cue")->required();

  eval_ldt->add_option("--frequency", o.frequency, "association frequency (from `matrix`)");
  eval_ldt->add_option("--corpus-frequency", o.corpus_frequency, "corpus frequency TSV");
  eval_ldt->add_option("--ldt", o.ldt, "LDT TSV (word, mean_rt, group)");

  eval_rel->add_option("--judgments", o.judgments, "name=path, repeatable");
  eval_rel->add_option("--embedding", o.embeddings, "name=path, repeatable");
  eval_rel->add_option("--ppmi-counts", o.ppmi_counts, "count triplets; PPMI row cosine model");
  eval_rel->add_option("--rw-counts", o.rw_counts, "count triplets; random-walk model on the largest SCC");
  eval_rel->add_option("--alpha", o.alpha, "random-walk decay");
  eval_rel->add_option("--steps", o.steps, "random-walk steps");
  eval_rel->add_flag("--closed-form", o.closed_form, "use the matrix inverse instead of the series");

  eval_norms->add_option("--norms", o.norms, "name=path, repeatable");
  eval_norms->add_option("--embedding", o.embeddings, "name=path, repeatable");
  eval_norms->add_option("--concat", o.concat, "a+b, repeatable");
  eval_norms->add_option("--split-seed", o.split_seed, "train/test split seed");
  eval_norms->add_option("--bootstrap", o.bootstrap, "bootstrap resamples");

  report->add_option("--dir", o.dir, "directory holding analysis outputs (default: --out)");
  report->add_option("--metrics", o.metrics_files, "name=path of metrics.json, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json_escape_line("config", 2, e.what()) << '\n';
    return 2;
  }

  try {
    const auto config = resolve_config(o);
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    OutputDir out(config.out);
    Manifest manifest(name, config);
    if (name == "ingest") cmd_ingest(config, out, manifest);
    else if (name == "filter") cmd_filter(config, out, manifest);
    else if (name == "whitelist") cmd_whitelist(config, out, manifest, o.drop_unresolved);
    else if (name == "balance") cmd_balance(config, out, manifest);
    else if (name == "stats") cmd_stats(config, out, manifest);
    else if (name == "matrix") cmd_matrix(config, out, manifest, o.transform);
    else if (name == "graph") cmd_graph(config, o, out, manifest);
    else if (name == "match") cmd_match(config, o, out, manifest);
    else if (name == "eval-ldt") cmd_eval_ldt(config, o, out, manifest);
    else if (name == "eval-relatedness") cmd_eval_relatedness(config, o, out, manifest);
    else if (name == "eval-norms") cmd_eval_norms(config, o, out, manifest);
    else if (name == "report") cmd_report(config, o, out, manifest);
    manifest.finish(out);
  } catch (const assoc::Error& e) {
    std::cerr << json_escape_line(e.kind(), e.exit_code(), e.what()) << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << json_escape_line("internal", 1, e.what()) << '\n';
    return 1;
  }
  return 0;
}
