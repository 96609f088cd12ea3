#include "reports.hpp"

namespace assocnorms {

json to_json(const assoc::DatasetStats& s) {
  return {
      {"n_participants", s.n_participants},
      {"n_trials", s.n_trials},
      {"n_tokens", s.n_tokens},
      {"tokens_r1", s.tokens_by_position[0]},
      {"tokens_r2", s.tokens_by_position[1]},
      {"tokens_r3", s.tokens_by_position[2]},
      {"n_types", s.n_types},
      {"n_one_off_types", s.n_one_off_types},
      {"n_covered_tokens", s.n_covered_tokens},
      {"one_off_type_fraction", s.one_off_type_fraction},
      {"one_off_token_fraction", s.one_off_token_fraction},
      {"coverage_fraction", s.coverage_fraction},
  };
}

namespace {

json categories(const std::vector<assoc::CategoryCount>& v) {
  json out = json::array();
  for (const auto& c : v)
    out.push_back({{"label", c.label}, {"count", c.count}, {"percent", c.percent}, {"percent_reported", c.percent_reported}});
  return out;
}

json criteria(const std::array<std::int64_t, assoc::kCriterionCount>& v) {
  json out = json::object();
  for (std::size_t i = 0; i < v.size(); ++i) out[assoc::to_string(static_cast<assoc::Criterion>(i))] = v[i];
  return out;
}

}  // namespace

json to_json(const assoc::Demographics& d) {
  json out = {
      {"n_participants", d.n_participants},
      {"gender", categories(d.gender)},
      {"native_language", categories(d.native_language)},
      {"education", categories(d.education)},
      {"age_histogram", categories(d.age_histogram)},
      {"n_with_age", d.n_with_age},
      {"mean_age", d.mean_age},
      {"sd_age", d.sd_age},
  };
  out["min_age"] = d.min_age ? json(*d.min_age) : json(nullptr);
  out["max_age"] = d.max_age ? json(*d.max_age) : json(nullptr);
  return out;
}

json to_json(const assoc::FilterReport& r) {
  json fractions = json::object();
  for (std::size_t i = 0; i < assoc::kCriterionCount; ++i) {
    const auto c = static_cast<assoc::Criterion>(i);
    fractions[assoc::to_string(c)] = r.criterion_fraction(c);
  }
  return {
      {"total_participants", r.total_participants},
      {"total_trials", r.total_trials},
      {"excluded_by_criterion", criteria(r.excluded_by_criterion)},
      {"trials_by_criterion", criteria(r.trials_by_criterion)},
      {"criterion_fraction", fractions},
      {"excluded_participants", r.excluded_participants},
      {"retained_participants", r.retained_participants},
      {"retained_trials", r.retained_trials},
      {"retained_participant_fraction", r.retained_participant_fraction()},
      {"retained_trial_fraction", r.retained_trial_fraction()},
  };
}

json to_json(const assoc::StageReport& r) {
  json by_stage = json::object();
  for (std::size_t i = 0; i < r.resolved_by_stage.size(); ++i)
    by_stage[assoc::to_string(static_cast<assoc::Stage>(i))] = r.resolved_by_stage[i];
  const auto cum = r.cumulative_fractions();
  json cumulative = json::object();
  for (std::size_t i = 0; i < cum.size(); ++i) cumulative[assoc::to_string(static_cast<assoc::Stage>(i))] = cum[i];
  return {{"total", r.total}, {"resolved_by_stage", by_stage}, {"cumulative_fraction", cumulative}, {"client_errors", r.client_errors}};
}

json to_json(const assoc::BalanceReport& r) {
  return {
      {"cues_in", r.cues_in},
      {"cues_dropped", r.cues_dropped},
      {"cues_retained", r.cues_retained},
      {"trials_in", r.trials_in},
      {"trials_removed_dropped_cues", r.trials_removed_dropped_cues},
      {"trials_removed_sampling", r.trials_removed_sampling},
      {"trials_out", r.trials_out},
      {"dropped_cue_fraction", r.dropped_cue_fraction()},
      {"removed_trial_fraction", r.removed_trial_fraction()},
      {"dropped_cues", r.dropped_cues},
  };
}

json to_json(const assoc::NetworkMetrics& m) {
  return {
      {"n_nodes", m.n_nodes},
      {"n_edges", m.n_edges},
      {"average_strength", m.average_strength},
      {"aspl_weighted_directed", m.aspl_weighted_directed},
      {"reachable_pairs", m.reachable_pairs},
      {"unreachable_pairs", m.unreachable_pairs},
      {"avg_cc_unweighted_directed", m.avg_cc_unweighted_directed},
  };
}

json to_json(const assoc::CorrelationResult& c) {
  return {{"r", c.r}, {"n", c.n}, {"ci_lo", c.ci_lo}, {"ci_hi", c.ci_hi}};
}

json to_json(const assoc::SteigerResult& s) {
  return {{"z", s.z}, {"p", s.p}, {"r12", s.r12}, {"r13", s.r13}, {"r23", s.r23}, {"n", s.n}};
}

json to_json(const assoc::LdtGroupResult& g) {
  return {
      {"group", g.group},
      {"n", g.n},
      {"assoc_frequency", to_json(g.assoc_freq)},
      {"corpus_frequency", to_json(g.corpus_freq)},
      {"r_between", g.r_between},
      {"steiger", to_json(g.steiger)},
      {"relative_gain", g.relative_gain},
  };
}

json to_json(const assoc::RelatednessResult& r) {
  return {{"correlation", to_json(r.correlation)}, {"n_pairs", r.n_pairs}, {"n_covered", r.n_covered}, {"coverage", r.coverage()}};
}

json to_json(const assoc::RidgeEvalResult& r) {
  return {
      {"r2_test", r.r2_test},
      {"ci_lo", r.ci_lo},
      {"ci_hi", r.ci_hi},
      {"lambda_selected", r.lambda_selected},
      {"fold_r2", r.fold_r2},
      {"mean_cv_r2", r.mean_cv_r2},
      {"n_overlap", r.n_overlap},
      {"n_train", r.n_train},
      {"n_test", r.n_test},
  };
}

}  // namespace assocnorms
