#pragma once

#include <json.hpp>

#include "assoc/evalsuite.hpp"
#include "assoc/ingest.hpp"
#include "assoc/preprocess.hpp"
#include "assoc/semnet.hpp"

namespace assocnorms {

using nlohmann::json;

json to_json(const assoc::DatasetStats& s);
json to_json(const assoc::Demographics& d);
json to_json(const assoc::FilterReport& r);
json to_json(const assoc::StageReport& r);
json to_json(const assoc::BalanceReport& r);
json to_json(const assoc::NetworkMetrics& m);
json to_json(const assoc::CorrelationResult& c);
json to_json(const assoc::SteigerResult& s);
json to_json(const assoc::LdtGroupResult& g);
json to_json(const assoc::RelatednessResult& r);
json to_json(const assoc::RidgeEvalResult& r);

}  // namespace assocnorms
