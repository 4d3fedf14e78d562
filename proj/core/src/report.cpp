// SPDX-License-Identifier: Apache-2.0
#include <nlohmann/json.hpp>

#include "rwfbm/verify.hpp"

namespace rwfbm {

namespace {

nlohmann::ordered_json fields_json(const ReportFields& fields) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, value] : fields)
    std::visit([&, k = key](const auto& v) { j[k] = v; }, value);
  return j;
}

} // namespace

std::string to_ndjson(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["check"] = r.check;
  j["seed"] = r.seed;
  j["config"] = fields_json(r.config);
  j["replicas"] = r.replicas;
  j["statistic"] = r.statistic;
  j["bound"] = r.bound;
  j["pass"] = r.pass;
  j["hard_failure"] = r.hard_failure;
  j["notes"] = r.notes;
  j["details"] = fields_json(r.details);
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

} // namespace rwfbm
