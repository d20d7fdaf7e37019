#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "rlcf/env/action_space.hpp"
#include "rlcf/env/preprocess.hpp"

namespace rlcf {

// Remote-policy protocol.
//   request:  {"frames": 4, "height": h, "width": w, "data": [4*h*w floats]}
//   response: {"action": id, "values": [k floats]}   ("values" optional)
nlohmann::json observation_to_json(const AgentObservation &obs);
AgentObservation observation_from_json(const nlohmann::json &j);

struct PolicyReply {
  ActionId action = 0;
  std::optional<std::vector<double>> values;
};

nlohmann::json reply_to_json(const PolicyReply &reply);
PolicyReply reply_from_json(const nlohmann::json &j);

} // namespace rlcf
