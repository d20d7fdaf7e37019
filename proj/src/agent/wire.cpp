#include "rlcf/agent/wire.hpp"

#include <cmath>

#include "rlcf/core/error.hpp"

namespace rlcf {

nlohmann::json observation_to_json(const AgentObservation &obs) {
  return {{"frames", AgentObservation::frames},
          {"height", obs.height},
          {"width", obs.width},
          {"data", obs.data}};
}

AgentObservation observation_from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw ShapeError("observation: expected an object");
  if (j.value("frames", 0) != AgentObservation::frames)
    throw ShapeError("observation: frames must be 4");
  AgentObservation obs;
  obs.height = j.at("height").get<int>();
  obs.width = j.at("width").get<int>();
  obs.data = j.at("data").get<std::vector<float>>();
  if (obs.height <= 0 || obs.width <= 0 ||
      obs.data.size() != static_cast<std::size_t>(4 * obs.height * obs.width))
    throw ShapeError("observation: data size does not match 4*height*width");
  for (float v : obs.data)
    if (!(v >= 0.0f && v <= 1.0f))
      throw ShapeError("observation: values must be in [0,1]");
  return obs;
}

nlohmann::json reply_to_json(const PolicyReply &reply) {
  nlohmann::json j = {{"action", reply.action}};
  if (reply.values)
    j["values"] = *reply.values;
  return j;
}

PolicyReply reply_from_json(const nlohmann::json &j) {
  PolicyReply r;
  r.action = j.at("action").get<ActionId>();
  if (j.contains("values"))
    r.values = j.at("values").get<std::vector<double>>();
  return r;
}

} // namespace rlcf
