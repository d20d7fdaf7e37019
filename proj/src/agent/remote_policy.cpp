#include "rlcf/agent/remote_policy.hpp"

#include <httplib.h>

#include "rlcf/agent/wire.hpp"

namespace rlcf {

struct RemotePolicy::Client {
  httplib::Client http;
  Client(const std::string &host, int port) : http(host, port) {}
};

struct RemotePolicy::Reply {
  PolicyReply body;
};

RemotePolicy::RemotePolicy(std::string host, int port, std::string agent_id,
                           ActionSpace actions)
    : agent_id_(std::move(agent_id)), actions_(std::move(actions)),
      client_(std::make_unique<Client>(host, port)) {
  client_->http.set_connection_timeout(5);
  client_->http.set_read_timeout(30);
}

RemotePolicy::~RemotePolicy() = default;

RemotePolicy::Reply RemotePolicy::query(const AgentObservation &obs) const {
  const std::string body = observation_to_json(obs).dump();
  httplib::Result res;
  {
    std::lock_guard lock(mutex_);
    res = client_->http.Post("/api/policy/" + agent_id_ + "/act", body,
                             "application/json");
  }
  if (!res)
    throw std::runtime_error("remote policy '" + agent_id_ +
                             "': " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw std::runtime_error("remote policy '" + agent_id_ + "': HTTP " +
                             std::to_string(res->status) + " " + res->body);
  Reply r{reply_from_json(nlohmann::json::parse(res->body))};
  if (!actions_.contains(r.body.action))
    throw std::runtime_error("remote policy returned an out-of-range action");
  if (r.body.values && r.body.values->size() !=
                           static_cast<std::size_t>(actions_.size()))
    throw std::runtime_error("remote policy returned a value vector of the "
                             "wrong length");
  return r;
}

ActionId RemotePolicy::act(const AgentObservation &obs) const {
  return query(obs).body.action;
}

std::optional<std::vector<double>>
RemotePolicy::action_values(const AgentObservation &obs) const {
  return query(obs).body.values;
}

} // namespace rlcf
