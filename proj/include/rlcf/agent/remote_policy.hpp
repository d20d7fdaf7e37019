#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "rlcf/agent/policy.hpp"

namespace rlcf {

// Policy served by another process over the remote-policy protocol
// (POST <base_url>/api/policy/<agent_id>/act). Lets deep agents trained
// elsewhere plug into collection and evaluation unchanged.
class RemotePolicy final : public Policy {
public:
  RemotePolicy(std::string host, int port, std::string agent_id,
               ActionSpace actions);
  ~RemotePolicy() override;

  ActionId act(const AgentObservation &obs) const override;
  std::optional<std::vector<double>>
  action_values(const AgentObservation &obs) const override;
  const ActionSpace &action_space() const override { return actions_; }
  const std::string &agent_id() const override { return agent_id_; }

private:
  struct Client;
  struct Reply;
  Reply query(const AgentObservation &obs) const;

  std::string agent_id_;
  ActionSpace actions_;
  std::unique_ptr<Client> client_;
  mutable std::mutex mutex_;
};

} // namespace rlcf
