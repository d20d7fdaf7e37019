#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "rlcf/agent/policy.hpp"
#include "rlcf/counterfactual/counterfactual.hpp"
#include "rlcf/env/env_config.hpp"
#include "rlcf/service/workspace.hpp"

namespace httplib {
class Server;
}

namespace rlcf::service {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// JSON body of an error response.
nlohmann::json error_body(int status, const std::string &message);

nlohmann::json action_json(const ActionSpace &actions, ActionId a);

// Read-only view over loaded agents, generators, highlights and reports.
// Handlers are safe to call concurrently.
class ApiService {
public:
  // Empty service; artifacts are added with the add_* calls.
  explicit ApiService(std::shared_ptr<ImageStore> images);
  // Loads every agent, generator, highlight set and report in the index.
  // Generated images go to memory; the workspace is never modified.
  static std::unique_ptr<ApiService> from_workspace(const Workspace &ws);

  void add_agent(std::shared_ptr<const Policy> policy, EnvConfig env_config,
                 nlohmann::json meta = nlohmann::json::object());
  void add_generator(const std::string &id, std::shared_ptr<const Translator> translator,
                     const std::string &agent_id, nlohmann::json meta = nlohmann::json::object());
  void add_highlights(const std::string &agent_id, nlohmann::json highlights);
  void add_report(const std::string &generator_id, nlohmann::json report);

  ApiResponse agents() const;
  ApiResponse generators() const;
  ApiResponse highlights(const std::string &agent_id) const;
  // body: {state_id, target_action: id | name | "auto", generator?, agent?}
  ApiResponse explain(const nlohmann::json &body);
  ApiResponse interpolate(const std::string &result_id, int steps);
  ApiResponse report(const std::string &generator_id) const;
  // Remote-policy protocol: observation JSON in, {action, values} out.
  ApiResponse policy_act(const std::string &agent_id, const nlohmann::json &body) const;

  ImageStore &images() { return *images_; }

  void mount(httplib::Server &server);

private:
  struct AgentEntry {
    std::shared_ptr<const Policy> policy;
    EnvConfig env_config;
    nlohmann::json meta;
  };
  struct GeneratorEntry {
    std::shared_ptr<const Translator> translator;
    std::string agent_id;
    nlohmann::json meta;
  };
  struct CachedResult {
    nlohmann::json body;
    Image original;
    Image generated;
  };

  std::shared_ptr<ImageStore> images_;
  std::map<std::string, AgentEntry> agents_;
  std::map<std::string, GeneratorEntry> generators_;
  std::map<std::string, nlohmann::json> highlights_;
  std::map<std::string, nlohmann::json> reports_;
  std::mutex cache_mutex_;
  std::map<std::string, CachedResult> results_;
};

// Blocks until the server stops.
void serve(ApiService &api, const std::string &host, int port);

} // namespace rlcf::service
