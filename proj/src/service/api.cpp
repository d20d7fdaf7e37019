#include "rlcf/service/api.hpp"

#include <fstream>

#include <httplib.h>

#include "rlcf/agent/tabular.hpp"
#include "rlcf/agent/wire.hpp"
#include "rlcf/core/error.hpp"
#include "rlcf/core/hash.hpp"
#include "rlcf/gan/checkpoint.hpp"

using nlohmann::json;

namespace rlcf::service {
namespace {

ApiResponse fail(int status, const std::string &message) {
  return {status, error_body(status, message)};
}

json read_json_file(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in)
    throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

// Parses an explicit target given as id or action name.
std::optional<ActionId> parse_target(const json &t, const ActionSpace &actions) {
  if (t.is_number_integer()) {
    const int a = t.get<int>();
    return actions.contains(a) ? std::optional<ActionId>(a) : std::nullopt;
  }
  if (t.is_string()) {
    for (ActionId a = 0; a < actions.size(); ++a)
      if (actions.name(a) == t.get<std::string>())
        return a;
  }
  return std::nullopt;
}

} // namespace

json error_body(int status, const std::string &message) {
  return {{"error", message}, {"status", status}};
}

json action_json(const ActionSpace &actions, ActionId a) {
  return {{"id", a}, {"name", actions.name(a)}};
}

ApiService::ApiService(std::shared_ptr<ImageStore> images) : images_(std::move(images)) {}

std::unique_ptr<ApiService> ApiService::from_workspace(const Workspace &ws) {
  auto api = std::make_unique<ApiService>(
      std::make_shared<ImageStore>(ws.dir("images"), /*write_to_disk=*/false));
  for (const auto &a : ws.list("agent")) {
    auto policy = std::make_shared<TabularPolicy>(load_policy(ws.resolve(a).string()));
    const EnvConfig env = policy->env_config();
    api->add_agent(policy, env, a.meta);
  }
  for (const auto &g : ws.list("generator")) {
    auto t = std::make_shared<gan::GanTranslator>(ws.resolve(g).string(), g.id);
    api->add_generator(g.id, t, g.meta.value("agent_id", ""), g.meta);
  }
  for (const auto &h : ws.list("highlights"))
    api->add_highlights(h.id, read_json_file(ws.resolve(h)));
  for (const auto &r : ws.list("report"))
    api->add_report(r.id, read_json_file(ws.resolve(r)));
  return api;
}

void ApiService::add_agent(std::shared_ptr<const Policy> policy, EnvConfig env_config, json meta) {
  const std::string id = policy->agent_id();
  agents_[id] = {std::move(policy), std::move(env_config), std::move(meta)};
}

void ApiService::add_generator(const std::string &id, std::shared_ptr<const Translator> translator,
                               const std::string &agent_id, json meta) {
  generators_[id] = {std::move(translator), agent_id, std::move(meta)};
}

void ApiService::add_highlights(const std::string &agent_id, json highlights) {
  highlights_[agent_id] = std::move(highlights);
}

void ApiService::add_report(const std::string &generator_id, json report) {
  reports_[generator_id] = std::move(report);
}

ApiResponse ApiService::agents() const {
  json out = json::array();
  for (const auto &[id, a] : agents_)
    out.push_back({{"agent_id", id},
                   {"env_id", a.env_config.env_id},
                   {"actions", a.policy->action_space().names()},
                   {"has_highlights", highlights_.contains(id)},
                   {"meta", a.meta}});
  return {200, out};
}

ApiResponse ApiService::generators() const {
  json out = json::array();
  for (const auto &[id, g] : generators_)
    out.push_back({{"generator_id", id},
                   {"agent_id", g.agent_id},
                   {"has_report", reports_.contains(id)},
                   {"meta", g.meta}});
  return {200, out};
}

ApiResponse ApiService::highlights(const std::string &agent_id) const {
  auto it = highlights_.find(agent_id);
  if (it == highlights_.end())
    return fail(404, "no highlights for agent '" + agent_id + "'");
  return {200, it->second};
}

ApiResponse ApiService::report(const std::string &generator_id) const {
  auto it = reports_.find(generator_id);
  if (it == reports_.end())
    return fail(404, "no report for generator '" + generator_id + "'");
  return {200, it->second};
}

ApiResponse ApiService::explain(const json &body) {
  if (!body.is_object() || !body.contains("state_id") || !body["state_id"].is_string() ||
      !body.contains("target_action"))
    return fail(400, "body needs state_id (string) and target_action (id, name or \"auto\")");

  // Generator: explicit, else the only/first one.
  std::string gen_id = body.value("generator", "");
  if (gen_id.empty()) {
    if (generators_.empty())
      return fail(404, "no generators loaded");
    gen_id = generators_.begin()->first;
  }
  const auto git = generators_.find(gen_id);
  if (git == generators_.end())
    return fail(404, "unknown generator '" + gen_id + "'");
  const std::string agent_id = body.value("agent", git->second.agent_id);
  const auto ait = agents_.find(agent_id);
  if (ait == agents_.end())
    return fail(404, "unknown agent '" + agent_id + "'");
  const Policy &policy = *ait->second.policy;
  const ActionSpace &actions = policy.action_space();

  const std::string state_id = body["state_id"].get<std::string>();
  const auto state = images_->get_image(state_id);
  if (!state)
    return fail(404, "unknown state '" + state_id + "'");

  const json &t = body["target_action"];
  const bool automatic = t.is_string() && t.get<std::string>() == "auto";
  const std::string key = content_id(gen_id + "|" + agent_id + "|" + state_id + "|" + t.dump());
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = results_.find(key); it != results_.end())
      return {200, it->second.body};
  }

  ActionId target = 0;
  if (automatic) {
    const ActionId original = act_greedy(policy, agent_view(*state));
    Rng rng(mix_seed(std::stoull(state_id, nullptr, 16), static_cast<std::uint64_t>(original)));
    const auto chosen =
        select_target_action(maze_context(*state, ait->second.env_config), original, actions, rng);
    if (!chosen)
      return fail(400, "no admissible automatic target for this state");
    target = *chosen;
  } else {
    const auto parsed = parse_target(t, actions);
    if (!parsed)
      return fail(400, "target_action " + t.dump() + " is not an action of agent '" + agent_id + "'");
    target = *parsed;
  }

  StateImage s;
  s.pixels = *state;
  s.env_id = ait->second.env_config.env_id;
  CounterfactualResult r;
  try {
    r = ::rlcf::explain(*git->second.translator, policy, s, target);
  } catch (const ShapeError &e) {
    return fail(400, e.what());
  }
  const std::string generated_id = images_->put(r.generated.pixels);

  json out = {{"result_id", key},
              {"generator", gen_id},
              {"agent_id", agent_id},
              {"state_id", state_id},
              {"target_mode", automatic ? "auto" : "explicit"},
              {"original_action", action_json(actions, r.original_action)},
              {"target_action", action_json(actions, r.target_action)},
              {"realized_action", action_json(actions, r.realized_action)},
              {"valid", r.valid},
              {"proximity", r.proximity},
              {"sparsity", r.sparsity},
              {"generation_seconds", r.generation_seconds},
              {"original_image", image_url(state_id)},
              {"generated_image", image_url(generated_id)}};
  std::lock_guard lock(cache_mutex_);
  // A concurrent identical request may have won; keep the first answer.
  auto [it, inserted] = results_.emplace(key, CachedResult{out, *state, r.generated.pixels});
  return {200, it->second.body};
}

ApiResponse ApiService::interpolate(const std::string &result_id, int steps) {
  if (steps < 2 || steps > 101)
    return fail(400, "steps must lie in [2, 101]");
  CachedResult cached;
  {
    std::lock_guard lock(cache_mutex_);
    auto it = results_.find(result_id);
    if (it == results_.end())
      return fail(404, "unknown result '" + result_id + "'");
    cached = it->second;
  }
  const auto seq = rlcf::interpolate(cached.original, cached.generated, steps);
  json frames = json::array();
  for (const auto &f : seq.frames)
    frames.push_back(image_url(images_->put(f)));
  return {200, {{"result_id", result_id}, {"steps", steps}, {"frames", frames}}};
}

ApiResponse ApiService::policy_act(const std::string &agent_id, const json &body) const {
  const auto it = agents_.find(agent_id);
  if (it == agents_.end())
    return fail(404, "unknown agent '" + agent_id + "'");
  AgentObservation obs;
  try {
    obs = observation_from_json(body);
  } catch (const std::exception &e) {
    return fail(400, e.what());
  }
  PolicyReply reply;
  reply.values = it->second.policy->action_values(obs);
  reply.action = it->second.policy->act(obs);
  return {200, reply_to_json(reply)};
}

void ApiService::mount(httplib::Server &server) {
  auto send = [](httplib::Response &res, const ApiResponse &r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request &req) -> std::optional<json> {
    try {
      return json::parse(req.body);
    } catch (const json::exception &) {
      return std::nullopt;
    }
  };

  server.Get("/api/agents", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, agents());
  });
  server.Get("/api/generators", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, generators());
  });
  server.Get(R"(/api/highlights/([^/]+))",
             [this, send](const httplib::Request &req, httplib::Response &res) {
               send(res, highlights(req.matches[1]));
             });
  server.Get(R"(/api/report/([^/]+))",
             [this, send](const httplib::Request &req, httplib::Response &res) {
               send(res, report(req.matches[1]));
             });
  server.Post("/api/explain",
              [this, send, parse_body](const httplib::Request &req, httplib::Response &res) {
                const auto body = parse_body(req);
                send(res, body ? explain(*body) : ApiResponse{400, error_body(400, "malformed JSON body")});
              });
  server.Get(R"(/api/interpolate/([^/]+))",
             [this, send](const httplib::Request &req, httplib::Response &res) {
               int steps = kDefaultInterpolationSteps;
               if (req.has_param("steps")) {
                 try {
                   std::size_t used = 0;
                   const std::string v = req.get_param_value("steps");
                   steps = std::stoi(v, &used);
                   if (used != v.size())
                     throw std::invalid_argument(v);
                 } catch (const std::exception &) {
                   send(res, {400, error_body(400, "steps must be an integer")});
                   return;
                 }
               }
               send(res, interpolate(req.matches[1], steps));
             });
  server.Post(R"(/api/policy/([^/]+)/act)",
              [this, send, parse_body](const httplib::Request &req, httplib::Response &res) {
                const auto body = parse_body(req);
                send(res, body ? policy_act(req.matches[1], *body)
                               : ApiResponse{400, error_body(400, "malformed JSON body")});
              });
  server.Get(R"(/images/([0-9a-f]+)\.png)",
             [this, send](const httplib::Request &req, httplib::Response &res) {
               const auto bytes = images_->get(req.matches[1]);
               if (!bytes) {
                 send(res, {404, error_body(404, "unknown image")});
                 return;
               }
               res.set_content(std::string(bytes->begin(), bytes->end()), "image/png");
             });
  server.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (res.body.empty())
      res.set_content(error_body(res.status, "not found").dump(), "application/json");
  });
}

void serve(ApiService &api, const std::string &host, int port) {
  httplib::Server server;
  api.mount(server);
  if (!server.listen(host, port))
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace rlcf::service
