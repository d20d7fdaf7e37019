// Command-line front end: agent training, dataset collection, GAN training,
// evaluation, counterfactual generation, highlights and the HTTP service.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlcf/agent/rollout.hpp"
#include "rlcf/agent/tabular.hpp"
#include "rlcf/core/error.hpp"
#include "rlcf/core/png.hpp"
#include "rlcf/counterfactual/counterfactual.hpp"
#include "rlcf/dataset/dataset.hpp"
#include "rlcf/gan/checkpoint.hpp"
#include "rlcf/gan/trainer.hpp"
#include "rlcf/metrics/metrics.hpp"
#include "rlcf/service/api.hpp"
#include "rlcf/service/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rlcf;
using service::Workspace;

namespace {

void write_json(const fs::path &p, const json &j) {
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  out << j.dump(1) << '\n';
}

json read_json(const fs::path &p) {
  std::ifstream in(p);
  if (!in)
    throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

// Accepts a file path or the id of an indexed artifact.
fs::path resolve(const Workspace &ws, const std::string &kind, const std::string &arg) {
  if (fs::is_regular_file(arg))
    return arg;
  if (const auto a = ws.find(kind, arg))
    return ws.resolve(*a);
  if (kind == "dataset" && fs::is_regular_file(fs::path(arg) / "manifest.json"))
    return fs::path(arg) / "manifest.json";
  throw std::runtime_error("unknown " + kind + " '" + arg + "'");
}

std::string generator_agent(const Workspace &ws, const std::string &generator) {
  if (const auto a = ws.find("generator", generator))
    return a->meta.value("agent_id", "");
  return {};
}

void print_result(const json &j) { std::cout << j.dump() << std::endl; }

struct Common {
  std::string workspace;
  std::uint64_t seed = 0;
  int threads = 0;
};

Workspace open_workspace(const Common &c) {
  return Workspace(c.workspace.empty() ? Workspace::default_root() : fs::path(c.workspace));
}

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--workspace", c.workspace, "Workspace root (default $RLCF_WORKSPACE or ./workspace)");
  cmd->add_option("--seed", c.seed, "Random seed, recorded in the outputs");
}

// ------------------------------------------------------------------ commands

struct TrainAgentArgs {
  std::string profile, env, agent_id;
  std::int64_t steps = 200000;
};

void train_agent_cmd(const Common &c, const TrainAgentArgs &a) {
  Workspace ws = open_workspace(c);
  EnvConfig env = a.env.empty() ? EnvConfig::gridpac_default() : load_env_config(a.env);
  env.reward_profile = a.profile;
  env.validate();
  const std::string id = a.agent_id.empty() ? a.profile : a.agent_id;
  const auto policy =
      train_toy_agent(RewardProfile::by_name(a.profile), env, a.steps, c.seed, {}, id);

  const fs::path env_path = ws.dir("envs") / (env.env_id + ".json");
  save_env_config(env_path.string(), env);
  ws.record("env", env.env_id, env_path);

  const fs::path agent_path = ws.dir("agents") / (id + ".json");
  save_policy(agent_path.string(), policy);
  const auto eval = run_episodes(&policy, env, 50, mix_seed(c.seed, 99));
  const json meta = {{"profile", a.profile},
                     {"env_id", env.env_id},
                     {"steps", a.steps},
                     {"seed", c.seed},
                     {"mean_episode_length", mean_length(eval)},
                     {"mean_power_pills", mean_power_pills(eval)}};
  ws.record("agent", id, agent_path, meta);
  print_result({{"agent", id}, {"path", agent_path.string()}, {"eval", meta}});
}

struct CollectArgs {
  std::string agent, env, split = "fraction:0.1", exclude, dataset_id;
  int episodes = 0;
  double epsilon = 0.2;
  double validation = 0.0;
  int noop_max = 30;
  std::size_t target = 20000;
  int workers = 1;
  bool legacy = false;
};

void collect_cmd(const Common &c, const CollectArgs &a) {
  Workspace ws = open_workspace(c);
  const auto policy = load_policy(resolve(ws, "agent", a.agent).string());
  const EnvConfig env = a.env.empty() ? policy.env_config() : load_env_config(a.env);

  PipelineConfig pc;
  pc.collect.episodes = a.episodes;
  pc.collect.epsilon = a.epsilon;
  pc.collect.noop_max = a.noop_max;
  pc.collect.seed = c.seed;
  pc.collect.target_unique = a.target;
  pc.collect.workers = a.workers;
  pc.split = SplitConfig::parse(a.split);
  pc.split.validation_fraction = a.validation;
  pc.legacy_mode = a.legacy;
  pc.seed = c.seed;
  if (!a.exclude.empty())
    pc.exclude_ids = load_manifest(resolve(ws, "dataset", a.exclude).string()).ids("test");

  const auto result = run_pipeline(policy, env, pc);
  const std::string id =
      a.dataset_id.empty() ? policy.agent_id() + (a.legacy ? "-legacy" : "") : a.dataset_id;
  const auto manifest_path = write_dataset(ws.dir("datasets").string(), result, id);
  const auto &m = result.manifest;
  json meta = {{"agent_id", m.agent_id},
               {"legacy_mode", a.legacy},
               {"manifest_hash", manifest_hash(m)},
               {"stage_counts", m.stage_counts},
               {"seed", c.seed}};
  ws.record("dataset", id, manifest_path, meta);
  meta["dataset"] = id;
  meta["manifest"] = manifest_path;
  print_result(meta);
}

struct TrainGanArgs {
  std::string dataset, id, agent, select = "best";
  std::int64_t iters = 20000;
  int batch = 16;
  double lambda_cls = 1, lambda_rec = 10, lambda_gp = 10, lr = 1e-4;
  int critic_ratio = 5;
  int base_width = 32;
  std::int64_t checkpoint_every = 1000;
  int probe_states = 40;
  int log_every = 100;
};

void train_gan_cmd(const Common &c, const TrainGanArgs &a) {
  Workspace ws = open_workspace(c);
  gan::set_compute_threads(c.threads);
  const fs::path manifest_path = resolve(ws, "dataset", a.dataset);
  const DatasetManifest manifest = load_manifest(manifest_path.string());
  const auto train_set = load_split(manifest_path.string(), "train");
  const auto probe_set = load_split(manifest_path.string(), "validation");

  gan::ArchitectureConfig arch;
  arch.base_width = a.base_width;
  arch.num_actions = static_cast<int>(manifest.action_names.size());
  if (!train_set.empty()) {
    arch.source_height = train_set.front().image.pixels.height;
    arch.source_width = train_set.front().image.pixels.width;
  }
  gan::TrainingConfig tc;
  tc.total_iterations = a.iters;
  tc.batch_size = a.batch;
  tc.lambda_cls = a.lambda_cls;
  tc.lambda_rec = a.lambda_rec;
  tc.lambda_gp = a.lambda_gp;
  tc.learning_rate = a.lr;
  tc.critic_ratio = a.critic_ratio;
  tc.checkpoint_every = a.checkpoint_every;

  const std::string id = a.id.empty() ? fs::path(manifest_path).parent_path().filename().string() : a.id;
  const fs::path out = ws.dir("checkpoints") / id;

  gan::TrainOptions opt;
  opt.out_dir = out.string();
  opt.manifest_hash = manifest_hash(manifest);
  std::unique_ptr<TabularPolicy> agent;
  std::vector<LabeledSample> probe(probe_set.begin(),
                                   probe_set.begin() + std::min<std::ptrdiff_t>(
                                                           a.probe_states, probe_set.size()));
  if (!probe.empty()) {
    agent = std::make_unique<TabularPolicy>(
        load_policy(resolve(ws, "agent", a.agent.empty() ? manifest.agent_id : a.agent).string()));
    opt.validity_probe = [&](const Translator &t) {
      std::vector<SampleMetrics> m;
      for (const auto &r : evaluate_all_targets(t, *agent, probe))
        m.push_back(r.metrics());
      return validity(m);
    };
  }
  opt.on_iteration = [&](std::int64_t it, const gan::LossComponents &l, bool) {
    if (a.log_every > 0 && (it + 1) % a.log_every == 0)
      std::fprintf(stderr, "iter %lld  L_D %.4f  L_G %.4f  cls_real %.4f  rec %.4f  gp %.4f\n",
                   static_cast<long long>(it + 1), l.l_d, l.l_g, l.cls_real, l.rec, l.gp);
  };

  const auto r = gan::train(train_set, arch, tc, c.seed, opt);
  const bool use_best = a.select == "best" && !r.best_checkpoint.empty();
  const fs::path chosen = out / "generator.ckpt";
  fs::copy_file(use_best ? r.best_checkpoint : r.final_checkpoint, chosen,
                fs::copy_options::overwrite_existing);
  const auto meta_ckpt = gan::read_checkpoint_meta(chosen.string());
  json meta = {{"agent_id", manifest.agent_id},
               {"dataset", fs::path(manifest_path).parent_path().filename().string()},
               {"manifest_hash", opt.manifest_hash},
               {"iteration", meta_ckpt.iteration},
               {"selected", use_best ? "best" : "final"},
               {"probe_validity", r.best_validity},
               {"architecture", gan::to_json(arch)},
               {"training", gan::to_json(tc)},
               {"seed", c.seed}};
  ws.record("generator", id, chosen, meta);
  meta["generator"] = id;
  meta["log"] = r.log_path;
  print_result(meta);
}

struct EvaluateArgs {
  std::string generator, agent, test_set, out;
  bool noise_baseline = false;
  int max_states = 0;
};

void evaluate_cmd(const Common &c, const EvaluateArgs &a) {
  Workspace ws = open_workspace(c);
  gan::set_compute_threads(c.threads);
  const fs::path gen_path = resolve(ws, "generator", a.generator);
  const gan::GanTranslator translator(gen_path.string(), a.generator);
  std::string agent_id = a.agent.empty() ? generator_agent(ws, a.generator) : a.agent;
  if (agent_id.empty())
    throw ConfigError("agent", "cannot infer the agent; pass --agent");
  const auto policy = load_policy(resolve(ws, "agent", agent_id).string());

  std::string test_arg = a.test_set;
  if (test_arg.empty()) {
    const auto g = ws.find("generator", a.generator);
    test_arg = g ? g->meta.value("dataset", "") : "";
    if (test_arg.empty())
      throw ConfigError("test-set", "cannot infer the test set; pass --test-set");
  }
  const fs::path manifest_path = resolve(ws, "dataset", test_arg);
  auto states = load_split(manifest_path.string(), "test");
  if (a.max_states > 0 && static_cast<int>(states.size()) > a.max_states)
    states.resize(static_cast<std::size_t>(a.max_states));
  if (states.empty())
    throw std::runtime_error("test split of " + manifest_path.string() + " is empty");

  auto run = [&](const Translator &t, const std::string &approach) {
    std::vector<SampleMetrics> m;
    for (const auto &r : evaluate_all_targets(t, policy, states))
      m.push_back(r.metrics());
    return aggregate(m, policy.agent_id(), approach);
  };
  const auto main_report = run(translator, "gan");
  std::vector<MetricsReport> rows{main_report};
  json report = to_json(main_report);
  report["generator"] = a.generator;
  report["test_set"] = manifest_path.string();
  report["targets"] = "every action per test state";
  report["seed"] = c.seed;
  report["baselines"] = json::array();
  if (a.noise_baseline) {
    const double sigma = calibrate_noise_sigma(states, main_report.proximity.mean, c.seed,
                                               translator.num_actions());
    const NoiseTranslator noise(sigma, c.seed, translator.num_actions());
    const auto nr = run(noise, "noise");
    rows.push_back(nr);
    json b = to_json(nr);
    b["sigma"] = sigma;
    report["baselines"].push_back(b);
  }
  const fs::path out = a.out.empty() ? ws.dir("reports") / (a.generator + ".json") : fs::path(a.out);
  write_json(out, report);
  ws.record("report", a.generator, out, {{"generator", a.generator}, {"seed", c.seed}});
  std::cerr << render_table(rows);
  print_result({{"report", out.string()},
                {"validity", main_report.validity},
                {"proximity", main_report.proximity.mean},
                {"sparsity", main_report.sparsity.mean}});
}

struct GenerateArgs {
  std::string generator, agent, state, target = "auto", out;
  int steps = kDefaultInterpolationSteps;
};

void generate_cmd(const Common &c, const GenerateArgs &a) {
  Workspace ws = open_workspace(c);
  gan::set_compute_threads(c.threads);
  const gan::GanTranslator translator(resolve(ws, "generator", a.generator).string(), a.generator);
  std::string agent_id = a.agent.empty() ? generator_agent(ws, a.generator) : a.agent;
  if (agent_id.empty())
    throw ConfigError("agent", "cannot infer the agent; pass --agent");
  const auto policy = load_policy(resolve(ws, "agent", agent_id).string());
  const ActionSpace &actions = policy.action_space();

  std::vector<Image> states;
  if (a.state == "highlights") {
    const auto h = ws.find("highlights", policy.agent_id());
    if (!h)
      throw std::runtime_error("no highlights for agent '" + policy.agent_id() + "'");
    const json highlights = read_json(ws.resolve(*h));
    for (const auto &s : highlights.at("states")) {
      auto img = ws.images().get_image(s.at("state_id").get<std::string>());
      if (!img)
        throw std::runtime_error("highlight image missing from the store");
      states.push_back(*img);
    }
  } else {
    states.push_back(png::read_file(a.state));
  }

  Rng rng(c.seed);
  json results = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Image &img = states[i];
    ActionId target = 0;
    if (a.target == "auto") {
      const ActionId original = act_greedy(policy, agent_view(img));
      const auto t = select_target_action(maze_context(img, policy.env_config()), original,
                                          actions, rng);
      if (!t)
        throw std::runtime_error("no admissible automatic target for state " + std::to_string(i));
      target = *t;
    } else {
      try {
        target = actions.id_of(a.target);
      } catch (const std::exception &) {
        target = std::stoi(a.target);
      }
      if (!actions.contains(target))
        throw ConfigError("target", "unknown action '" + a.target + "'");
    }
    StateImage s;
    s.pixels = img;
    const auto r = explain(translator, policy, s, target);
    const fs::path dir = a.state == "highlights" ? fs::path(a.out) / std::to_string(i) : fs::path(a.out);
    fs::create_directories(dir / "frames");
    png::write_file((dir / "original.png").string(), img);
    png::write_file((dir / "counterfactual.png").string(), r.generated.pixels);
    const auto seq = interpolate(img, r.generated.pixels, a.steps);
    for (int f = 0; f < seq.steps(); ++f) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%02d.png", f);
      png::write_file((dir / "frames" / name).string(), seq.frames[static_cast<std::size_t>(f)]);
    }
    json j = {{"original_action", service::action_json(actions, r.original_action)},
              {"target_action", service::action_json(actions, r.target_action)},
              {"realized_action", service::action_json(actions, r.realized_action)},
              {"valid", r.valid},
              {"proximity", r.proximity},
              {"sparsity", r.sparsity},
              {"generation_seconds", r.generation_seconds},
              {"steps", a.steps},
              {"seed", c.seed},
              {"generator", a.generator},
              {"agent_id", policy.agent_id()}};
    write_json(dir / "result.json", j);
    results.push_back(j);
  }
  print_result({{"out", a.out}, {"results", results}});
}

struct HighlightsArgs {
  std::string agent;
  int episodes = 50;
  int n = 5;
  double diversity = 2000.0;
};

void highlights_cmd(const Common &c, const HighlightsArgs &a) {
  Workspace ws = open_workspace(c);
  const auto policy = load_policy(resolve(ws, "agent", a.agent).string());
  const auto h = select_highlights(policy, policy.env_config(), a.episodes, a.n, a.diversity, c.seed);
  json states = json::array();
  for (const auto &s : h.states) {
    const std::string id = ws.images().put(s.state.pixels);
    states.push_back({{"state_id", id},
                      {"image_url", service::image_url(id)},
                      {"original_action", service::action_json(policy.action_space(), s.action)},
                      {"importance", s.importance}});
  }
  const json out = {{"agent_id", policy.agent_id()},
                    {"diversity_threshold", a.diversity},
                    {"episodes", a.episodes},
                    {"seed", c.seed},
                    {"importance", "max_a Q - min_a Q"},
                    {"states", states}};
  const fs::path p = ws.dir("highlights") / (policy.agent_id() + ".json");
  write_json(p, out);
  ws.record("highlights", policy.agent_id(), p, {{"seed", c.seed}});
  print_result({{"highlights", p.string()}, {"count", states.size()}});
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
};

void serve_cmd(const Common &c, const ServeArgs &a) {
  Workspace ws = open_workspace(c);
  gan::set_compute_threads(c.threads);
  const auto problems = ws.verify();
  if (!problems.empty())
    throw std::runtime_error("workspace index is inconsistent: " + problems.front());
  auto api = service::ApiService::from_workspace(ws);
  std::cerr << "serving " << ws.root().string() << " on http://" << a.host << ':' << a.port
            << std::endl;
  service::serve(*api, a.host, a.port);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Counterfactual state explanations for RL agents"};
  app.require_subcommand(1);
  Common common;

  TrainAgentArgs ta;
  auto *train_agent = app.add_subcommand("train-agent", "Train a toy GridPac agent");
  add_common(train_agent, common);
  train_agent->add_option("--profile", ta.profile, "Reward profile (hunter, pill, fear)")->required();
  train_agent->add_option("--steps", ta.steps, "Q-learning steps")->check(CLI::PositiveNumber);
  train_agent->add_option("--env", ta.env, "Environment config JSON");
  train_agent->add_option("--agent-id", ta.agent_id, "Agent id (default: profile)");

  CollectArgs ca;
  auto *collect = app.add_subcommand("collect", "Collect, curate and split a dataset");
  add_common(collect, common);
  collect->add_option("--agent", ca.agent, "Agent id or checkpoint path")->required();
  collect->add_option("--env", ca.env, "Environment config JSON (default: the agent's)");
  collect->add_option("--episodes", ca.episodes, "Episodes to run")->required()->check(CLI::PositiveNumber);
  collect->add_option("--epsilon", ca.epsilon, "Exploration rate")->check(CLI::Range(0.0, 1.0));
  collect->add_option("--split", ca.split, "fraction:<f> or count:<n>");
  collect->add_option("--validation", ca.validation, "Validation share of the train split")
      ->check(CLI::Range(0.0, 0.99));
  collect->add_option("--noop-max", ca.noop_max, "Maximum no-ops at reset")->check(CLI::NonNegativeNumber);
  collect->add_option("--target", ca.target, "Stop after this many distinct states (0: no limit)");
  collect->add_option("--workers", ca.workers, "Parallel collection workers")->check(CLI::PositiveNumber);
  collect->add_option("--exclude", ca.exclude, "Dataset whose test states are kept out");
  collect->add_option("--dataset-id", ca.dataset_id, "Dataset id (default: agent id)");
  collect->add_flag("--legacy-mode", ca.legacy, "Skip deduplication and balancing");

  TrainGanArgs ga;
  auto *train_gan = app.add_subcommand("train-gan", "Train the counterfactual generator");
  add_common(train_gan, common);
  train_gan->add_option("--dataset", ga.dataset, "Dataset id, directory or manifest")->required();
  train_gan->add_option("--iters", ga.iters, "Training iterations")->check(CLI::PositiveNumber);
  train_gan->add_option("--batch", ga.batch, "Batch size")->check(CLI::PositiveNumber);
  train_gan->add_option("--lambda-cls", ga.lambda_cls)->check(CLI::NonNegativeNumber);
  train_gan->add_option("--lambda-rec", ga.lambda_rec)->check(CLI::NonNegativeNumber);
  train_gan->add_option("--lambda-gp", ga.lambda_gp)->check(CLI::NonNegativeNumber);
  train_gan->add_option("--lr", ga.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train_gan->add_option("--critic-ratio", ga.critic_ratio)->check(CLI::PositiveNumber);
  train_gan->add_option("--base-width", ga.base_width)->check(CLI::PositiveNumber);
  train_gan->add_option("--checkpoint-every", ga.checkpoint_every)->check(CLI::PositiveNumber);
  train_gan->add_option("--probe-states", ga.probe_states, "Validation states for the checkpoint probe");
  train_gan->add_option("--agent", ga.agent, "Agent for the validity probe (default: dataset's)");
  train_gan->add_option("--select", ga.select, "Checkpoint to register")
      ->check(CLI::IsMember({"best", "final"}));
  train_gan->add_option("--id", ga.id, "Generator id (default: dataset id)");
  train_gan->add_option("--log-every", ga.log_every, "Progress line interval (0: quiet)");
  train_gan->add_option("--threads", common.threads, "Compute threads");

  EvaluateArgs ea;
  auto *evaluate = app.add_subcommand("evaluate", "Validity, proximity, sparsity and timing report");
  add_common(evaluate, common);
  evaluate->add_option("--generator", ea.generator, "Generator id or checkpoint")->required();
  evaluate->add_option("--agent", ea.agent, "Agent id or checkpoint");
  evaluate->add_option("--test-set", ea.test_set, "Dataset id, directory or manifest");
  evaluate->add_option("--out", ea.out, "Report path (default: reports/<generator>.json)");
  evaluate->add_option("--max-states", ea.max_states, "Evaluate at most this many test states");
  evaluate->add_flag("--noise-baseline", ea.noise_baseline,
                     "Also score Gaussian noise matched to the generator's proximity");
  evaluate->add_option("--threads", common.threads, "Compute threads");

  GenerateArgs gen;
  auto *generate = app.add_subcommand("generate-cf", "Generate counterfactuals and slider frames");
  add_common(generate, common);
  generate->add_option("--generator", gen.generator, "Generator id or checkpoint")->required();
  generate->add_option("--agent", gen.agent, "Agent id or checkpoint");
  generate->add_option("--state", gen.state, "State PNG or 'highlights'")->required();
  generate->add_option("--target", gen.target, "Action id, name or 'auto'");
  generate->add_option("--steps", gen.steps, "Interpolation frames")->check(CLI::Range(2, 101));
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--threads", common.threads, "Compute threads");

  HighlightsArgs ha;
  auto *highlights = app.add_subcommand("highlights", "Select important, diverse states");
  add_common(highlights, common);
  highlights->add_option("--agent", ha.agent, "Agent id or checkpoint")->required();
  highlights->add_option("--episodes", ha.episodes)->check(CLI::PositiveNumber);
  highlights->add_option("--n", ha.n, "States to select")->check(CLI::PositiveNumber);
  highlights->add_option("--diversity", ha.diversity, "Minimum pairwise L1 image distance")
      ->check(CLI::NonNegativeNumber);

  ServeArgs sa;
  auto *serve = app.add_subcommand("serve", "Run the HTTP API");
  add_common(serve, common);
  serve->add_option("--host", sa.host, "Bind address");
  serve->add_option("--port", sa.port)->check(CLI::Range(0, 65535));
  serve->add_option("--threads", common.threads, "Compute threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_agent)
      train_agent_cmd(common, ta);
    else if (*collect)
      collect_cmd(common, ca);
    else if (*train_gan)
      train_gan_cmd(common, ga);
    else if (*evaluate)
      evaluate_cmd(common, ea);
    else if (*generate)
      generate_cmd(common, gen);
    else if (*highlights)
      highlights_cmd(common, ha);
    else if (*serve)
      serve_cmd(common, sa);
  } catch (const ConfigError &e) {
    std::cerr << json{{"error", e.what()}, {"kind", "config"}, {"field", e.field()}}.dump() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << json{{"error", e.what()}, {"kind", "runtime"}}.dump() << '\n';
    return 1;
  }
  return 0;
}
