#include "temporalot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "temporalot/error.hpp"
#include "text_util.hpp"

namespace temporalot {

using nlohmann::json;

std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::temporal_ot: return "temporal_ot";
    case Baseline::ot_vanilla: return "ot_vanilla";
    case Baseline::task_reward: return "task_reward";
    case Baseline::bc: return "bc";
    case Baseline::temporal_ot_pretrained: return "temporal_ot_pretrained";
  }
  return "unknown";
}

Baseline parse_baseline(std::string_view name) {
  if (name == "temporal_ot") return Baseline::temporal_ot;
  if (name == "ot_vanilla") return Baseline::ot_vanilla;
  if (name == "task_reward") return Baseline::task_reward;
  if (name == "bc") return Baseline::bc;
  if (name == "temporal_ot_pretrained") return Baseline::temporal_ot_pretrained;
  throw ArgumentError("unknown baseline '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  env.validate();
  encoder.validate();
  reward.validate();
  agent.validate();
  if (n_demos < 1) throw ArgumentError("n_demos must be >= 1");
  if (stride < 1) throw ArgumentError("stride must be >= 1");
  if (seeds.empty()) throw ArgumentError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ArgumentError("seeds must be distinct");
  }
  if (workers < 1) throw ArgumentError("workers must be >= 1");
  for (int v : sweep.context_lengths) {
    if (v < 1) throw ArgumentError("k_c sweep values must be >= 1");
  }
  for (int v : sweep.windows) {
    if (v < 0) throw ArgumentError("k_m sweep values must be >= 0");
  }
  for (int v : sweep.demo_counts) {
    if (v < 1) throw ArgumentError("n_demos sweep values must be >= 1");
  }
  for (int v : sweep.strides) {
    if (v < 1) throw ArgumentError("stride sweep values must be >= 1");
  }
  for (double g : sweep.gammas) {
    if (!(g >= 0.0 && g < 1.0)) throw ArgumentError("gamma sweep values must lie in [0, 1)");
  }
}

ExperimentConfig default_experiment(EnvId id) {
  ExperimentConfig c;
  c.env = EnvConfig::defaults(id);
  if (id == EnvId::pointmass_reach) {
    c.encoder = EncoderSpec::place_cells(6, 6, c.env.extent, c.env.extent, 0.15);
  } else {
    c.encoder = EncoderSpec::place_cells(c.env.width, c.env.height, c.env.width - 1.0,
                                         c.env.height - 1.0, 1.0);
  }
  return c;
}

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("points are written as [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json env_json(const EnvConfig& e) {
  return {{"id", to_string(e.id)},
          {"width", e.width},
          {"height", e.height},
          {"horizon", e.horizon},
          {"start", point_json(e.start)},
          {"goal", point_json(e.goal)},
          {"waypoint", point_json(e.waypoint)},
          {"pause_steps", e.pause_steps},
          {"pause_required", e.pause_required},
          {"random_goal", e.random_goal},
          {"start_radius", e.start_radius},
          {"extent", e.extent},
          {"step_size", e.step_size},
          {"goal_tolerance", e.goal_tolerance},
          {"start_jitter", e.start_jitter}};
}

EnvConfig env_from(const json& j, EnvConfig e) {
  e.width = j.value("width", e.width);
  e.height = j.value("height", e.height);
  e.horizon = j.value("horizon", e.horizon);
  if (j.contains("start")) e.start = point_from(j["start"]);
  if (j.contains("goal")) e.goal = point_from(j["goal"]);
  if (j.contains("waypoint")) e.waypoint = point_from(j["waypoint"]);
  e.pause_steps = j.value("pause_steps", e.pause_steps);
  e.pause_required = j.value("pause_required", e.pause_required);
  e.random_goal = j.value("random_goal", e.random_goal);
  e.start_radius = j.value("start_radius", e.start_radius);
  e.extent = j.value("extent", e.extent);
  e.step_size = j.value("step_size", e.step_size);
  e.goal_tolerance = j.value("goal_tolerance", e.goal_tolerance);
  e.start_jitter = j.value("start_jitter", e.start_jitter);
  return e;
}

json encoder_json(const EncoderSpec& s) {
  json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case EncoderKind::identity: break;
    case EncoderKind::precomputed: j["path"] = s.path.string(); break;
    case EncoderKind::random_projection:
      j["seed"] = s.seed;
      j["out_dim"] = s.out_dim;
      break;
    case EncoderKind::place_cells:
      j["cells"] = json::array({s.cells_x, s.cells_y});
      j["extent"] = json::array({s.extent_x, s.extent_y});
      j["sigma"] = s.sigma;
      break;
  }
  return j;
}

EncoderSpec encoder_from(const json& j, EncoderSpec s) {
  if (j.contains("kind")) {
    const EncoderKind kind = parse_encoder_kind(j["kind"].get<std::string>());
    if (kind != s.kind) {
      EncoderSpec fresh;
      fresh.kind = kind;
      s = fresh;
    }
  }
  if (j.contains("path")) s.path = j["path"].get<std::string>();
  s.seed = j.value("seed", s.seed);
  s.out_dim = j.value("out_dim", s.out_dim);
  if (j.contains("cells")) {
    s.cells_x = j["cells"].at(0).get<int>();
    s.cells_y = j["cells"].at(1).get<int>();
  }
  if (j.contains("extent")) {
    s.extent_x = j["extent"].at(0).get<double>();
    s.extent_y = j["extent"].at(1).get<double>();
  }
  s.sigma = j.value("sigma", s.sigma);
  return s;
}

json reward_json(const RewardConfig& r) {
  return {{"k_c", r.context_length},
          {"mask", to_string(r.mask_kind)},
          {"k_m", r.window},
          {"sinkhorn",
           {{"epsilon", r.sinkhorn.epsilon},
            {"max_iterations", r.sinkhorn.max_iterations},
            {"tolerance", r.sinkhorn.tolerance},
            {"log_domain", r.sinkhorn.log_domain},
            {"epsilon_scaling", r.sinkhorn.epsilon_scaling},
            {"newton_steps", r.sinkhorn.newton_steps}}}};
}

RewardConfig reward_from(const json& j, RewardConfig r) {
  r.context_length = j.value("k_c", r.context_length);
  if (j.contains("mask")) r.mask_kind = parse_mask_kind(j["mask"].get<std::string>());
  r.window = j.value("k_m", r.window);
  if (j.contains("sinkhorn")) {
    const json& s = j["sinkhorn"];
    r.sinkhorn.epsilon = s.value("epsilon", r.sinkhorn.epsilon);
    r.sinkhorn.max_iterations = s.value("max_iterations", r.sinkhorn.max_iterations);
    r.sinkhorn.tolerance = s.value("tolerance", r.sinkhorn.tolerance);
    r.sinkhorn.log_domain = s.value("log_domain", r.sinkhorn.log_domain);
    r.sinkhorn.epsilon_scaling = s.value("epsilon_scaling", r.sinkhorn.epsilon_scaling);
    r.sinkhorn.newton_steps = s.value("newton_steps", r.sinkhorn.newton_steps);
  }
  return r;
}

json agent_json(const AgentConfig& a, bool with_seed) {
  json j = {{"learning_rate", a.learning_rate},
            {"gamma", a.gamma},
            {"epsilon_start", a.epsilon_start},
            {"epsilon_end", a.epsilon_end},
            {"epsilon_decay_steps", a.epsilon_decay_steps},
            {"target_update_period", a.target_update_period},
            {"total_env_steps", a.total_env_steps},
            {"eval_interval", a.eval_interval},
            {"eval_episodes", a.eval_episodes},
            {"batch_size", a.batch_size},
            {"updates_per_episode", a.updates_per_episode},
            {"buffer_capacity", a.buffer_capacity},
            {"bc_margin", a.bc_margin}};
  if (with_seed) j["seed"] = a.seed;
  return j;
}

AgentConfig agent_from(const json& j, AgentConfig a) {
  a.learning_rate = j.value("learning_rate", a.learning_rate);
  a.gamma = j.value("gamma", a.gamma);
  a.epsilon_start = j.value("epsilon_start", a.epsilon_start);
  a.epsilon_end = j.value("epsilon_end", a.epsilon_end);
  a.epsilon_decay_steps = j.value("epsilon_decay_steps", a.epsilon_decay_steps);
  a.target_update_period = j.value("target_update_period", a.target_update_period);
  a.total_env_steps = j.value("total_env_steps", a.total_env_steps);
  a.eval_interval = j.value("eval_interval", a.eval_interval);
  a.eval_episodes = j.value("eval_episodes", a.eval_episodes);
  a.batch_size = j.value("batch_size", a.batch_size);
  a.updates_per_episode = j.value("updates_per_episode", a.updates_per_episode);
  a.buffer_capacity = j.value("buffer_capacity", a.buffer_capacity);
  a.bc_margin = j.value("bc_margin", a.bc_margin);
  a.seed = j.value("seed", a.seed);
  return a;
}

template <typename T, typename F>
json list_json(const std::vector<T>& values, F&& convert) {
  json arr = json::array();
  for (const T& v : values) arr.push_back(convert(v));
  return arr;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json sweep = json::object();
  if (!c.sweep.baselines.empty()) {
    sweep["baseline"] = list_json(c.sweep.baselines, [](Baseline b) { return to_string(b); });
  }
  if (!c.sweep.context_lengths.empty()) sweep["k_c"] = c.sweep.context_lengths;
  if (!c.sweep.windows.empty()) sweep["k_m"] = c.sweep.windows;
  if (!c.sweep.mask_kinds.empty()) {
    sweep["mask"] = list_json(c.sweep.mask_kinds, [](MaskKind m) { return to_string(m); });
  }
  if (!c.sweep.demo_counts.empty()) sweep["n_demos"] = c.sweep.demo_counts;
  if (!c.sweep.strides.empty()) sweep["stride"] = c.sweep.strides;
  if (!c.sweep.gammas.empty()) sweep["gamma"] = c.sweep.gammas;
  return {{"baseline", to_string(c.baseline)},
          {"env", env_json(c.env)},
          {"encoder", encoder_json(c.encoder)},
          {"reward", reward_json(c.reward)},
          {"agent", agent_json(c.agent, false)},
          {"n_demos", c.n_demos},
          {"stride", c.stride},
          {"demo_seed", c.demo_seed},
          {"seeds", c.seeds},
          {"sweep", sweep},
          {"workers", c.workers}};
}

ExperimentConfig experiment_from_json(const json& j) {
  try {
    EnvId id = EnvId::grid_reach;
    if (j.contains("env") && j["env"].contains("id")) {
      id = parse_env_id(j["env"]["id"].get<std::string>());
    }
    ExperimentConfig c = default_experiment(id);
    if (j.contains("baseline")) c.baseline = parse_baseline(j["baseline"].get<std::string>());
    if (j.contains("env")) c.env = env_from(j["env"], c.env);
    if (j.contains("encoder")) c.encoder = encoder_from(j["encoder"], c.encoder);
    if (j.contains("reward")) c.reward = reward_from(j["reward"], c.reward);
    if (j.contains("agent")) c.agent = agent_from(j["agent"], c.agent);
    c.n_demos = j.value("n_demos", c.n_demos);
    c.stride = j.value("stride", c.stride);
    c.demo_seed = j.value("demo_seed", c.demo_seed);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.workers = j.value("workers", c.workers);
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      if (s.contains("baseline")) {
        for (const auto& b : s["baseline"]) c.sweep.baselines.push_back(parse_baseline(b.get<std::string>()));
      }
      if (s.contains("k_c")) c.sweep.context_lengths = s["k_c"].get<std::vector<int>>();
      if (s.contains("k_m")) c.sweep.windows = s["k_m"].get<std::vector<int>>();
      if (s.contains("mask")) {
        for (const auto& m : s["mask"]) c.sweep.mask_kinds.push_back(parse_mask_kind(m.get<std::string>()));
      }
      if (s.contains("n_demos")) c.sweep.demo_counts = s["n_demos"].get<std::vector<int>>();
      if (s.contains("stride")) c.sweep.strides = s["stride"].get<std::vector<int>>();
      if (s.contains("gamma")) c.sweep.gammas = s["gamma"].get<std::vector<double>>();
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = experiment_from_json(j);
  c.validate();
  return c;
}

RewardConfig CellConfig::effective_reward() const {
  if (baseline == Baseline::ot_vanilla) {
    RewardConfig r = RewardConfig::vanilla();
    r.sinkhorn = reward.sinkhorn;
    return r;
  }
  return reward;
}

json to_json(const CellConfig& cell) {
  return {{"baseline", to_string(cell.baseline)},
          {"env", env_json(cell.env)},
          {"encoder", encoder_json(cell.encoder)},
          {"reward", reward_json(cell.effective_reward())},
          {"agent", agent_json(cell.agent, false)},
          {"n_demos", cell.n_demos},
          {"stride", cell.stride},
          {"demo_seed", cell.demo_seed}};
}

std::string config_hash(const CellConfig& cell) {
  const std::string canonical = to_json(cell).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running

std::vector<CellConfig> expand_cells(const ExperimentConfig& c) {
  c.validate();
  auto or_base = [](const auto& axis, auto base) {
    using T = std::decay_t<decltype(base)>;
    return axis.empty() ? std::vector<T>{base} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto baselines = or_base(c.sweep.baselines, c.baseline);
  const auto kcs = or_base(c.sweep.context_lengths, c.reward.context_length);
  const auto kms = or_base(c.sweep.windows, c.reward.window);
  const auto masks = or_base(c.sweep.mask_kinds, c.reward.mask_kind);
  const auto ns = or_base(c.sweep.demo_counts, c.n_demos);
  const auto strides = or_base(c.sweep.strides, c.stride);
  const auto gammas = or_base(c.sweep.gammas, c.agent.gamma);

  std::vector<CellConfig> cells;
  std::set<std::string> seen;
  for (Baseline b : baselines) {
    for (MaskKind m : masks) {
      for (int kc : kcs) {
        for (int km : kms) {
          for (int n : ns) {
            for (int s : strides) {
              for (double g : gammas) {
                CellConfig cell;
                cell.baseline = b;
                cell.env = c.env;
                cell.encoder = c.encoder;
                cell.reward = c.reward;
                cell.reward.mask_kind = m;
                cell.reward.context_length = kc;
                cell.reward.window = km;
                cell.agent = c.agent;
                cell.agent.gamma = g;
                cell.agent.seed = 0;
                cell.n_demos = n;
                cell.stride = s;
                cell.demo_seed = c.demo_seed;
                if (seen.insert(config_hash(cell)).second) cells.push_back(cell);
              }
            }
          }
        }
      }
    }
  }
  return cells;
}

namespace {

std::vector<Trajectory> raw_demos(const CellConfig& cell, int stride) {
  std::vector<Trajectory> demos;
  for (int i = 0; i < cell.n_demos; ++i) {
    Trajectory d = scripted_expert(cell.env, cell.demo_seed + static_cast<std::uint64_t>(i));
    demos.push_back(stride == 1 ? d : subsample_demo(d, stride));
  }
  return demos;
}

// The env steps at which train() evaluates for a given budget.
std::vector<long> eval_schedule(const EnvConfig& env, const AgentConfig& a) {
  std::vector<long> out;
  long step = 0;
  long next = 0;
  for (;;) {
    if (step >= next) {
      out.push_back(step);
      next = (step / a.eval_interval + 1) * a.eval_interval;
    }
    if (step >= a.total_env_steps) break;
    step += env.horizon;
  }
  if (out.back() != step) out.push_back(step);
  return out;
}

ResultRow row_template(const CellConfig& cell, const std::string& hash) {
  const RewardConfig r = cell.effective_reward();
  ResultRow row;
  row.config_hash = hash;
  row.baseline = to_string(cell.baseline);
  row.env_id = to_string(cell.env.id);
  row.k_c = r.context_length;
  row.k_m = r.mask_kind == MaskKind::ones ? -1 : r.window;
  row.n_demos = cell.n_demos;
  row.stride = cell.stride;
  row.gamma = cell.agent.gamma;
  return row;
}

}  // namespace

DemoSet generate_demos(const CellConfig& cell) { return DemoSet(raw_demos(cell, cell.stride)); }

std::vector<ResultRow> run_cell(const CellConfig& cell, std::uint64_t seed) {
  AgentConfig agent = cell.agent;
  agent.seed = seed;
  const std::string hash = config_hash(cell);

  LearningRecord record;
  record.seed = seed;
  switch (cell.baseline) {
    case Baseline::temporal_ot:
    case Baseline::ot_vanilla:
      record = train(cell.env, generate_demos(cell),
                     {RewardSource::ot, cell.effective_reward(), cell.encoder}, agent);
      break;
    case Baseline::task_reward:
      record = train(cell.env, generate_demos(cell), {RewardSource::task, cell.reward, cell.encoder},
                     agent);
      break;
    case Baseline::bc: {
      // Cloning uses full-speed demos so every visited state gets a vote.
      const QTable q = bc_pretrain(cell.env, DemoSet(raw_demos(cell, 1)), agent);
      const double rate = evaluate(cell.env, q, agent.eval_episodes, seed);
      for (long s : eval_schedule(cell.env, agent)) record.points.push_back({s, rate});
      break;
    }
    case Baseline::temporal_ot_pretrained: {
      const QTable q = bc_pretrain(cell.env, DemoSet(raw_demos(cell, 1)), agent);
      record = train(cell.env, generate_demos(cell),
                     {RewardSource::ot, cell.effective_reward(), cell.encoder}, agent, &q);
      break;
    }
  }

  std::vector<ResultRow> rows;
  for (const LearningPoint& p : record.points) {
    ResultRow row = row_template(cell, hash);
    row.seed = seed;
    row.env_step = p.env_step;
    row.success_rate = p.success_rate;
    rows.push_back(row);
  }
  return rows;
}

namespace {

bool row_less(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.config_hash, a.seed, a.env_step) < std::tie(b.config_hash, b.seed, b.env_step);
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, long>, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) groups[{r.config_hash, r.env_step}].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    AggregateRow a;
    a.key = *members.front();
    a.key.seed = 0;
    a.key.success_rate = 0.0;
    double sum = 0.0;
    for (const ResultRow* r : members) sum += r->success_rate;
    a.seeds = static_cast<int>(members.size());
    a.mean = sum / a.seeds;
    double var = 0.0;
    for (const ResultRow* r : members) var += (r->success_rate - a.mean) * (r->success_rate - a.mean);
    a.std = std::sqrt(var / a.seeds);
    out.push_back(a);
  }
  return out;
}

ExperimentResults run_experiment(const ExperimentConfig& config) {
  const std::vector<CellConfig> cells = expand_cells(config);

  struct Job {
    std::size_t cell;
    std::uint64_t seed;
    std::vector<ResultRow> rows;
    std::optional<std::string> error;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::uint64_t s : config.seeds) jobs.push_back({c, s, {}, std::nullopt});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      Job& job = jobs[k];
      try {
        job.rows = run_cell(cells[job.cell], job.seed);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  const int n_threads = std::min<int>(config.workers, static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResults results;
  std::map<std::string, json> configs;
  for (const CellConfig& cell : cells) {
    const std::string hash = config_hash(cell);
    const json j = to_json(cell);
    auto [it, inserted] = configs.emplace(hash, j);
    if (!inserted && it->second != j) {
      throw Error("config hash collision on " + hash);
    }
  }
  results.configs.assign(configs.begin(), configs.end());
  for (Job& job : jobs) {
    if (job.error) {
      results.failures.push_back({config_hash(cells[job.cell]), job.seed, *job.error});
    } else {
      results.rows.insert(results.rows.end(), job.rows.begin(), job.rows.end());
    }
  }
  std::sort(results.rows.begin(), results.rows.end(), row_less);
  std::sort(results.failures.begin(), results.failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return std::tie(a.config_hash, a.seed) < std::tie(b.config_hash, b.seed);
            });
  results.aggregates = aggregate(results.rows);
  return results;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.config_hash + ',' + r.baseline + ',' + r.env_id + ',' + std::to_string(r.k_c) + ',' +
           std::to_string(r.k_m) + ',' + std::to_string(r.n_demos) + ',' +
           std::to_string(r.stride) + ',' + format_double(r.gamma) + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.env_step) + ',' +
           format_double(r.success_rate) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(detail::trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

long parse_long(std::string_view s, const std::string& ctx) {
  const double v = parse_double(s, ctx);
  if (v != std::floor(v)) throw ParseError(ctx + ": expected an integer, got '" + std::string(s) + "'");
  return static_cast<long>(v);
}

}  // namespace

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != kResultsHeader) {
    throw ParseError("results CSV: unexpected header (expected '" + std::string(kResultsHeader) + "')");
  }
  std::vector<ResultRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (detail::trim(lines[k]).empty()) continue;
    const std::string ctx = "results CSV line " + std::to_string(k + 1);
    auto f = split_csv(lines[k]);
    if (f.size() != 11) throw ParseError(ctx + ": expected 11 columns");
    ResultRow r;
    r.config_hash = std::string(f[0]);
    r.baseline = std::string(f[1]);
    r.env_id = std::string(f[2]);
    r.k_c = static_cast<int>(parse_long(f[3], ctx));
    r.k_m = static_cast<int>(parse_long(f[4], ctx));
    r.n_demos = static_cast<int>(parse_long(f[5], ctx));
    r.stride = static_cast<int>(parse_long(f[6], ctx));
    r.gamma = parse_double(f[7], ctx);
    r.seed = static_cast<std::uint64_t>(parse_long(f[8], ctx));
    r.env_step = parse_long(f[9], ctx);
    r.success_rate = parse_double(f[10], ctx);
    rows.push_back(r);
  }
  return rows;
}

std::string format_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out =
      "config_hash,baseline,env_id,k_c,k_m,n_demos,stride,gamma,env_step,mean,std,seeds\n";
  for (const AggregateRow& a : rows) {
    const ResultRow& r = a.key;
    out += r.config_hash + ',' + r.baseline + ',' + r.env_id + ',' + std::to_string(r.k_c) + ',' +
           std::to_string(r.k_m) + ',' + std::to_string(r.n_demos) + ',' +
           std::to_string(r.stride) + ',' + format_double(r.gamma) + ',' +
           std::to_string(r.env_step) + ',' + format_double(a.mean) + ',' + format_double(a.std) +
           ',' + std::to_string(a.seeds) + '\n';
  }
  return out;
}

void write_results(const ExperimentResults& results, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "results.csv", format_results_csv(results.rows));
  write_text_file(out_dir / "aggregate.csv", format_aggregate_csv(results.aggregates));
  json configs = json::object();
  for (const auto& [hash, cfg] : results.configs) configs[hash] = cfg;
  write_text_file(out_dir / "configs.json", configs.dump(2) + "\n");
  const auto failures_path = out_dir / "failures.txt";
  if (results.failures.empty()) {
    std::filesystem::remove(failures_path);
  } else {
    std::string text;
    for (const CellFailure& f : results.failures) {
      text += f.config_hash + " seed=" + std::to_string(f.seed) + ": " + f.message + "\n";
    }
    write_text_file(failures_path, text);
  }
}

// ---------------------------------------------------------------------------
// Relabeling

RelabelReport relabel_dataset(const std::vector<std::filesystem::path>& rollout_files,
                              const std::vector<std::filesystem::path>& demo_files,
                              const RewardConfig& reward, const EncoderSpec& encoder,
                              const std::filesystem::path& out_dir) {
  reward.validate();
  RelabelReport report;
  if (demo_files.empty()) throw ArgumentError("relabel needs at least one demo file");

  std::vector<Trajectory> demos;
  for (const auto& path : demo_files) {
    try {
      demos.push_back(Encoder(encoder).encode_trajectory(load_trajectory(path)));
    } catch (const std::exception& e) {
      report.failures.emplace_back(path, e.what());
    }
  }
  if (!report.failures.empty()) {
    for (const auto& path : rollout_files) report.failures.emplace_back(path, "demo files failed to load");
    return report;
  }
  const DemoSet demo_set(std::move(demos));

  std::filesystem::create_directories(out_dir);
  for (const auto& path : rollout_files) {
    try {
      const Trajectory rollout = Encoder(encoder).encode_trajectory(load_trajectory(path));
      const RewardTrace trace = label_rollout(rollout, demo_set, reward);
      const auto target = out_dir / (path.stem().string() + ".rewards");
      save_reward_trace(trace, target);
      report.written.push_back(target);
    } catch (const std::exception& e) {
      report.failures.emplace_back(path, e.what());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Plots

namespace {

struct SeriesPoint {
  double x;
  std::optional<double> y;  // nullopt renders as a gap
  double err = 0.0;
};

struct Series {
  std::string label;
  std::vector<SeriesPoint> points;
};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Line chart with y in [0, 1]. When `categories` is non-empty the x values
// are indices into it.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::vector<Series>& series,
                       const std::vector<std::string>& categories = {}) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double w = 720, h = 420, left = 60, right = 200, top = 40, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;

  double xmin = 0, xmax = 1;
  bool first = true;
  for (const Series& s : series) {
    for (const SeriesPoint& p : s.points) {
      if (first) {
        xmin = xmax = p.x;
        first = false;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
    }
  }
  if (!categories.empty()) {
    xmin = -0.5;
    xmax = static_cast<double>(categories.size()) - 0.5;
  }
  if (xmax == xmin) xmax = xmin + 1;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (1.0 - y) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" +
                    fmt(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(left) + "\" y=\"24\" font-size=\"15\">" + xml_escape(title) + "</text>\n";
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" +
         fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = k / 4.0;
    svg += "<line x1=\"" + fmt(left) + "\" x2=\"" + fmt(left + pw) + "\" y1=\"" + fmt(sy(y)) +
           "\" y2=\"" + fmt(sy(y)) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(sy(y) + 4) + "\" text-anchor=\"end\">" +
           fmt(y) + "</text>\n";
  }
  if (categories.empty()) {
    for (int k = 0; k <= 4; ++k) {
      const double x = xmin + (xmax - xmin) * k / 4.0;
      svg += "<text x=\"" + fmt(sx(x)) + "\" y=\"" + fmt(top + ph + 18) +
             "\" text-anchor=\"middle\">" + std::to_string(std::lround(x)) + "</text>\n";
    }
  } else {
    for (std::size_t k = 0; k < categories.size(); ++k) {
      svg += "<text x=\"" + fmt(sx(static_cast<double>(k))) + "\" y=\"" + fmt(top + ph + 18) +
             "\" text-anchor=\"middle\">" + xml_escape(categories[k]) + "</text>\n";
    }
  }
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(h - 10) +
         "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" transform=\"rotate(-90 16 " +
         fmt(top + ph / 2) + ")\" text-anchor=\"middle\">success rate</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::string color = palette[s % 10];
    std::string path;
    bool pen_down = false;
    for (const SeriesPoint& p : series[s].points) {
      if (!p.y) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L " : " M ") + fmt(sx(p.x)) + " " + fmt(sy(*p.y));
      pen_down = true;
    }
    if (!path.empty()) {
      svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    }
    for (const SeriesPoint& p : series[s].points) {
      if (!p.y) continue;
      svg += "<circle cx=\"" + fmt(sx(p.x)) + "\" cy=\"" + fmt(sy(*p.y)) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
      if (p.err > 0) {
        svg += "<line x1=\"" + fmt(sx(p.x)) + "\" x2=\"" + fmt(sx(p.x)) + "\" y1=\"" +
               fmt(sy(std::min(1.0, *p.y + p.err))) + "\" y2=\"" +
               fmt(sy(std::max(0.0, *p.y - p.err))) + "\" stroke=\"" + color + "\"/>\n";
      }
    }
    const double ly = top + 14 + 18 * static_cast<double>(s);
    svg += "<rect x=\"" + fmt(left + pw + 12) + "\" y=\"" + fmt(ly - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + fmt(left + pw + 28) + "\" y=\"" + fmt(ly) + "\">" +
           xml_escape(series[s].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

struct ConfigInfo {
  std::map<std::string, std::string> fields;  // axis name -> value text
};

}  // namespace

std::vector<std::filesystem::path> plot_results(
    const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir,
    const std::vector<std::pair<std::string, json>>& configs) {
  if (rows.empty()) throw ArgumentError("cannot plot an empty results table");
  std::filesystem::create_directories(out_dir);

  const std::map<std::string, json> config_map(configs.begin(), configs.end());
  const std::vector<AggregateRow> agg = aggregate(rows);

  // Axis values per configuration.
  std::map<std::string, ConfigInfo> info;
  for (const ResultRow& r : rows) {
    ConfigInfo& ci = info[r.config_hash];
    ci.fields["baseline"] = r.baseline;
    ci.fields["k_c"] = std::to_string(r.k_c);
    ci.fields["k_m"] = std::to_string(r.k_m);
    ci.fields["n_demos"] = std::to_string(r.n_demos);
    ci.fields["stride"] = std::to_string(r.stride);
    ci.fields["gamma"] = format_double(r.gamma);
    auto it = config_map.find(r.config_hash);
    if (it != config_map.end() && it->second.contains("reward")) {
      ci.fields["mask"] = it->second["reward"].value("mask", std::string("?"));
    }
  }
  const std::vector<std::string> axis_names = {"baseline", "mask", "k_c", "k_m",
                                               "n_demos", "stride", "gamma"};
  std::vector<std::string> varying;
  for (const std::string& axis : axis_names) {
    std::set<std::string> values;
    for (const auto& [hash, ci] : info) {
      auto f = ci.fields.find(axis);
      if (f != ci.fields.end()) values.insert(f->second);
    }
    if (values.size() > 1) varying.push_back(axis);
  }
  auto label_for = [&](const std::string& hash, const std::string& skip) {
    std::string label;
    for (const std::string& axis : varying) {
      if (axis == skip) continue;
      if (!label.empty()) label += ' ';
      label += axis + "=" + info[hash].fields[axis];
    }
    return label.empty() ? hash.substr(0, 8) : label;
  };

  std::vector<std::filesystem::path> written;

  // Learning curves over the union of evaluation steps.
  std::set<long> steps;
  for (const AggregateRow& a : agg) steps.insert(a.key.env_step);
  std::map<std::string, std::map<long, const AggregateRow*>> by_config;
  for (const AggregateRow& a : agg) by_config[a.key.config_hash][a.key.env_step] = &a;
  std::vector<Series> curves;
  for (const auto& [hash, points] : by_config) {
    Series s{label_for(hash, ""), {}};
    const long last = points.rbegin()->first;
    for (long step : steps) {
      if (step > last) break;
      auto it = points.find(step);
      if (it == points.end()) {
        s.points.push_back({static_cast<double>(step), std::nullopt, 0.0});
      } else {
        s.points.push_back({static_cast<double>(step), it->second->mean, it->second->std});
      }
    }
    curves.push_back(std::move(s));
  }
  const auto curves_path = out_dir / "curves.svg";
  write_text_file(curves_path, render_svg("Evaluation success", "env steps", curves));
  written.push_back(curves_path);

  // Final success per configuration.
  std::map<std::string, const AggregateRow*> final_row;
  for (const auto& [hash, points] : by_config) final_row[hash] = points.rbegin()->second;

  for (const std::string& axis : varying) {
    std::vector<std::string> categories;
    {
      std::set<std::string> values;
      for (auto& [hash, ci] : info) values.insert(ci.fields[axis]);
      categories.assign(values.begin(), values.end());
      if (axis != "baseline" && axis != "mask") {
        std::sort(categories.begin(), categories.end(), [](const std::string& a, const std::string& b) {
          return std::stod(a) < std::stod(b);
        });
      }
    }
    std::map<std::string, Series> groups;
    for (const auto& [hash, row] : final_row) {
      const std::string group = label_for(hash, axis);
      const auto pos = std::find(categories.begin(), categories.end(), info[hash].fields[axis]) -
                       categories.begin();
      Series& s = groups[group];
      s.label = group;
      s.points.push_back({static_cast<double>(pos), row->mean, row->std});
    }
    std::vector<Series> series;
    for (auto& [name, s] : groups) {
      std::sort(s.points.begin(), s.points.end(),
                [](const SeriesPoint& a, const SeriesPoint& b) { return a.x < b.x; });
      series.push_back(std::move(s));
    }
    const auto path = out_dir / ("sweep_" + axis + ".svg");
    write_text_file(path, render_svg("Final success by " + axis, axis, series, categories));
    written.push_back(path);
  }

  std::string summary = "config_hash        final_step  mean   std    seeds  label\n";
  for (const auto& [hash, row] : final_row) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-18s %-11ld %-6.3f %-6.3f %-6d ", hash.c_str(),
                  row->key.env_step, row->mean, row->std, row->seeds);
    summary += line + label_for(hash, "") + "\n";
  }
  const auto summary_path = out_dir / "summary.txt";
  write_text_file(summary_path, summary);
  written.push_back(summary_path);
  return written;
}

}  // namespace temporalot
