#include "ncfr/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ncfr/baselines.hpp"
#include "ncfr/errors.hpp"
#include "ncfr/gibbs.hpp"
#include "ncfr/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ncfr {

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double wall_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown config key '" + ctx + item.key() + "'");
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("bad value for config key '") + key + "'");
    }
  }
}

std::string model_type_name(ModelType t) {
  switch (t) {
    case ModelType::frr: return "frr";
    case ModelType::cfr: return "cfr";
    case ModelType::ncfr: return "ncfr";
  }
  return "ncfr";
}

ModelType model_type_from(const std::string& s) {
  if (s == "frr") return ModelType::frr;
  if (s == "cfr") return ModelType::cfr;
  if (s == "ncfr") return ModelType::ncfr;
  throw ConfigError("bad value for config key 'model.type': " + s);
}

std::string kind_name(ProposalKind k) {
  switch (k) {
    case ProposalKind::plain_prior: return "plain_prior";
    case ProposalKind::simulated_annealing: return "simulated_annealing";
    case ProposalKind::spike_slab: return "spike_slab";
    case ProposalKind::zero: return "zero";
  }
  return "simulated_annealing";
}

ProposalKind kind_from(const std::string& s) {
  if (s == "plain_prior") return ProposalKind::plain_prior;
  if (s == "simulated_annealing") return ProposalKind::simulated_annealing;
  if (s == "spike_slab") return ProposalKind::spike_slab;
  if (s == "zero") return ProposalKind::zero;
  throw ConfigError("bad value for config key 'strategy.kind': " + s);
}

json strategy_to_json(const ProposalStrategy& s) {
  json j;
  j["kind"] = kind_name(s.kind);
  j["spike_weight"] = s.spike_weight;
  j["kappa_max"] = s.kappa_max;
  if (s.k_total_cap > 0) j["k_total_cap"] = s.k_total_cap;
  return j;
}

ProposalStrategy strategy_from_json(const json& j) {
  check_keys(j, {"kind", "spike_weight", "kappa_max", "k_total_cap"}, "model.strategy.");
  ProposalStrategy s;
  if (j.contains("kind")) s.kind = kind_from(j.at("kind").get<std::string>());
  get_if(j, "spike_weight", s.spike_weight);
  get_if(j, "kappa_max", s.kappa_max);
  get_if(j, "k_total_cap", s.k_total_cap);
  return s;
}

json schedule_to_json(const AnnealSchedule& s) {
  return json{{"t0", s.t0}, {"cool", s.cool}, {"t_floor", s.t_floor}};
}

AnnealSchedule schedule_from_json(const json& j) {
  check_keys(j, {"t0", "cool", "t_floor"}, "model.schedule.");
  AnnealSchedule s;
  get_if(j, "t0", s.t0);
  get_if(j, "cool", s.cool);
  get_if(j, "t_floor", s.t_floor);
  return s;
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["type"] = model_type_name(m.type);
  j["k"] = m.k;
  if (m.ridge >= 0.0) j["ridge"] = m.ridge;
  j["noise_mode"] = m.noise_mode == NoiseMode::isotropic ? "isotropic" : "diagonal";
  j["alpha_mode"] = m.alpha_mode == AlphaMode::fixed ? "fixed" : "sampled";
  j["strategy"] = strategy_to_json(m.strategy);
  j["schedule"] = schedule_to_json(m.schedule);
  return j;
}

ModelSpec model_from_json(const json& j) {
  check_keys(j, {"type", "k", "ridge", "noise_mode", "alpha_mode", "strategy", "schedule"},
             "model.");
  ModelSpec m;
  if (j.contains("type")) m.type = model_type_from(j.at("type").get<std::string>());
  get_if(j, "k", m.k);
  get_if(j, "ridge", m.ridge);
  if (j.contains("noise_mode")) {
    const std::string s = j.at("noise_mode").get<std::string>();
    if (s == "isotropic") m.noise_mode = NoiseMode::isotropic;
    else if (s == "diagonal") m.noise_mode = NoiseMode::diagonal;
    else throw ConfigError("bad value for config key 'model.noise_mode': " + s);
  }
  if (j.contains("alpha_mode")) {
    const std::string s = j.at("alpha_mode").get<std::string>();
    if (s == "fixed") m.alpha_mode = AlphaMode::fixed;
    else if (s == "sampled") m.alpha_mode = AlphaMode::sampled;
    else throw ConfigError("bad value for config key 'model.alpha_mode': " + s);
  }
  if (j.contains("strategy")) m.strategy = strategy_from_json(j.at("strategy"));
  if (j.contains("schedule")) m.schedule = schedule_from_json(j.at("schedule"));
  return m;
}

json synth_to_json(const SynthConfig& s) {
  json j;
  j["p"] = s.p;
  j["q"] = s.q;
  j["k_true"] = s.k_true;
  j["n"] = s.n;
  j["bernoulli_p"] = s.bernoulli_p;
  j["noise_y"] = s.noise_y;
  j["noise_z"] = s.noise_z;
  j["seed"] = s.seed;
  if (s.identity_loadings) j["identity_loadings"] = true;
  return j;
}

SynthConfig synth_from_json(const json& j) {
  check_keys(j,
             {"p", "q", "k_true", "n", "bernoulli_p", "noise_y", "noise_z", "seed",
              "identity_loadings"},
             "synth.");
  SynthConfig s;
  get_if(j, "p", s.p);
  get_if(j, "q", s.q);
  get_if(j, "k_true", s.k_true);
  get_if(j, "n", s.n);
  get_if(j, "bernoulli_p", s.bernoulli_p);
  get_if(j, "noise_y", s.noise_y);
  get_if(j, "noise_z", s.noise_z);
  get_if(j, "seed", s.seed);
  get_if(j, "identity_loadings", s.identity_loadings);
  return s;
}

json hp_to_json(const Hyperparams& hp) {
  json j;
  j["a"] = hp.a;
  j["b"] = hp.b;
  j["c"] = hp.c;
  j["d"] = hp.d;
  j["g"] = hp.g;
  j["h"] = hp.h;
  j["alpha_fixed"] = hp.alpha_fixed;
  return j;
}

Hyperparams hp_from_json(const json& j, NoiseMode noise, AlphaMode alpha) {
  check_keys(j, {"a", "b", "c", "d", "g", "h", "alpha_fixed"}, "hyperparams.");
  Hyperparams hp;
  get_if(j, "a", hp.a);
  get_if(j, "b", hp.b);
  get_if(j, "c", hp.c);
  get_if(j, "d", hp.d);
  get_if(j, "g", hp.g);
  get_if(j, "h", hp.h);
  get_if(j, "alpha_fixed", hp.alpha_fixed);
  hp.noise_mode = noise;
  hp.alpha_mode = alpha;
  return hp;
}

json config_to_json_obj(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = model_to_json(c.model);
  if (c.synth) j["synth"] = synth_to_json(*c.synth);
  if (!c.dataset_path.empty()) j["dataset"] = c.dataset_path;
  j["scheme"] = c.scheme == SplitScheme::impute_100 ? "impute_100" : "holdout_100";
  j["test_count"] = c.test_count;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["retain"] = c.retain;
  j["hyperparams"] = hp_to_json(c.hp);
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["chains"] = c.chains;
  j["posterior_mean_prediction"] = c.posterior_mean_prediction;
  return j;
}

RunConfig config_from_json_obj(const json& j) {
  check_keys(j,
             {"name", "model", "synth", "dataset", "scheme", "test_count", "iterations",
              "burn_in", "retain", "hyperparams", "seed", "out_dir", "chains",
              "posterior_mean_prediction"},
             "");
  RunConfig c;
  get_if(j, "name", c.name);
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("synth")) c.synth = synth_from_json(j.at("synth"));
  get_if(j, "dataset", c.dataset_path);
  if (j.contains("scheme")) {
    const std::string s = j.at("scheme").get<std::string>();
    if (s == "impute_100") c.scheme = SplitScheme::impute_100;
    else if (s == "holdout_100") c.scheme = SplitScheme::holdout_100;
    else throw ConfigError("bad value for config key 'scheme': " + s);
  }
  get_if(j, "test_count", c.test_count);
  get_if(j, "iterations", c.iterations);
  // burn_in defaults to iterations - retain when absent
  get_if(j, "retain", c.retain);
  if (j.contains("burn_in")) get_if(j, "burn_in", c.burn_in);
  else c.burn_in = c.iterations - c.retain;
  if (j.contains("hyperparams"))
    c.hp = hp_from_json(j.at("hyperparams"), c.model.noise_mode, c.model.alpha_mode);
  else {
    c.hp.noise_mode = c.model.noise_mode;
    c.hp.alpha_mode = c.model.alpha_mode;
  }
  get_if(j, "seed", c.seed);
  get_if(j, "out_dir", c.out_dir);
  get_if(j, "chains", c.chains);
  get_if(j, "posterior_mean_prediction", c.posterior_mean_prediction);
  return c;
}

}  // namespace

void RunConfig::validate() const {
  if (name.empty()) throw ConfigError("config key 'name' must be non-empty");
  if (iterations < 1) throw ConfigError("config key 'iterations' must be >= 1");
  if (retain < 1) throw ConfigError("config key 'retain' must be >= 1");
  if (burn_in < 0) throw ConfigError("config key 'burn_in' must be >= 0");
  if (burn_in + retain > iterations)
    throw ConfigError("config keys 'burn_in' + 'retain' exceed 'iterations'");
  if (chains < 1) throw ConfigError("config key 'chains' must be >= 1");
  if (test_count < 1) throw ConfigError("config key 'test_count' must be >= 1");
  if (synth.has_value() == !dataset_path.empty())
    throw ConfigError("exactly one of config keys 'synth' and 'dataset' is required");
  if (synth) synth->validate();
  if (model.type == ModelType::cfr && model.k < 1)
    throw ConfigError("config key 'model.k' must be >= 1 for cfr");
  if (model.type == ModelType::ncfr && model.k < 0)
    throw ConfigError("config key 'model.k' must be >= 0 for ncfr");
  model.strategy.validate();
  model.schedule.validate();
  Hyperparams effective = hp;
  effective.noise_mode = model.noise_mode;
  effective.alpha_mode = model.alpha_mode;
  effective.validate();
}

std::string run_config_to_json(const RunConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = config_from_json_obj(j);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return run_config_from_json(ss.str());
}

void save_run_config(const std::string& path, const RunConfig& config) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << run_config_to_json(config);
  if (!os.good()) throw IoError("write failed: " + path);
}

std::vector<RunConfig> load_roster(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<RunConfig> out;
  if (j.contains("roster")) {
    for (const auto& item : j.at("roster")) {
      RunConfig c = config_from_json_obj(item);
      c.validate();
      out.push_back(std::move(c));
    }
  } else {
    RunConfig c = config_from_json_obj(j);
    c.validate();
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kCkptMagic[8] = {'N', 'C', 'F', 'R', 'C', 'K', 'P', '1'};

template <typename T>
void wr(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T rd(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("checkpoint: truncated read");
  return v;
}

void wr_string(std::ostream& os, const std::string& s) {
  wr<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string rd_string(std::istream& is) {
  const auto len = rd<std::uint64_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw IoError("checkpoint: truncated string");
  return s;
}

void wr_matrix(std::ostream& os, const Matrix& m) {
  wr<std::int64_t>(os, m.rows());
  wr<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Matrix rd_matrix(std::istream& is) {
  const auto rows = rd<std::int64_t>(is);
  const auto cols = rd<std::int64_t>(is);
  Matrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw IoError("checkpoint: truncated matrix");
  return m;
}

void wr_int_matrix(std::ostream& os, const IntMatrix& m) {
  wr<std::int64_t>(os, m.rows());
  wr<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(int) * m.size()));
}

IntMatrix rd_int_matrix(std::istream& is) {
  const auto rows = rd<std::int64_t>(is);
  const auto cols = rd<std::int64_t>(is);
  IntMatrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(int) * m.size()));
  if (!is) throw IoError("checkpoint: truncated matrix");
  return m;
}

void wr_vector(std::ostream& os, const Vector& v) {
  wr<std::int64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(sizeof(double) * v.size()));
}

Vector rd_vector(std::istream& is) {
  const auto n = rd<std::int64_t>(is);
  Vector v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * v.size()));
  if (!is) throw IoError("checkpoint: truncated vector");
  return v;
}

void wr_state(std::ostream& os, const LatentState& st) {
  wr_int_matrix(os, st.S);
  wr_matrix(os, st.Z);
  wr_matrix(os, st.Q);
  wr_matrix(os, st.P);
  wr_vector(os, st.psi_y);
  wr_vector(os, st.psi_z);
  wr_vector(os, st.psi_q);
  wr_vector(os, st.psi_p);
  wr<double>(os, st.alpha);
}

LatentState rd_state(std::istream& is) {
  LatentState st;
  st.S = rd_int_matrix(is);
  st.Z = rd_matrix(is);
  st.Q = rd_matrix(is);
  st.P = rd_matrix(is);
  st.psi_y = rd_vector(is);
  st.psi_z = rd_vector(is);
  st.psi_q = rd_vector(is);
  st.psi_p = rd_vector(is);
  st.alpha = rd<double>(is);
  return st;
}

void wr_dataset(std::ostream& os, const RegressionDataset& ds) {
  wr_matrix(os, ds.X);
  wr_matrix(os, ds.Y);
  wr<std::uint64_t>(os, ds.missing.size());
  for (int c : ds.missing) wr<std::int32_t>(os, c);
}

RegressionDataset rd_dataset(std::istream& is) {
  RegressionDataset ds;
  ds.X = rd_matrix(is);
  ds.Y = rd_matrix(is);
  const auto nm = rd<std::uint64_t>(is);
  ds.missing.resize(nm);
  for (auto& c : ds.missing) c = rd<std::int32_t>(is);
  return ds;
}

/// Everything one chain needs to run, persist, and resume.
struct ChainRuntime {
  RunConfig cfg;
  int chain_index = 0;
  Rng rng{0};
  LatentState state;
  RegressionDataset sweep_train;  // imputed columns treated as data
  RegressionDataset test;
  std::vector<int> imputed_cols;  // empty under holdout
  long completed = 0;
  std::vector<LatentState> tail;

  RegressionDataset metrics_train() const {
    RegressionDataset d = sweep_train;
    d.missing = imputed_cols;
    return d;
  }
};

void write_checkpoint(const std::string& path, const ChainRuntime& rt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kCkptMagic, sizeof(kCkptMagic));
  wr_string(os, run_config_to_json(rt.cfg));
  wr<std::int64_t>(os, rt.chain_index);
  wr<std::int64_t>(os, rt.completed);
  wr_string(os, rt.rng.save_state());
  wr_state(os, rt.state);
  wr_dataset(os, rt.sweep_train);
  wr_dataset(os, rt.test);
  wr<std::uint64_t>(os, rt.imputed_cols.size());
  for (int c : rt.imputed_cols) wr<std::int32_t>(os, c);
  wr<std::uint64_t>(os, rt.tail.size());
  for (const auto& st : rt.tail) wr_state(os, st);
  if (!os.good()) throw IoError("write failed: " + path);
}

ChainRuntime read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
    throw IoError("checkpoint version mismatch or not a checkpoint: " + path);
  ChainRuntime rt;
  rt.cfg = run_config_from_json(rd_string(is));
  rt.chain_index = static_cast<int>(rd<std::int64_t>(is));
  rt.completed = rd<std::int64_t>(is);
  rt.rng.load_state(rd_string(is));
  rt.state = rd_state(is);
  rt.sweep_train = rd_dataset(is);
  rt.test = rd_dataset(is);
  const auto ni = rd<std::uint64_t>(is);
  rt.imputed_cols.resize(ni);
  for (auto& c : rt.imputed_cols) c = rd<std::int32_t>(is);
  const auto nt = rd<std::uint64_t>(is);
  rt.tail.resize(nt);
  for (auto& st : rt.tail) st = rd_state(is);
  return rt;
}

// ---------------------------------------------------------------------------
// Chain execution
// ---------------------------------------------------------------------------

struct ChainPaths {
  std::string trace, timing, metrics, checkpoint;
};

ChainPaths chain_paths(const std::string& run_dir, int chain) {
  const std::string suffix = "_chain" + std::to_string(chain);
  return {run_dir + "/trace" + suffix + ".tsv", run_dir + "/timing" + suffix + ".tsv",
          run_dir + "/metrics" + suffix + ".txt",
          run_dir + "/checkpoint" + suffix + ".bin"};
}

std::string effective_out_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("NCFR_OUT_DIR"); env && *env) return env;
  return cfg.out_dir;
}

/// Loads or generates the base dataset (persisting synthetic data into the
/// run directory) and splits it with a dedicated stream so every chain and
/// every resume sees the identical split.
void prepare_data(const RunConfig& cfg, const std::string& run_dir,
                  RegressionDataset& train, RegressionDataset& test,
                  std::vector<int>& imputed_cols) {
  RegressionDataset base;
  if (cfg.synth) {
    auto [ds, gt] = generate(*cfg.synth);
    base = std::move(ds);
    save_dataset(run_dir + "/dataset.txt", base);
    save_ground_truth(run_dir + "/ground_truth.txt", *cfg.synth, gt);
  } else {
    base = load_dataset(cfg.dataset_path);
  }
  Rng split_rng = Rng::chain_stream(cfg.seed, 0xffffffffULL);
  SplitResult sp = split(base, cfg.scheme, split_rng, cfg.test_count);
  test = std::move(sp.test);
  if (cfg.scheme == SplitScheme::impute_100) {
    imputed_cols = sp.test_indices;
    train = std::move(sp.train);
    train.missing.clear();  // imputed columns are data to the sweep
  } else {
    imputed_cols.clear();
    train = std::move(sp.train);
  }
}

void impute_missing(ChainRuntime& rt) {
  if (rt.imputed_cols.empty()) return;
  const Matrix zt = rt.state.masked_latent();
  for (int c : rt.imputed_cols) {
    Vector mean = rt.state.k() > 0 ? Vector(rt.state.Q * zt.col(c))
                                   : Vector::Zero(rt.sweep_train.q());
    for (int i = 0; i < rt.sweep_train.q(); ++i)
      rt.sweep_train.Y(i, c) = rt.rng.normal(mean[i], std::sqrt(rt.state.psi_y[i]));
  }
}

/// Runs `count` more sweeps, appending trace/timing rows and maintaining the
/// retained tail ring.
void run_chain_block(ChainRuntime& rt, long count, std::vector<TraceRecord>& trace,
                     std::vector<IterTiming>& timings) {
  RegressionDataset view = rt.metrics_train();
  gibbs::SweepOptions opts;
  opts.strategy = rt.cfg.model.strategy;
  opts.sample_mask = rt.cfg.model.type == ModelType::ncfr;
  for (long i = 0; i < count; ++i) {
    const long it = rt.completed + 1;
    const double cpu0 = thread_cpu_seconds();
    const double wall0 = wall_seconds();
    opts.temperature = temperature_at(rt.cfg.model.schedule, it - 1);
    impute_missing(rt);
    gibbs::gibbs_sweep(rt.state, rt.sweep_train, rt.cfg.hp, opts, rt.rng);
    if (!rt.imputed_cols.empty())
      view.Y = rt.sweep_train.Y;  // imputed values excluded via missing markers
    const double jll = joint_log_likelihood(rt.state, view);
    rt.completed = it;
    trace.push_back({it, rt.state.k(), jll, opts.temperature});
    timings.push_back({it, thread_cpu_seconds() - cpu0, wall_seconds() - wall0});
    rt.tail.push_back(rt.state);
    if (rt.tail.size() > static_cast<size_t>(rt.cfg.retain))
      rt.tail.erase(rt.tail.begin());
  }
}

MetricsReport frr_metrics(const Matrix& reg, const RegressionDataset& train,
                          const RegressionDataset& test,
                          const std::vector<IterTiming>& timings) {
  MetricsReport rep;
  rep.nlse_per_dim = nlse(reg * test.X, test.Y);
  rep.nlse_summary = quartiles(rep.nlse_per_dim);

  const std::vector<char> obs = train.observed_mask();
  Matrix x_tr(train.p(), train.n_observed()), y_tr(train.q(), train.n_observed());
  int w = 0;
  for (int n = 0; n < train.n(); ++n) {
    if (!obs[static_cast<size_t>(n)]) continue;
    x_tr.col(w) = train.X.col(n);
    y_tr.col(w) = train.Y.col(n);
    ++w;
  }
  rep.nlse_train_per_dim = nlse(reg * x_tr, y_tr);
  double delta = 0.0;
  int finite = 0;
  for (Eigen::Index i = 0; i < rep.nlse_per_dim.size(); ++i) {
    if (!std::isfinite(rep.nlse_per_dim[i]) || !std::isfinite(rep.nlse_train_per_dim[i]))
      continue;
    delta += rep.nlse_per_dim[i] - rep.nlse_train_per_dim[i];
    ++finite;
  }
  rep.train_test_delta = finite > 0 ? delta / finite : 0.0;
  rep.pred_loglik_last = {std::numeric_limits<double>::quiet_NaN()};
  rep.k_last = {0};
  for (const auto& t : timings) rep.seconds_per_iter_last.push_back(t.cpu_seconds);
  rep.best_sample_index = 0;
  rep.best_joint_ll = std::numeric_limits<double>::quiet_NaN();
  rep.nlse_normalization += "; frr closed-form fit";
  return rep;
}

ChainResult run_one_chain(const RunConfig& cfg, const std::string& run_dir,
                          int chain, const RegressionDataset& train,
                          const RegressionDataset& test,
                          const std::vector<int>& imputed_cols) {
  const ChainPaths paths = chain_paths(run_dir, chain);
  ChainResult result;
  result.chain_index = chain;

  if (cfg.model.type == ModelType::frr) {
    RegressionDataset fit_view = train;
    fit_view.missing = imputed_cols;  // complete-case fitting
    const double cpu0 = thread_cpu_seconds();
    const double wall0 = wall_seconds();
    const double ridge =
        cfg.model.ridge >= 0.0 ? cfg.model.ridge : frr_default_ridge(fit_view);
    const Matrix reg = fit_frr(fit_view, ridge);
    result.timings.push_back({1, thread_cpu_seconds() - cpu0, wall_seconds() - wall0});
    result.trace.push_back({1, 0, std::numeric_limits<double>::quiet_NaN(), 0.0});
    result.metrics = frr_metrics(reg, fit_view, test, result.timings);
    write_trace(paths.trace, result.trace);
    write_timings(paths.timing, result.timings);
    write_metrics(paths.metrics, result.metrics);
    return result;
  }

  ChainRuntime rt;
  rt.cfg = cfg;
  rt.chain_index = chain;
  rt.rng = Rng::chain_stream(cfg.seed, static_cast<std::uint64_t>(chain));
  rt.sweep_train = train;
  rt.test = test;
  rt.imputed_cols = imputed_cols;
  const MaskInit mask_init =
      cfg.model.type == ModelType::cfr ? MaskInit::all_ones : MaskInit::bernoulli_half;
  Hyperparams hp = cfg.hp;
  hp.noise_mode = cfg.model.noise_mode;
  hp.alpha_mode = cfg.model.alpha_mode;
  rt.cfg.hp = hp;
  rt.state = init_state(rt.sweep_train, hp, cfg.model.k, rt.rng, mask_init);

  run_chain_block(rt, cfg.iterations, result.trace, result.timings);

  RegressionDataset metrics_view = rt.metrics_train();
  result.metrics = summarize(rt.tail, metrics_view, rt.test, result.timings,
                             cfg.posterior_mean_prediction);
  write_trace(paths.trace, result.trace);
  write_timings(paths.timing, result.timings);
  write_metrics(paths.metrics, result.metrics);
  write_checkpoint(paths.checkpoint, rt);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config_in) {
  RunConfig cfg = config_in;
  cfg.out_dir = effective_out_dir(cfg);
  cfg.validate();

  const std::string run_dir = cfg.out_dir + "/" + cfg.name;
  fs::create_directories(run_dir);
  save_run_config(run_dir + "/effective_config.json", cfg);

  RegressionDataset train, test;
  std::vector<int> imputed_cols;
  prepare_data(cfg, run_dir, train, test, imputed_cols);

  ExperimentResult out;
  out.run_dir = run_dir;
  out.chains.resize(static_cast<size_t>(cfg.chains));

  if (cfg.chains == 1) {
    out.chains[0] = run_one_chain(cfg, run_dir, 0, train, test, imputed_cols);
    return out;
  }

  std::vector<std::thread> threads;
  std::vector<std::string> errors(static_cast<size_t>(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c) {
    threads.emplace_back([&, c]() {
      try {
        out.chains[static_cast<size_t>(c)] =
            run_one_chain(cfg, run_dir, c, train, test, imputed_cols);
      } catch (const std::exception& e) {
        errors[static_cast<size_t>(c)] = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& err : errors)
    if (!err.empty()) throw NumericalError("chain failed: " + err);
  return out;
}

ChainResult resume(const std::string& checkpoint_path, long extra_iterations) {
  if (extra_iterations < 1)
    throw ConfigError("resume: extra_iterations must be >= 1");
  ChainRuntime rt = read_checkpoint(checkpoint_path);
  const std::string run_dir = fs::path(checkpoint_path).parent_path().string();
  const ChainPaths paths = chain_paths(run_dir, rt.chain_index);

  rt.cfg.iterations = rt.completed + extra_iterations;
  if (rt.cfg.burn_in + rt.cfg.retain > rt.cfg.iterations)
    rt.cfg.burn_in = rt.cfg.iterations - rt.cfg.retain;

  ChainResult result;
  result.chain_index = rt.chain_index;
  run_chain_block(rt, extra_iterations, result.trace, result.timings);

  append_trace(paths.trace, result.trace);
  append_timings(paths.timing, result.timings);
  RegressionDataset metrics_view = rt.metrics_train();
  const std::vector<IterTiming> all_timings = read_timings(paths.timing);
  result.metrics = summarize(rt.tail, metrics_view, rt.test, all_timings,
                             rt.cfg.posterior_mean_prediction);
  write_metrics(paths.metrics, result.metrics);
  write_checkpoint(paths.checkpoint, rt);
  save_run_config(run_dir + "/effective_config.json", rt.cfg);
  return result;
}

ChainResult resume_report(const std::string& checkpoint_path) {
  ChainRuntime rt = read_checkpoint(checkpoint_path);
  const std::string run_dir = fs::path(checkpoint_path).parent_path().string();
  const ChainPaths paths = chain_paths(run_dir, rt.chain_index);

  ChainResult result;
  result.chain_index = rt.chain_index;
  result.trace = read_trace(paths.trace);
  result.timings = read_timings(paths.timing);
  RegressionDataset metrics_view = rt.metrics_train();
  result.metrics = summarize(rt.tail, metrics_view, rt.test, result.timings,
                             rt.cfg.posterior_mean_prediction);
  write_metrics(paths.metrics, result.metrics);
  return result;
}

namespace {

int mode_of(const std::vector<int>& values) {
  std::map<int, int> counts;
  for (int v : values) ++counts[v];
  int best = values.empty() ? 0 : values.front(), best_count = -1;
  for (const auto& [v, c] : counts)
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  return best;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

}  // namespace

void run_roster(const std::vector<RunConfig>& roster, const std::string& table_path) {
  std::ofstream os(table_path);
  if (!os) throw IoError("cannot open for writing: " + table_path);
  os << std::setprecision(8);
  os << "model\tnlse_median\tnlse_q1\tnlse_q3\tpred_loglik_mean\tk_mode\t"
        "cpu_per_iter\ttrain_test_delta\n";
  for (const auto& cfg : roster) {
    ExperimentResult res = run_experiment(cfg);
    const MetricsReport& m = res.chains.front().metrics;
    os << cfg.name << '\t' << m.nlse_summary.median << '\t' << m.nlse_summary.q1
       << '\t' << m.nlse_summary.q3 << '\t' << mean_of(m.pred_loglik_last) << '\t'
       << mode_of(m.k_last) << '\t' << mean_of(m.seconds_per_iter_last) << '\t'
       << m.train_test_delta << '\n';
    os.flush();
    std::cerr << "roster: finished " << cfg.name << '\n';
  }
  if (!os.good()) throw IoError("write failed: " + table_path);
}

std::vector<RunConfig> default_roster(const SynthConfig& synth, SplitScheme scheme,
                                      long iterations, int retain,
                                      std::uint64_t seed, const std::string& out_dir) {
  RunConfig base;
  base.synth = synth;
  base.scheme = scheme;
  base.iterations = iterations;
  base.retain = retain;
  base.burn_in = iterations - retain;
  base.seed = seed;
  base.out_dir = out_dir;

  std::vector<RunConfig> roster;
  auto add = [&](const std::string& name, ModelSpec model) {
    RunConfig c = base;
    c.name = name;
    c.model = std::move(model);
    roster.push_back(std::move(c));
  };

  {
    ModelSpec m;
    m.type = ModelType::frr;
    add("FRR", m);
  }
  for (int k : {15, 20, 25}) {
    ModelSpec m;
    m.type = ModelType::cfr;
    m.k = k;
    add("CFR" + std::to_string(k), m);
  }
  // NCFR variants: default is diagonal noise, sampled alpha, annealed moves.
  // The sampled-alpha row of the study is the same configuration as SAMH, so
  // it appears once, leaving 13 comparison rows.
  auto ncfr = [&](ProposalKind kind) {
    ModelSpec m;
    m.type = ModelType::ncfr;
    m.k = 1;
    m.strategy.kind = kind;
    return m;
  };
  {
    ModelSpec m = ncfr(ProposalKind::simulated_annealing);
    m.alpha_mode = AlphaMode::fixed;
    add("NCFR-FixA", m);
  }
  {
    ModelSpec m = ncfr(ProposalKind::simulated_annealing);
    m.noise_mode = NoiseMode::isotropic;
    add("NCFR-Iso", m);
  }
  add("NCFR-Diag", ncfr(ProposalKind::simulated_annealing));
  add("NCFR-PMH", ncfr(ProposalKind::plain_prior));
  add("NCFR-SAMH", ncfr(ProposalKind::simulated_annealing));
  add("NCFR-SSMH", ncfr(ProposalKind::spike_slab));
  for (int k0 : {15, 20, 25}) {
    ModelSpec m = ncfr(ProposalKind::zero);
    m.k = k0;
    add("NCFR-ZMH" + std::to_string(k0), m);
  }
  return roster;
}

}  // namespace ncfr
