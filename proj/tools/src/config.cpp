#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ndecode/error.hpp"

namespace ndecode::cli {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorKind::config, key + " = \"" + value + "\": expected " + expected);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto s = trim(v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto s = trim(v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto s = trim(v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_value(key, v, "true or false");
}

template <typename T>
std::vector<T> to_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<T>(to_u64(key, item)));
  return out;
}

GridDims to_dims(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, 'x')) parts.push_back(to_u64(key, item));
  if (parts.size() != 3) bad_value(key, v, "dims as XxYxZ");
  for (auto p : parts)
    if (p == 0 || p > 0xffffffffULL) bad_value(key, v, "positive dims");
  return {static_cast<std::uint32_t>(parts[0]), static_cast<std::uint32_t>(parts[1]),
          static_cast<std::uint32_t>(parts[2])};
}

std::string from_double(double d) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, ptr);
}

template <typename T>
std::string from_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string from_dims(GridDims d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

struct Key {
  std::string section;
  std::string name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string& qualified, const std::string&)> set;
};

#define NDECODE_KEY(section, name, member, to, from)                                              \
  Key {                                                                                           \
    section, name, [](const ExperimentConfig& c) { return from(c.member); },                     \
        [](ExperimentConfig& c, const std::string& q, const std::string& v) { c.member = to(q, v); } \
  }

template <typename T>
auto to_uint = [](const std::string& q, const std::string& v) { return static_cast<T>(to_u64(q, v)); };
auto from_uint = [](auto v) { return std::to_string(v); };
auto from_bool = [](bool v) { return std::string(v ? "true" : "false"); };
auto to_string_value = [](const std::string&, const std::string& v) { return trim(v); };
auto from_string_value = [](const std::string& v) { return v; };
auto to_strategy = [](const std::string&, const std::string& v) { return parse_strategy(trim(v)); };
auto from_strategy = [](Strategy s) { return std::string(to_string(s)); };

const std::vector<Key>& registry() {
  static const std::vector<Key> keys{
      NDECODE_KEY("cohort", "n_subjects", cohort.model.n_subjects, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("cohort", "dims", cohort.dims, to_dims, from_dims),
      NDECODE_KEY("cohort", "latent_dim", cohort.model.latent_dim, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("cohort", "shared_frac", cohort.model.shared_frac, to_double, from_double),
      NDECODE_KEY("cohort", "noise_sigma", cohort.model.noise_sigma, to_double, from_double),
      NDECODE_KEY("cohort", "seed", cohort.model.seed, to_uint<std::uint64_t>, from_uint),
      NDECODE_KEY("cohort", "n_trs", cohort.n_trs, to_uint<std::uint32_t>, from_uint),
      NDECODE_KEY("cohort", "tr_seconds", cohort.tr_seconds, to_double, from_double),
      NDECODE_KEY("cohort", "stimulus_seed", cohort.stimulus_seed, to_uint<std::uint64_t>, from_uint),
      NDECODE_KEY("cohort", "noise_seed", cohort.noise_seed, to_uint<std::uint64_t>, from_uint),

      NDECODE_KEY("pairs", "window_len", pairs.pairing.window_len, to_uint<std::uint32_t>, from_uint),
      NDECODE_KEY("pairs", "window_offset", pairs.pairing.window_offset, to_uint<std::uint32_t>, from_uint),
      NDECODE_KEY("pairs", "target_dims", pairs.pairing.target_dims, to_dims, from_dims),
      NDECODE_KEY("pairs", "standardize", pairs.pairing.standardize, to_bool, from_bool),
      NDECODE_KEY("pairs", "n_test", pairs.n_test, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("pairs", "split_seed", pairs.split_seed, to_uint<std::uint64_t>, from_uint),

      NDECODE_KEY("encoder", "hidden", encoder.hidden, to_list<std::size_t>, from_list<std::size_t>),
      NDECODE_KEY("encoder", "init_seed", encoder.init_seed, to_uint<std::uint64_t>, from_uint),

      NDECODE_KEY("train", "batch_size", train.train.batch_size, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("train", "max_lr", train.train.max_lr, to_double, from_double),
      NDECODE_KEY("train", "beta1", train.train.beta1, to_double, from_double),
      NDECODE_KEY("train", "beta2", train.train.beta2, to_double, from_double),
      NDECODE_KEY("train", "eps", train.train.eps, to_double, from_double),
      NDECODE_KEY("train", "weight_decay", train.train.weight_decay, to_double, from_double),
      NDECODE_KEY("train", "epochs", train.train.epochs, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("train", "epoch_pairs", train.train.epoch_pairs, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("train", "strategy", train.train.strategy, to_strategy, from_strategy),
      NDECODE_KEY("train", "tau", train.train.tau, to_double, from_double),
      NDECODE_KEY("train", "alpha", train.train.alpha, to_double, from_double),
      NDECODE_KEY("train", "softclip_bidirectional", train.train.softclip_bidirectional, to_bool, from_bool),
      NDECODE_KEY("train", "warmup_frac", train.train.schedule.warmup_frac, to_double, from_double),
      NDECODE_KEY("train", "div_factor", train.train.schedule.div_factor, to_double, from_double),
      NDECODE_KEY("train", "final_div_factor", train.train.schedule.final_div_factor, to_double, from_double),
      NDECODE_KEY("train", "seed", train.train.seed, to_uint<std::uint64_t>, from_uint),
      NDECODE_KEY("train", "eval_every", train.train.eval_every, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("train", "subjects", train.subjects, to_list<SubjectId>, from_list<SubjectId>),

      NDECODE_KEY("eval", "ks", eval.ks, to_list<std::size_t>, from_list<std::size_t>),
      NDECODE_KEY("eval", "subsample", eval.subsample, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("eval", "trials", eval.trials, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("eval", "subsample_k", eval.subsample_k, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("eval", "seed", eval.seed, to_uint<std::uint64_t>, from_uint),

      NDECODE_KEY("similarity", "target", similarity.target, to_uint<SubjectId>, from_uint),
      NDECODE_KEY("similarity", "candidates", similarity.candidates, to_list<SubjectId>, from_list<SubjectId>),
      NDECODE_KEY("similarity", "top_k", similarity.top_k, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("similarity", "method", similarity.method, to_string_value, from_string_value),
      NDECODE_KEY("similarity", "select", similarity.select, to_uint<std::size_t>, from_uint),
      NDECODE_KEY("similarity", "mode", similarity.mode, to_string_value, from_string_value),

      NDECODE_KEY("sweep", "grid", sweep.grid, to_list<std::size_t>, from_list<std::size_t>),
      NDECODE_KEY("sweep", "seeds", sweep.seeds, to_list<std::uint64_t>, from_list<std::uint64_t>),
      NDECODE_KEY("sweep", "seen_pool", sweep.seen_pool, to_list<SubjectId>, from_list<SubjectId>),
      NDECODE_KEY("sweep", "unseen", sweep.unseen, to_list<SubjectId>, from_list<SubjectId>),
      NDECODE_KEY("sweep", "shuffle_pool", sweep.shuffle_pool, to_bool, from_bool),
  };
  return keys;
}

#undef NDECODE_KEY

void check_enums(const ExperimentConfig& c) {
  require(c.similarity.method == "rank_credit" || c.similarity.method == "mean", ErrorKind::config,
          "similarity.method must be rank_credit or mean");
  require(c.similarity.mode == "most_similar" || c.similarity.mode == "least_similar", ErrorKind::config,
          "similarity.mode must be most_similar or least_similar");
}

}  // namespace

ExperimentConfig::ExperimentConfig() { pairs.pairing.target_dims = cohort.dims; }

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::config, "config line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, const Key*> index;
  for (const auto& k : registry()) index[k.section + "." + k.name] = &k;

  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    require(body.data().empty(), ErrorKind::config, "key \"" + section + "\" is outside any section");
    for (const auto& [name, value] : body) {
      const std::string qualified = section + "." + name;
      const auto it = index.find(qualified);
      require(it != index.end(), ErrorKind::config, "unknown config key " + qualified);
      it->second->set(config, qualified, value.data());
    }
  }
  check_enums(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& config) {
  std::string out, section;
  for (const auto& k : registry()) {
    if (k.section != section) {
      out += (section.empty() ? "[" : "\n[") + k.section + "]\n";
      section = k.section;
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

void override_seeds(ExperimentConfig& c, std::uint64_t seed) {
  c.cohort.model.seed = seed;
  c.cohort.stimulus_seed = seed;
  c.cohort.noise_seed = seed;
  c.pairs.split_seed = seed;
  c.encoder.init_seed = seed;
  c.train.train.seed = seed;
  c.eval.seed = seed;
}

}  // namespace ndecode::cli
