#include "limo/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace limo {

namespace {

struct Entry {
  std::string key;  // "section.key"
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (is.fail() || !is.eof())
    throw std::invalid_argument("bad value for " + key + ": " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad boolean for " + key + ": " + value);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::vector<Entry> registry() {
  std::vector<Entry> r;
  auto num = [&r](const std::string& key, auto member) {
    using T = std::decay_t<decltype(std::declval<RunConfig>().*member)>;
    r.push_back({key,
                 [member](const RunConfig& c) {
                   std::ostringstream os;
                   os << c.*member;
                   return os.str();
                 },
                 [member, key](RunConfig& c, const std::string& v) {
                   c.*member = parse_number<T>(key, v);
                 }});
  };
  auto str = [&r](const std::string& key, auto member) {
    r.push_back({key,
                 [member](const RunConfig& c) { return c.*member; },
                 [member](RunConfig& c, const std::string& v) {
                   c.*member = v;
                 }});
  };

  num("model.n", &RunConfig::model_n);
  num("model.d", &RunConfig::model_d);
  num("model.m", &RunConfig::model_m);
  num("model.hidden", &RunConfig::model_hidden);

  num("train.epochs", &RunConfig::train_epochs);
  num("train.lr", &RunConfig::train_lr);
  num("train.batch", &RunConfig::train_batch);
  num("train.seed", &RunConfig::train_seed);
  num("train.recon_weight", &RunConfig::train_recon_weight);
  num("train.kl_weight", &RunConfig::train_kl_weight);

  num("predictor.dataset", &RunConfig::predictor_dataset);
  num("predictor.epochs", &RunConfig::predictor_epochs);
  str("predictor.mode", &RunConfig::predictor_mode);
  num("predictor.hidden", &RunConfig::predictor_hidden);
  num("predictor.seed", &RunConfig::predictor_seed);

  num("optimize.steps", &RunConfig::optimize_steps);
  num("optimize.lr", &RunConfig::optimize_lr);
  num("optimize.restarts", &RunConfig::optimize_restarts);
  num("optimize.lambda", &RunConfig::optimize_lambda);
  num("optimize.w_affinity", &RunConfig::optimize_w_affinity);
  num("optimize.w_qed", &RunConfig::optimize_w_qed);
  num("optimize.w_sa", &RunConfig::optimize_w_sa);

  num("filter.qed_min", &RunConfig::filter_qed_min);
  num("filter.sa_max", &RunConfig::filter_sa_max);

  str("oracle.command", &RunConfig::oracle_command);
  num("oracle.timeout", &RunConfig::oracle_timeout);
  num("oracle.parallelism", &RunConfig::oracle_parallelism);
  str("oracle.cache", &RunConfig::oracle_cache);

  r.push_back({"report.timing",
               [](const RunConfig& c) { return bool_text(c.report_timing); },
               [](RunConfig& c, const std::string& v) {
                 c.report_timing = parse_bool("report.timing", v);
               }});

  num("runtime.threads", &RunConfig::runtime_threads);

  str("paths.out_dir", &RunConfig::paths_out_dir);
  str("paths.corpus", &RunConfig::paths_corpus);
  str("paths.vae_checkpoint", &RunConfig::paths_vae_checkpoint);
  str("paths.predictor_checkpoint", &RunConfig::paths_predictor_checkpoint);
  return r;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> r = registry();
  return r;
}

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : entries()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream os;
  std::string section;
  for (const Entry& e : entries()) {
    std::string sec = e.key.substr(0, e.key.find('.'));
    std::string name = e.key.substr(e.key.find('.') + 1);
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << name << " = " << e.get(*this) << "\n";
  }
  return os.str();
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig config;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;
    const Entry* e = find_entry(full);
    if (!e)
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": unknown config key: " + full);
    e->set(config, value);
  }
  if (config.model_d != 19)
    throw std::invalid_argument(source + ": model.d must be 19 (alphabet size)");
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config file not found: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path);
}

void apply_env_overrides(RunConfig& config) {
  for (const Entry& e : entries()) {
    std::string env = "LIMO_";
    for (char c : e.key) {
      env += c == '.' ? '_' : static_cast<char>(
                    std::toupper(static_cast<unsigned char>(c)));
    }
    if (const char* v = std::getenv(env.c_str())) {
      e.set(config, v);
    }
  }
}

void apply_override(RunConfig& config, const std::string& key,
                    const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw std::invalid_argument("unknown config key: " + key);
  e->set(config, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Entry& e : entries()) out.push_back(e.key);
  return out;
}

std::string run_id(const RunConfig& config,
                   const std::vector<std::string>& extra) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  mix(config.serialize());
  for (const auto& s : extra) mix(s);
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace limo
