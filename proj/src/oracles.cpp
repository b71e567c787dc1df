#include "limo/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace limo {

double PropertyOracle::score(const MolGraph& g) {
  auto res = score_batch({g});
  if (!res[0].ok()) throw std::runtime_error("oracle error: " + res[0].error);
  return *res[0].value;
}

// ---------------------------------------------------------------------------
// Surrogate formulas.
// ---------------------------------------------------------------------------

namespace {

constexpr double kLogpContribution[kElementCount] = {
    /*C*/ 0.2, /*N*/ -0.6, /*O*/ -0.4, /*F*/ 0.1,
    /*S*/ 0.4, /*P*/ 0.1,  /*Cl*/ 0.6, /*Br*/ 0.9};

}  // namespace

double logp_surrogate(const MolGraph& g) {
  double total = 0.0;
  for (Element e : g.atoms) total += kLogpContribution[static_cast<int>(e)];
  auto in_ring = ring_atoms(g);
  for (bool r : in_ring) {
    if (r) total -= 0.1;
  }
  return total;
}

double sa_surrogate(const MolGraph& g) {
  const int heavy = g.atom_count();
  auto rings = ring_sizes(g);
  int macro = 0;
  for (int s : rings) macro += s > 8;
  int crowded = 0;
  for (int i = 0; i < heavy; ++i) crowded += g.degree(i) >= 4;
  double score = 1.0 + 0.05 * std::max(0, heavy - 20) +
                 0.3 * static_cast<double>(rings.size()) + 1.0 * macro +
                 0.2 * crowded;
  return std::clamp(score, 1.0, 10.0);
}

double qed_surrogate(const MolGraph& g) {
  const double heavy = g.atom_count();
  const double lp = logp_surrogate(g);
  const double rings = static_cast<double>(ring_sizes(g).size());
  const double d1 = std::exp(-(heavy - 23.0) * (heavy - 23.0) / (2.0 * 64.0));
  const double d2 = std::exp(-(lp - 2.5) * (lp - 2.5) / (2.0 * 4.0));
  const double d3 = std::exp(-(rings - 2.0) * (rings - 2.0) / (2.0 * 2.25));
  return std::cbrt(d1 * d2 * d3);
}

double plogp(const MolGraph& g) {
  auto rings = ring_sizes(g);
  int big = 0;
  for (int s : rings) big += s > 6;
  return logp_surrogate(g) - sa_surrogate(g) - big;
}

namespace {

class SurrogateOracle : public PropertyOracle {
 public:
  SurrogateOracle(std::string name, Direction dir,
                  double (*fn)(const MolGraph&))
      : name_(std::move(name)), dir_(dir), fn_(fn) {}
  std::string name() const override { return name_; }
  Direction direction() const override { return dir_; }
  std::vector<ScoreResult> score_batch(
      const std::vector<MolGraph>& mols) override {
    std::vector<ScoreResult> out(mols.size());
    for (std::size_t i = 0; i < mols.size(); ++i)
      out[i].value = fn_(mols[i]);
    return out;
  }

 private:
  std::string name_;
  Direction dir_;
  double (*fn_)(const MolGraph&);
};

}  // namespace

std::unique_ptr<PropertyOracle> make_surrogate_oracle(const std::string& name) {
  if (name == "logp")
    return std::make_unique<SurrogateOracle>("logp", Direction::Maximize,
                                             logp_surrogate);
  if (name == "sa")
    return std::make_unique<SurrogateOracle>("sa", Direction::Minimize,
                                             sa_surrogate);
  if (name == "qed")
    return std::make_unique<SurrogateOracle>("qed", Direction::Maximize,
                                             qed_surrogate);
  if (name == "plogp")
    return std::make_unique<SurrogateOracle>("plogp", Direction::Maximize,
                                             plogp);
  throw std::invalid_argument("unknown surrogate oracle: " + name);
}

// ---------------------------------------------------------------------------
// External process oracle.
// ---------------------------------------------------------------------------

namespace {

struct ChildProcess {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;

  ~ChildProcess() {
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    if (pid > 0) {
      int status = 0;
      // Give the child a moment to exit after stdin closes, then reap.
      for (int i = 0; i < 200; ++i) {
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) return;
        usleep(5000);
      }
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
    }
  }
};

ChildProcess spawn(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw std::runtime_error("oracle spawn: pipe failed");
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("oracle spawn: fork failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  ChildProcess cp;
  cp.pid = pid;
  cp.to_child = in_pipe[1];
  cp.from_child = out_pipe[0];
  return cp;
}

}  // namespace

ExternalOracle::ExternalOracle(ExternalOracleConfig config)
    : config_(std::move(config)) {
  if (config_.command.empty())
    throw std::invalid_argument("external oracle needs a command");
  if (config_.max_in_flight < 1) config_.max_in_flight = 1;
}

std::vector<ScoreResult> ExternalOracle::score_batch(
    const std::vector<MolGraph>& mols) {
  std::vector<ScoreResult> out(mols.size());
  if (mols.empty()) return out;

  signal(SIGPIPE, SIG_IGN);  // broken pipe surfaces as EPIPE instead
  ChildProcess child = spawn(config_.command);

  std::vector<std::string> requests(mols.size());
  for (std::size_t i = 0; i < mols.size(); ++i) {
    nlohmann::json j;
    j["id"] = i;
    j["smiles"] = to_smiles(mols[i]);
    requests[i] = j.dump() + "\n";
  }

  using Clock = std::chrono::steady_clock;
  std::vector<char> answered(mols.size(), 0);
  std::vector<Clock::time_point> sent_at(mols.size());
  std::size_t next_to_send = 0;
  std::size_t in_flight = 0;
  std::size_t remaining = mols.size();
  std::string read_buf;
  std::string write_buf;
  bool stdin_open = true;

  auto mark_timeouts = [&]() {
    auto now = Clock::now();
    for (std::size_t i = 0; i < next_to_send; ++i) {
      if (answered[i]) continue;
      double waited =
          std::chrono::duration<double>(now - sent_at[i]).count();
      if (waited > config_.timeout_seconds) {
        answered[i] = 1;
        out[i].error = "timeout";
        --in_flight;
        --remaining;
      }
    }
  };

  auto handle_line = [&](const std::string& line) {
    if (line.empty()) return;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j["id"].is_number_integer()) {
      return;  // unattributable line; the id times out as missing
    }
    std::size_t id = j["id"].get<std::size_t>();
    if (id >= mols.size() || answered[id]) return;
    answered[id] = 1;
    --in_flight;
    --remaining;
    if (j.contains("score") && j["score"].is_number()) {
      out[id].value = j["score"].get<double>();
    } else {
      out[id].error = "malformed response";
    }
  };

  while (remaining > 0) {
    // Keep the pipeline full up to the in-flight bound.
    while (next_to_send < mols.size() &&
           in_flight < static_cast<std::size_t>(config_.max_in_flight)) {
      write_buf += requests[next_to_send];
      sent_at[next_to_send] = Clock::now();
      ++next_to_send;
      ++in_flight;
    }
    if (next_to_send == mols.size() && stdin_open && write_buf.empty()) {
      close(child.to_child);
      child.to_child = -1;
      stdin_open = false;
    }

    struct pollfd fds[2];
    int nfds = 0;
    fds[nfds].fd = child.from_child;
    fds[nfds].events = POLLIN;
    ++nfds;
    if (stdin_open && !write_buf.empty()) {
      fds[nfds].fd = child.to_child;
      fds[nfds].events = POLLOUT;
      ++nfds;
    }
    int rc = poll(fds, nfds, 100);
    if (rc < 0) break;
    if (fds[0].revents & POLLIN) {
      char buf[4096];
      ssize_t n = read(child.from_child, buf, sizeof buf);
      if (n <= 0) break;  // child closed stdout; leftover ids error below
      read_buf.append(buf, static_cast<std::size_t>(n));
      std::size_t pos;
      while ((pos = read_buf.find('\n')) != std::string::npos) {
        handle_line(read_buf.substr(0, pos));
        read_buf.erase(0, pos + 1);
      }
    } else if (fds[0].revents & (POLLHUP | POLLERR)) {
      break;
    }
    if (nfds > 1 && (fds[1].revents & POLLOUT)) {
      ssize_t n = write(child.to_child, write_buf.data(), write_buf.size());
      if (n < 0) {
        stdin_open = false;
        close(child.to_child);
        child.to_child = -1;
      } else {
        write_buf.erase(0, static_cast<std::size_t>(n));
      }
    }
    mark_timeouts();
  }

  bool any_ok = false;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    if (!answered[i] && !out[i].ok() && out[i].error.empty())
      out[i].error = "no response";
    any_ok = any_ok || out[i].ok();
  }
  if (!any_ok) {
    // Distinguish a command that never started from one that misbehaved.
    int status = 0;
    pid_t r = waitpid(child.pid, &status, WNOHANG);
    if (r == child.pid) {
      child.pid = -1;
      if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
        throw std::runtime_error("oracle process failed to start: " +
                                 config_.command);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thermodynamics.
// ---------------------------------------------------------------------------

double kd_from_dg(double dg_kcal_per_mol, double temperature_k) {
  const double rt = kGasConstantKcal * temperature_k;
  return std::exp(dg_kcal_per_mol / rt) * 1e9;
}

double combine_poses(const std::vector<double>& dgs, double temperature_k) {
  if (dgs.empty()) throw std::invalid_argument("combine_poses: empty list");
  const double rt = kGasConstantKcal * temperature_k;
  const double best = *std::min_element(dgs.begin(), dgs.end());
  double acc = 0.0;
  for (double dg : dgs) acc += std::exp(-(dg - best) / rt);
  return best - rt * std::log(acc);
}

// ---------------------------------------------------------------------------
// Oracle cache.
// ---------------------------------------------------------------------------

namespace {

std::string cache_map_key(const std::string& key, const std::string& name) {
  return name + '\x1f' + key;
}

void write_record(std::ostream& os, const std::string& key,
                  const std::string& name, double score) {
  auto write_str = [&](const std::string& s) {
    std::uint32_t len = static_cast<std::uint32_t>(s.size());
    unsigned char b[4] = {static_cast<unsigned char>(len & 0xff),
                          static_cast<unsigned char>((len >> 8) & 0xff),
                          static_cast<unsigned char>((len >> 16) & 0xff),
                          static_cast<unsigned char>((len >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  };
  write_str(key);
  write_str(name);
  std::uint64_t bits;
  std::memcpy(&bits, &score, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (bits >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace

OracleCache::OracleCache(std::string path) : path_(std::move(path)) {
  std::ifstream is(path_, std::ios::binary);
  if (!is) return;  // fresh cache
  auto read_str = [&](std::string& s) -> bool {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) return false;
    std::uint32_t len = static_cast<std::uint32_t>(b[0]) |
                        (static_cast<std::uint32_t>(b[1]) << 8) |
                        (static_cast<std::uint32_t>(b[2]) << 16) |
                        (static_cast<std::uint32_t>(b[3]) << 24);
    if (len > (1u << 20)) return false;
    s.resize(len);
    is.read(s.data(), len);
    return static_cast<bool>(is);
  };
  while (true) {
    std::string key, name;
    if (!read_str(key) || !read_str(name)) break;
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) break;
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double score;
    std::memcpy(&score, &bits, 8);
    map_[cache_map_key(key, name)] = score;
  }
}

std::optional<double> OracleCache::lookup(const std::string& key,
                                          const std::string& oracle_name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = map_.find(cache_map_key(key, oracle_name));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void OracleCache::store(const std::string& key, const std::string& oracle_name,
                        double score) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto mk = cache_map_key(key, oracle_name);
  if (map_.count(mk)) return;
  map_[mk] = score;
  std::ofstream os(path_, std::ios::binary | std::ios::app);
  if (os) write_record(os, key, oracle_name, score);
}

std::size_t OracleCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return map_.size();
}

CachedOracle::CachedOracle(std::shared_ptr<PropertyOracle> inner,
                           std::shared_ptr<OracleCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<ScoreResult> CachedOracle::score_batch(
    const std::vector<MolGraph>& mols) {
  std::vector<ScoreResult> out(mols.size());
  std::vector<std::string> keys(mols.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    keys[i] = canonical_key(mols[i]);
    if (auto hit = cache_->lookup(keys[i], inner_->name())) {
      out[i].value = *hit;
    } else {
      misses.push_back(i);
    }
  }
  if (misses.empty()) return out;
  std::vector<MolGraph> pending;
  pending.reserve(misses.size());
  for (std::size_t i : misses) pending.push_back(mols[i]);
  auto fresh = inner_->score_batch(pending);
  for (std::size_t k = 0; k < misses.size(); ++k) {
    out[misses[k]] = fresh[k];
    if (fresh[k].ok())
      cache_->store(keys[misses[k]], inner_->name(), *fresh[k].value);
  }
  return out;
}

}  // namespace limo
