#include "cogbeam/harness.h"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "cogbeam/error.h"
#include "cogbeam/mse.h"

namespace cogbeam {
namespace {

constexpr double kLimitSlack = 1e-6;

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    out.push_back(Trim(std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineContext {
 public:
  explicit LineContext(int line) : line_(line) {}

  [[noreturn]] void Fail(ErrorCode code, const std::string& msg) const {
    throw Error(code, "line " + std::to_string(line_) + ": " + msg);
  }

  double Double(const std::string& key, const std::string& text) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      Fail(ErrorCode::kParseError, key + ": expected a number, got '" + text + "'");
    }
    if (!std::isfinite(v)) Fail(ErrorCode::kRangeError, key + " must be finite");
    return v;
  }

  long long Integer(const std::string& key, const std::string& text) const {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      Fail(ErrorCode::kParseError, key + ": expected an integer, got '" + text + "'");
    }
    return v;
  }

  int PositiveInt(const std::string& key, const std::string& text) const {
    long long v = Integer(key, text);
    if (v < 1 || v > 1000000000) Fail(ErrorCode::kRangeError, key + " must be >= 1");
    return static_cast<int>(v);
  }

  double Positive(const std::string& key, const std::string& text) const {
    double v = Double(key, text);
    if (!(v > 0.0)) Fail(ErrorCode::kRangeError, key + " must be > 0");
    return v;
  }

  double NonNegative(const std::string& key, const std::string& text) const {
    double v = Double(key, text);
    if (v < 0.0) Fail(ErrorCode::kRangeError, key + " must be >= 0");
    return v;
  }

  bool Bool(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    Fail(ErrorCode::kParseError, key + ": expected true or false, got '" + text + "'");
  }

  std::vector<int> IntList(const std::string& key, const std::string& text) const {
    std::vector<int> out;
    for (const auto& item : SplitList(text)) out.push_back(PositiveInt(key, item));
    return out;
  }

  std::vector<double> PositiveList(const std::string& key, const std::string& text) const {
    std::vector<double> out;
    for (const auto& item : SplitList(text)) out.push_back(Positive(key, item));
    return out;
  }

 private:
  int line_;
};

struct Entry {
  int line = 0;
  std::string section;
  std::string key;
  std::string value;
};

using Setter = std::function<void(ExperimentConfig&, const LineContext&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // [experiment]
    t["experiment.scenario"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      if (v != "c1" && v != "c2") l.Fail(ErrorCode::kRangeError, "scenario must be c1 or c2");
      c.scenario = v;
    };
    t["experiment.algo"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      try {
        c.algo = ParseAlgo(v);
      } catch (const Error&) {
        l.Fail(ErrorCode::kRangeError, "algo must be bca, bca_proximal, primal_decomp or nonrobust");
      }
    };
    t["experiment.runs"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.runs = l.PositiveInt("runs", v);
    };
    t["experiment.seed"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      long long s = l.Integer("seed", v);
      if (s < 0) l.Fail(ErrorCode::kRangeError, "seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    };
    t["experiment.threads"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.threads = l.PositiveInt("threads", v);
    };
    t["experiment.out_dir"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      if (v.empty()) l.Fail(ErrorCode::kRangeError, "out_dir must not be empty");
      c.out_dir = v;
    };
    // [network]
    t["network.links"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.num_links = l.PositiveInt("links", v);
    };
    t["network.tx_antennas"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.tx_antennas = l.IntList("tx_antennas", v);
    };
    t["network.rx_antennas"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.rx_antennas = l.IntList("rx_antennas", v);
    };
    t["network.pus"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.num_pu = l.PositiveInt("pus", v);
    };
    t["network.pu_antennas"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.pu_antennas = l.IntList("pu_antennas", v);
    };
    t["network.path_loss_exponent"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.path_loss_exponent = l.Positive("path_loss_exponent", v);
    };
    t["network.direct_distance_m"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.direct_distance_m = l.PositiveList("direct_distance_m", v);
    };
    t["network.cross_distance_min_m"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.cross_distance_m.min = l.Positive("cross_distance_min_m", v);
    };
    t["network.cross_distance_max_m"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.cross_distance_m.max = l.Positive("cross_distance_max_m", v);
    };
    t["network.pu_distance_min_m"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.pu_distance_min_m = l.Positive("pu_distance_min_m", v);
    };
    t["network.pu_distance_max_m"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.pu_distance_max_m = l.Positive("pu_distance_max_m", v);
    };
    t["network.snr_db"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.snr_db = l.Double("snr_db", v);
    };
    t["network.noise_w"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.noise_w = l.Positive("noise_w", v);
    };
    t["network.iota_max_w"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.iota_max_w = l.NonNegative("iota_max_w", v);
    };
    t["network.rho"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.network.rho = l.NonNegative("rho", v);
    };
    // [bca]
    t["bca.tau"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.bca.tau = l.PositiveList("tau", v);
    };
    t["bca.upsilon"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.bca.upsilon = l.Positive("upsilon", v);
    };
    t["bca.max_cycles"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.bca.max_cycles = l.PositiveInt("max_cycles", v);
    };
    t["bca.neighbor_threshold"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.bca.neighbor_threshold = l.NonNegative("neighbor_threshold", v);
    };
    t["bca.stop_rule"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      if (v == "sum_utility") {
        c.bca.stop_rule = StopRule::kSumUtility;
      } else if (v == "per_link") {
        c.bca.stop_rule = StopRule::kPerLink;
      } else if (v == "default") {
        c.bca.stop_rule.reset();
      } else {
        l.Fail(ErrorCode::kRangeError, "stop_rule must be sum_utility, per_link or default");
      }
    };
    // [allocator]
    t["allocator.s0"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.allocator.s0 = l.NonNegative("s0", v);
    };
    t["allocator.max_masters"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.allocator.max_masters = l.PositiveInt("max_masters", v);
    };
    t["allocator.max_stall"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.allocator.max_stall = l.PositiveInt("max_stall", v);
    };
    t["allocator.max_backtracks"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      long long b = l.Integer("max_backtracks", v);
      if (b < 0 || b > 200) l.Fail(ErrorCode::kRangeError, "max_backtracks must be in [0, 200]");
      c.allocator.max_backtracks = static_cast<int>(b);
    };
    t["allocator.upsilon"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.allocator.upsilon = l.Positive("upsilon", v);
    };
    t["allocator.inner_to_convergence"] = [](ExperimentConfig& c, const LineContext& l,
                                             const std::string& v) {
      c.allocator.inner_to_convergence = l.Bool("inner_to_convergence", v);
    };
    t["allocator.max_inner_cycles"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      c.allocator.max_inner_cycles = l.PositiveInt("max_inner_cycles", v);
    };
    // [sweep]
    t["sweep.parameter"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      if (v != "iota_max" && v != "rho" && v != "snr_db") {
        l.Fail(ErrorCode::kRangeError, "sweep parameter must be iota_max, rho or snr_db");
      }
      if (!c.sweep) c.sweep.emplace();
      c.sweep->parameter = v;
    };
    t["sweep.values"] = [](ExperimentConfig& c, const LineContext& l, const std::string& v) {
      if (!c.sweep) c.sweep.emplace();
      c.sweep->values.clear();
      for (const auto& item : SplitList(v)) c.sweep->values.push_back(l.Double("values", item));
    };
    return t;
  }();
  return table;
}

std::vector<Entry> Tokenize(std::string_view text) {
  static const std::vector<std::string> kSections{"experiment", "network", "bca", "allocator", "sweep"};
  std::vector<Entry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    LineContext ctx(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') ctx.Fail(ErrorCode::kParseError, "unterminated section header");
      section = Trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        ctx.Fail(ErrorCode::kUnknownKey, "unknown section [" + section + "]");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) ctx.Fail(ErrorCode::kParseError, "expected key = value");
    Entry e{line_no, section, Trim(std::string_view(line).substr(0, eq)),
            Trim(std::string_view(line).substr(eq + 1))};
    if (e.key.empty()) ctx.Fail(ErrorCode::kParseError, "missing key");
    if (e.section.empty()) ctx.Fail(ErrorCode::kParseError, "key '" + e.key + "' outside a section");
    if (!Setters().count(e.section + "." + e.key)) {
      ctx.Fail(ErrorCode::kUnknownKey, "unknown key '" + e.key + "' in [" + e.section + "]");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string_view AlgoName(Algo algo) {
  switch (algo) {
    case Algo::kBca: return "bca";
    case Algo::kBcaProximal: return "bca_proximal";
    case Algo::kPrimalDecomp: return "primal_decomp";
    case Algo::kNonrobust: return "nonrobust";
  }
  return "unknown";
}

Algo ParseAlgo(std::string_view name) {
  for (Algo a : {Algo::kBca, Algo::kBcaProximal, Algo::kPrimalDecomp, Algo::kNonrobust}) {
    if (AlgoName(a) == name) return a;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown algo '" + std::string(name) + "'");
}

void ExperimentConfig::Finalize() {
  if (runs < 1) throw Error(ErrorCode::kRangeError, "runs must be >= 1");
  if (threads < 1) throw Error(ErrorCode::kRangeError, "threads must be >= 1");
  network = ScenarioPreset(scenario, network);
  if (pu_distance_min_m) network.pu_distance_m.min = *pu_distance_min_m;
  if (pu_distance_max_m) network.pu_distance_m.max = *pu_distance_max_m;
  network.seed = seed;
  network.budget_mode =
      algo == Algo::kPrimalDecomp ? BudgetMode::kAggregate : BudgetMode::kPrepartitionedEqual;
  allocator.neighbor_threshold = bca.neighbor_threshold;
  allocator.sdp = bca.sdp;
  Validate(network);
  Validate(bca, network.num_links);
  if (sweep) {
    if (sweep->parameter != "iota_max" && sweep->parameter != "rho" && sweep->parameter != "snr_db") {
      throw Error(ErrorCode::kRangeError, "sweep parameter must be iota_max, rho or snr_db");
    }
    if (sweep->values.empty()) throw Error(ErrorCode::kRangeError, "sweep needs at least one value");
  }
}

ExperimentConfig ParseConfig(std::string_view text) {
  std::vector<Entry> entries = Tokenize(text);
  ExperimentConfig cfg;
  for (const auto& e : entries) {
    Setters().at(e.section + "." + e.key)(cfg, LineContext(e.line), e.value);
  }
  try {
    cfg.Finalize();
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kInvalidConfig) throw Error(ErrorCode::kRangeError, err.what());
    throw;
  }
  return cfg;
}

std::string ReferenceConfig() {
  return R"(# Reference experiment: four links, two antennas everywhere, one PU.
[experiment]
scenario = c1            # c1: PU 70-100 m, c2: PU 30-100 m
algo = bca               # bca | bca_proximal | primal_decomp | nonrobust
runs = 200
seed = 1
threads = 1
out_dir = out

[network]
links = 4
tx_antennas = 2
rx_antennas = 2
pus = 1
pu_antennas = 2
path_loss_exponent = 3.5
direct_distance_m = 30
cross_distance_min_m = 30
cross_distance_max_m = 100
snr_db = 15
noise_w = 1e-7
iota_max_w = 4e-7
rho = 0.05

[bca]
tau = 0.1
upsilon = 1e-5
max_cycles = 100
neighbor_threshold = 0
stop_rule = default

[allocator]
s0 = 0                   # 0: iota_max^2
max_masters = 100
max_stall = 5
max_backtracks = 40
upsilon = 1e-5
inner_to_convergence = false
max_inner_cycles = 100
)";
}

ExperimentConfig WithParameter(const ExperimentConfig& cfg, const std::string& parameter, double value) {
  ExperimentConfig out = cfg;
  out.sweep.reset();
  if (parameter == "iota_max") {
    out.network.iota_max_w = value;
  } else if (parameter == "rho") {
    out.network.rho = value;
  } else if (parameter == "snr_db") {
    out.network.snr_db = value;
  } else {
    throw Error(ErrorCode::kRangeError, "unknown sweep parameter '" + parameter + "'");
  }
  out.Finalize();
  return out;
}

RunOutcome RunOne(const ExperimentConfig& cfg, int run) {
  RunOutcome out;
  out.run = run;
  const NetworkConfig& net = cfg.network;
  ChannelSet ch = Generate(net, static_cast<std::uint64_t>(run));
  Budgets limits;
  IterationTrace trace;
  CovarianceProfile profile;
  bool robust = true;
  if (cfg.algo == Algo::kPrimalDecomp) {
    AllocationResult res = RunPrimalDecomposition(ch, net.iota_max_w, cfg.allocator);
    limits = res.state.iota;
    trace = std::move(res.trace);
    profile = std::move(res.profile);
    out.converged = res.converged;
    out.cycles = static_cast<int>(res.masters.size());
    for (const auto& m : res.masters) {
      for (double w : m.aggregate_worst_case) {
        out.max_aggregate_worst_case = std::max(out.max_aggregate_worst_case, w);
      }
    }
    out.masters = std::move(res.masters);
  } else {
    BcaOptions opts = cfg.bca;
    opts.mode = cfg.algo == Algo::kBcaProximal ? BcaMode::kProximal : BcaMode::kPlain;
    robust = cfg.algo != Algo::kNonrobust;
    opts.robust = robust;
    limits = EqualSplitBudgets(net);
    BcaResult res = RunCentralized(ch, limits, opts);
    trace = std::move(res.trace);
    profile = std::move(res.profile);
    out.converged = trace.converged;
    out.cycles = trace.completed_cycles();
  }

  for (const auto& c : trace.cycles) out.trace.emplace_back(c.sum_mse, c.sum_utility);
  for (std::size_t n = 1; n < trace.cycles.size(); ++n) {
    double drop = trace.cycles[n - 1].sum_utility - trace.cycles[n].sum_utility;
    out.max_utility_drop = std::max(out.max_utility_drop, drop);
  }
  out.final_sum_mse = trace.cycles.back().sum_mse;

  out.feasible = true;
  for (int p = 0; p < ch.num_pu; ++p) {
    double realized_sum = 0.0;
    for (int k = 0; k < ch.num_links; ++k) {
      InterferenceRow row;
      row.pu = p;
      row.link = k;
      row.nominal_w = Interference(ch, profile.Q[k], p, k, false);
      row.worst_case_w = LinkInterference(ch, profile.Q[k], p, k, true);
      row.realized_w = Interference(ch, profile.Q[k], p, k, true);
      row.limit_w = limits[p][k];
      const double cap = row.limit_w * (1.0 + kLimitSlack);
      if (row.realized_w > cap) out.link_violation = true;
      if (row.worst_case_w > cap || row.realized_w > cap) out.feasible = false;
      realized_sum += row.realized_w;
      out.interference.push_back(row);
    }
    if (realized_sum > net.iota_max_w * (1.0 + kLimitSlack)) out.aggregate_violation = true;
  }
  out.ok = true;
  return out;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.runs.resize(static_cast<std::size_t>(cfg.runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.runs; r = next++) {
      RunOutcome& slot = result.runs[static_cast<std::size_t>(r)];
      try {
        slot = RunOne(cfg, r);
      } catch (const std::exception& e) {
        slot = RunOutcome{};
        slot.run = r;
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };
  const int n_threads = std::min(cfg.threads, cfg.runs);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& r : result.runs) {
    if (!r.ok) {
      result.complete = false;
      continue;
    }
    const std::uint64_t seed = cfg.seed;
    result.metrics.push_back({r.run, seed, "final_sum_mse", r.final_sum_mse});
    result.metrics.push_back({r.run, seed, "cycles", static_cast<double>(r.cycles)});
    result.metrics.push_back({r.run, seed, "converged", r.converged ? 1.0 : 0.0});
    result.metrics.push_back({r.run, seed, "feasible", r.feasible ? 1.0 : 0.0});
    result.metrics.push_back({r.run, seed, "aggregate_violation", r.aggregate_violation ? 1.0 : 0.0});
    result.metrics.push_back({r.run, seed, "link_violation", r.link_violation ? 1.0 : 0.0});
    result.metrics.push_back({r.run, seed, "max_utility_drop", r.max_utility_drop});
  }
  return result;
}

void WriteExperiment(const ExperimentResult& res, const ExperimentConfig& cfg,
                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  std::string cdf = "run,pu,link,nominal_w,worst_case_w,realized_w,limit_w\n";
  std::string trace = "run,cycle,sum_mse,sum_utility\n";
  std::string summary = "run,algo,final_sum_mse,cycles,feasible\n";
  std::string budgets = "run,master_iter,link,iota_w,lambda\n";
  std::string metrics = "run,seed,metric,value\n";
  const std::string algo(AlgoName(cfg.algo));
  std::vector<int> failed;
  for (const auto& r : res.runs) {
    if (!r.ok) {
      failed.push_back(r.run);
      continue;
    }
    const std::string run = std::to_string(r.run);
    for (const auto& row : r.interference) {
      cdf += run + "," + std::to_string(row.pu) + "," + std::to_string(row.link) + "," + Fmt(row.nominal_w) +
             "," + Fmt(row.worst_case_w) + "," + Fmt(row.realized_w) + "," + Fmt(row.limit_w) + "\n";
    }
    for (std::size_t n = 0; n < r.trace.size(); ++n) {
      trace += run + "," + std::to_string(n) + "," + Fmt(r.trace[n].first) + "," + Fmt(r.trace[n].second) + "\n";
    }
    summary += run + "," + algo + "," + Fmt(r.final_sum_mse) + "," + std::to_string(r.cycles) + "," +
               (r.feasible ? "1" : "0") + "\n";
    for (const auto& m : r.masters) {
      for (std::size_t p = 0; p < m.iota.size(); ++p) {
        for (std::size_t k = 0; k < m.iota[p].size(); ++k) {
          budgets += run + "," + std::to_string(m.ell) + "," + std::to_string(k) + "," + Fmt(m.iota[p][k]) +
                     "," + Fmt(m.lambda[p][k]) + "\n";
        }
      }
    }
  }
  for (const auto& m : res.metrics) {
    metrics += std::to_string(m.run) + "," + std::to_string(m.seed) + "," + m.metric + "," + Fmt(m.value) + "\n";
  }

  const std::vector<std::pair<std::string, std::string>> files{
      {"interference_cdf.csv", cdf}, {"mse_trace.csv", trace}, {"summary.csv", summary},
      {"budgets.csv", budgets},      {"metrics.csv", metrics}};
  std::vector<std::string> names;
  for (const auto& [name, body] : files) {
    WriteFile(dir / name, body);
    names.push_back(name);
  }

  std::vector<std::string> notes;
  notes.push_back(std::string("status: ") + (res.complete ? "complete" : "incomplete"));
  if (!failed.empty()) {
    std::string list;
    for (int f : failed) list += (list.empty() ? "" : " ") + std::to_string(f);
    notes.push_back("failed_runs: " + list);
    for (const auto& r : res.runs) {
      if (!r.ok) notes.push_back("run " + std::to_string(r.run) + " error: " + r.error);
    }
  }
  notes.push_back("algo: " + algo);
  notes.push_back("scenario: " + cfg.scenario);
  notes.push_back("runs: " + std::to_string(cfg.runs));
  notes.push_back("seed: " + std::to_string(cfg.seed));
  notes.push_back("budget_mode: " + BudgetModeName(cfg.network.budget_mode));
  if (cfg.algo == Algo::kPrimalDecomp) {
    const double s0 = cfg.allocator.s0 > 0.0 ? cfg.allocator.s0 : 0.1 * cfg.network.iota_max_w * cfg.network.iota_max_w;
    notes.push_back("step_s0: " + Fmt(s0));
    notes.push_back("max_masters: " + std::to_string(cfg.allocator.max_masters));
    notes.push_back("max_backtracks: " + std::to_string(cfg.allocator.max_backtracks));
    notes.push_back("inner_to_convergence: " + std::string(cfg.allocator.inner_to_convergence ? "true" : "false"));
  }
  if (cfg.network.num_pu > 1) notes.push_back("budgets.csv rows are PU-major within each master iteration");
  WriteManifest(dir, names, notes);
}

std::vector<SweepPoint> RunSweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw Error(ErrorCode::kInvalidConfig, "sweep requested without a [sweep] section");
  std::vector<SweepPoint> points;
  for (double value : cfg.sweep->values) {
    ExperimentConfig point_cfg = WithParameter(cfg, cfg.sweep->parameter, value);
    ExperimentResult res = RunExperiment(point_cfg);
    if (!res.complete) {
      for (const auto& r : res.runs) {
        if (!r.ok) throw Error(ErrorCode::kSolverFailure, cfg.sweep->parameter + "=" + Fmt(value) +
                                                              " run " + std::to_string(r.run) + ": " + r.error);
      }
    }
    std::vector<double> mse;
    for (const auto& r : res.runs) mse.push_back(r.final_sum_mse);
    SweepPoint pt;
    pt.parameter = cfg.sweep->parameter;
    pt.value = value;
    pt.runs = static_cast<int>(mse.size());
    pt.mean_sum_mse = Mean(mse);
    if (mse.size() > 1) {
      double ss = 0.0;
      for (double x : mse) ss += (x - pt.mean_sum_mse) * (x - pt.mean_sum_mse);
      pt.std_err = std::sqrt(ss / static_cast<double>(mse.size() - 1) / static_cast<double>(mse.size()));
    }
    points.push_back(pt);
  }
  return points;
}

std::string SweepCsv(const std::vector<SweepPoint>& points) {
  std::string out = "parameter,value,runs,mean_sum_mse,std_err\n";
  for (const auto& p : points) {
    out += p.parameter + "," + Fmt(p.value) + "," + std::to_string(p.runs) + "," + Fmt(p.mean_sum_mse) + "," +
           Fmt(p.std_err) + "\n";
  }
  return out;
}

std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "empirical CDF of an empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<std::pair<double, double>> out(values.size());
  std::size_t i = values.size();
  while (i > 0) {
    // Ties share the CDF value at their last occurrence.
    std::size_t j = i;
    while (j > 0 && values[j - 1] == values[i - 1]) --j;
    for (std::size_t t = j; t < i; ++t) out[t] = {values[t], static_cast<double>(i) / n};
    i = j;
  }
  return out;
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 digest failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

void WriteManifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                   const std::vector<std::string>& notes) {
  std::string body;
  for (const auto& n : notes) body += "# " + n + "\n";
  for (const auto& f : files) body += Sha256Hex(ReadFile(dir / f)) + "  " + f + "\n";
  WriteFile(dir / "MANIFEST", body);
}

std::vector<std::string> VerifyManifest(const std::filesystem::path& dir) {
  std::istringstream in(ReadFile(dir / "MANIFEST"));
  std::vector<std::string> bad;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t sep = line.find("  ");
    if (sep == std::string::npos) throw Error(ErrorCode::kParseError, "malformed MANIFEST line: " + line);
    const std::string hash = line.substr(0, sep);
    const std::string name = line.substr(sep + 2);
    std::error_code ec;
    if (!std::filesystem::exists(dir / name, ec) || Sha256Hex(ReadFile(dir / name)) != hash) {
      bad.push_back(name);
    }
  }
  return bad;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace cogbeam
