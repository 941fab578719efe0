#include "cogbeam/scenario.h"

#include <cmath>
#include <sstream>

#include "cogbeam/error.h"
#include "cogbeam/rng.h"

namespace cogbeam {

namespace {

template <typename T>
T Broadcast(const std::vector<T>& v, int i) {
  return v.size() == 1 ? v[0] : v.at(static_cast<std::size_t>(i));
}

[[noreturn]] void Invalid(const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); }

template <typename T>
void CheckLength(const std::vector<T>& v, int expected, const char* name) {
  if (v.empty() || (v.size() != 1 && static_cast<int>(v.size()) != expected)) {
    std::ostringstream msg;
    msg << name << " must have 1 or " << expected << " entries, got " << v.size();
    Invalid(msg.str());
  }
}

// Uniform point in the complex Frobenius ball of the given radius.
ComplexMatrix UniformInBall(Rng& rng, Index rows, Index cols, double radius) {
  if (radius <= 0.0) return ComplexMatrix::Zero(rows, cols);
  ComplexMatrix dir = RandomComplexGaussian(rng, rows, cols, 1.0);
  double norm = dir.norm();
  while (norm == 0.0) {
    dir = RandomComplexGaussian(rng, rows, cols, 1.0);
    norm = dir.norm();
  }
  const double real_dim = 2.0 * static_cast<double>(rows * cols);
  const double r = radius * std::pow(rng.Uniform(), 1.0 / real_dim);
  return dir * (r / norm);
}

}  // namespace

int NetworkConfig::M(int k) const { return Broadcast(tx_antennas, k); }
int NetworkConfig::N(int k) const { return Broadcast(rx_antennas, k); }
int NetworkConfig::L(int pu) const { return Broadcast(pu_antennas, pu); }
double NetworkConfig::DirectDistance(int k) const { return Broadcast(direct_distance_m, k); }

double NetworkConfig::PMax(int k) const {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return snr * noise_w * std::pow(DirectDistance(k), path_loss_exponent);
}

void Validate(const NetworkConfig& cfg) {
  if (cfg.num_links < 1) Invalid("K >= 1 violated");
  if (cfg.num_pu < 0) Invalid("num_pu >= 0 violated");
  CheckLength(cfg.tx_antennas, cfg.num_links, "tx_antennas");
  CheckLength(cfg.rx_antennas, cfg.num_links, "rx_antennas");
  CheckLength(cfg.direct_distance_m, cfg.num_links, "direct_distance_m");
  if (cfg.num_pu > 0) CheckLength(cfg.pu_antennas, cfg.num_pu, "pu_antennas");
  for (int k = 0; k < cfg.num_links; ++k) {
    if (cfg.M(k) < 1 || cfg.N(k) < 1) Invalid("antenna counts >= 1 violated");
    if (!(cfg.DirectDistance(k) > 0.0)) Invalid("direct distance > 0 violated");
  }
  for (int p = 0; p < cfg.num_pu; ++p) {
    if (cfg.L(p) < 1) Invalid("PU antenna count >= 1 violated");
  }
  if (!(cfg.path_loss_exponent > 0.0)) Invalid("eta > 0 violated");
  if (!(cfg.cross_distance_m.min > 0.0) || cfg.cross_distance_m.min > cfg.cross_distance_m.max) {
    Invalid("cross distance range must satisfy 0 < min <= max");
  }
  if (!(cfg.pu_distance_m.min > 0.0) || cfg.pu_distance_m.min > cfg.pu_distance_m.max) {
    Invalid("PU distance range must satisfy 0 < min <= max");
  }
  if (!(cfg.noise_w > 0.0)) Invalid("noise power > 0 violated");
  if (!(cfg.iota_max_w > 0.0)) Invalid("iota_max > 0 violated");
  if (!(cfg.rho >= 0.0)) Invalid("rho >= 0 violated");
  if (!std::isfinite(cfg.snr_db)) Invalid("snr_db must be finite");
}

void ChannelSet::CheckShapes() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kShapeMismatch, what); };
  if (static_cast<int>(H.size()) != num_links) fail("H outer size");
  for (int k = 0; k < num_links; ++k) {
    if (static_cast<int>(H[k].size()) != num_links) fail("H inner size");
    for (int j = 0; j < num_links; ++j) {
      if (H[k][j].rows() != H[k][k].rows() || H[k][j].cols() != H[j][j].cols()) {
        fail("H[k][j] must be N_k x M_j");
      }
    }
  }
  if (static_cast<int>(sigma2.size()) != num_links || static_cast<int>(p_max.size()) != num_links) {
    fail("sigma2/p_max size");
  }
  if (static_cast<int>(G_hat.size()) != num_pu || static_cast<int>(eps.size()) != num_pu) {
    fail("G_hat/eps size");
  }
  for (int p = 0; p < num_pu; ++p) {
    if (static_cast<int>(G_hat[p].size()) != num_links) fail("G_hat inner size");
    if (static_cast<int>(eps[p].size()) != num_links) fail("eps inner size");
    for (int k = 0; k < num_links; ++k) {
      if (G_hat[p][k].cols() != M(k) || G_hat[p][k].rows() != G_hat[p][0].rows()) {
        fail("G_hat[p][k] must be L_p x M_k");
      }
      if (G_true) {
        const auto& gt = (*G_true)[p][k];
        if (gt.rows() != G_hat[p][k].rows() || gt.cols() != G_hat[p][k].cols()) fail("G_true shape");
      }
    }
  }
}

double UncertaintyRadius(const ComplexMatrix& g_hat, double rho) {
  if (rho < 0.0) throw Error(ErrorCode::kRangeError, "rho must be nonnegative");
  return std::sqrt(rho) * g_hat.norm();
}

ChannelSet Generate(const NetworkConfig& cfg, std::uint64_t run) {
  Validate(cfg);
  const int K = cfg.num_links;
  const double eta = cfg.path_loss_exponent;
  ChannelSet ch;
  ch.num_links = K;
  ch.num_pu = cfg.num_pu;
  ch.H.assign(K, std::vector<ComplexMatrix>(K));
  ch.cr_distance_m.assign(K, std::vector<double>(K, 0.0));
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      double d = cfg.DirectDistance(k);
      if (j != k) {
        Rng geo = MakeStream(cfg.seed, run, StreamTag::kCrossDistance, k, j);
        d = geo.Uniform(cfg.cross_distance_m.min, cfg.cross_distance_m.max);
      }
      ch.cr_distance_m[k][j] = d;
      Rng fading = MakeStream(cfg.seed, run, StreamTag::kCrChannel, k, j);
      ch.H[k][j] = RandomComplexGaussian(fading, cfg.N(k), cfg.M(j), std::pow(d, -eta));
    }
  }
  ch.G_hat.assign(cfg.num_pu, std::vector<ComplexMatrix>(K));
  ch.eps.assign(cfg.num_pu, std::vector<double>(K, 0.0));
  ch.pu_distance_m.assign(cfg.num_pu, std::vector<double>(K, 0.0));
  std::vector<std::vector<ComplexMatrix>> g_true(cfg.num_pu, std::vector<ComplexMatrix>(K));
  for (int p = 0; p < cfg.num_pu; ++p) {
    for (int k = 0; k < K; ++k) {
      Rng geo = MakeStream(cfg.seed, run, StreamTag::kPuDistance, p, k);
      const double d = geo.Uniform(cfg.pu_distance_m.min, cfg.pu_distance_m.max);
      ch.pu_distance_m[p][k] = d;
      Rng fading = MakeStream(cfg.seed, run, StreamTag::kPuChannel, p, k);
      ch.G_hat[p][k] = RandomComplexGaussian(fading, cfg.L(p), cfg.M(k), std::pow(d, -eta));
      ch.eps[p][k] = UncertaintyRadius(ch.G_hat[p][k], cfg.rho);
      Rng err = MakeStream(cfg.seed, run, StreamTag::kUncertainty, p, k);
      g_true[p][k] = ch.G_hat[p][k] + UniformInBall(err, cfg.L(p), cfg.M(k), ch.eps[p][k]);
    }
  }
  ch.G_true = std::move(g_true);
  ch.sigma2.assign(K, cfg.noise_w);
  ch.p_max.resize(K);
  for (int k = 0; k < K; ++k) ch.p_max[k] = cfg.PMax(k);
  return ch;
}

NetworkConfig ScenarioPreset(std::string_view name, const NetworkConfig& base) {
  NetworkConfig cfg = base;
  if (name == "c1") {
    cfg.pu_distance_m = {70.0, 100.0};
  } else if (name == "c2") {
    cfg.pu_distance_m = {30.0, 100.0};
  } else {
    throw Error(ErrorCode::kUnknownPreset, "unknown scenario preset '" + std::string(name) + "'");
  }
  return cfg;
}

std::vector<std::vector<double>> EqualSplitBudgets(int num_pu, int num_links, double iota_max) {
  return std::vector<std::vector<double>>(num_pu,
                                          std::vector<double>(num_links, iota_max / num_links));
}

std::vector<std::vector<double>> EqualSplitBudgets(const NetworkConfig& cfg) {
  return EqualSplitBudgets(cfg.num_pu, cfg.num_links, cfg.iota_max_w);
}

std::string BudgetModeName(BudgetMode mode) {
  return mode == BudgetMode::kAggregate ? "aggregate" : "prepartitioned_equal";
}

}  // namespace cogbeam
