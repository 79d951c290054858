#include "chaoslab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

namespace {

constexpr std::size_t kMaxTableEntries = std::size_t{1} << 23;

std::size_t dense_slot(std::size_t n, std::size_t e, std::size_t f) {
  return e * n - e * (e - 1) / 2 + (f - e);
}

}  // namespace

std::string_view to_string(EngineKind kind) {
  return kind == EngineKind::exact ? "exact" : "mcmc";
}

// ---------------------------------------------------------------- MomentTable

MomentRequest MomentRequest::pairs(std::vector<std::pair<std::size_t, std::size_t>> wanted) {
  return MomentRequest(Mode::listed, std::move(wanted));
}

MomentTable::MomentTable(std::size_t index_count, const MomentRequest& request, EngineKind method)
    : method_(method), first_(index_count, 0.0) {
  if (request.wants_all()) {
    if (index_count > kMaxDensePairs)
      throw CapacityError("full second-moment table requested for |E| = " +
                          std::to_string(index_count) + " > " + std::to_string(kMaxDensePairs));
    dense_ = true;
    pairs_.reserve(index_count * (index_count + 1) / 2);
    for (std::uint32_t e = 0; e < index_count; ++e)
      for (std::uint32_t f = e; f < index_count; ++f) pairs_.emplace_back(e, f);
  } else if (!request.wants_none()) {
    for (auto [e, f] : request.listed()) {
      if (e >= index_count || f >= index_count)
        throw std::out_of_range("moment request: index out of range");
      if (e > f) std::swap(e, f);
      pairs_.emplace_back(static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(f));
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  }
  second_.assign(pairs_.size(), 0.0);
}

std::size_t MomentTable::slot(std::size_t e, std::size_t f) const {
  if (e > f) std::swap(e, f);
  if (f >= first_.size()) throw std::out_of_range("moment table: index out of range");
  if (dense_) return dense_slot(first_.size(), e, f);
  const std::pair<std::uint32_t, std::uint32_t> key(static_cast<std::uint32_t>(e),
                                                    static_cast<std::uint32_t>(f));
  const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key);
  if (it == pairs_.end() || *it != key)
    throw std::out_of_range("moment table: pair (" + std::to_string(e) + ", " +
                            std::to_string(f) + ") was not requested");
  return static_cast<std::size_t>(it - pairs_.begin());
}

bool MomentTable::has_second(std::size_t e, std::size_t f) const {
  if (e > f) std::swap(e, f);
  if (f >= first_.size()) return false;
  if (dense_) return true;
  return std::binary_search(pairs_.begin(), pairs_.end(),
                            std::pair<std::uint32_t, std::uint32_t>(e, f));
}

double MomentTable::second(std::size_t e, std::size_t f) const { return second_[slot(e, f)]; }

double MomentTable::first_stderr(std::size_t e) const {
  return first_stderr_.empty() ? 0.0 : first_stderr_.at(e);
}

double MomentTable::second_stderr(std::size_t e, std::size_t f) const {
  return second_stderr_.empty() ? 0.0 : second_stderr_[slot(e, f)];
}

// ------------------------------------------------------------ ExactEnumerator

ExactEnumerator::ExactEnumerator(const FactorSystem& system) : system_(system) {
  states_per_site_ = system_.space->state_count();
  configs_ = 1;
  for (std::size_t i = 0; i < system_.site_count; ++i) {
    configs_ *= states_per_site_;
    if (configs_ > kMaxExactConfigurations)
      throw CapacityError("exact enumeration: configuration space exceeds 2^24");
  }

  std::size_t width = system_.index_count();
  for (const auto& term : system_.residual) width += term.factors.size();
  tabulated_ = configs_ * std::max<std::size_t>(width, 1) <= kMaxTableEntries;
  if (!tabulated_) return;

  const std::size_t n_e = system_.index_count();
  chaos_table_.resize(configs_ * n_e);
  residual_tables_.resize(system_.residual.size());
  for (std::size_t k = 0; k < system_.residual.size(); ++k)
    residual_tables_[k].resize(configs_ * system_.residual[k].factors.size());
  base_log_weight_.resize(configs_);

  SpinConfiguration states(system_.site_count);
  for (std::size_t c = 0; c < configs_; ++c) {
    decode(c, states);
    double base = 0.0;
    for (std::uint32_t s : states) base += system_.space->log_weights[s];
    base_log_weight_[c] = base;
    for (std::size_t e = 0; e < n_e; ++e) chaos_table_[c * n_e + e] = system_.bond(e, states);
    for (std::size_t k = 0; k < system_.residual.size(); ++k) {
      const auto& fam = system_.residual[k].factors;
      for (std::size_t e = 0; e < fam.size(); ++e)
        residual_tables_[k][c * fam.size() + e] = fam.value(e, states);
    }
  }
}

void ExactEnumerator::decode(std::size_t c, std::span<std::uint32_t> states) const {
  for (std::size_t i = 0; i < system_.site_count; ++i) {
    states[i] = static_cast<std::uint32_t>(c % states_per_site_);
    c /= states_per_site_;
  }
}

void ExactEnumerator::chaos_values(std::size_t c, std::span<double> out) const {
  const std::size_t n_e = system_.index_count();
  if (tabulated_) {
    std::copy_n(chaos_table_.begin() + static_cast<std::ptrdiff_t>(c * n_e), n_e, out.begin());
    return;
  }
  SpinConfiguration states(system_.site_count);
  decode(c, states);
  for (std::size_t e = 0; e < n_e; ++e) out[e] = system_.bond(e, states);
}

std::vector<double> ExactEnumerator::log_weights(const Realization& r) const {
  const std::size_t n_e = system_.index_count();
  if (r.chaos.size() != n_e || r.residual.size() != system_.residual.size())
    throw std::invalid_argument("exact engine: realization does not match the system");

  std::vector<double> chaos_coeff(n_e);
  for (std::size_t e = 0; e < n_e; ++e) chaos_coeff[e] = system_.gamma * r.chaos[e];
  std::vector<std::vector<double>> res_coeff(system_.residual.size());
  for (std::size_t k = 0; k < system_.residual.size(); ++k) {
    const auto& term = system_.residual[k];
    if (r.residual[k].size() != term.factors.size())
      throw std::invalid_argument("exact engine: residual coupling count mismatch");
    res_coeff[k].resize(term.factors.size());
    for (std::size_t e = 0; e < term.factors.size(); ++e)
      res_coeff[k][e] = term.strength * r.residual[k][e];
  }

  std::vector<double> lw(configs_);
  if (tabulated_) {
    for (std::size_t c = 0; c < configs_; ++c) {
      double acc = base_log_weight_[c];
      const double* row = chaos_table_.data() + c * n_e;
      for (std::size_t e = 0; e < n_e; ++e) acc += chaos_coeff[e] * row[e];
      for (std::size_t k = 0; k < res_coeff.size(); ++k) {
        const std::size_t w = res_coeff[k].size();
        const double* rrow = residual_tables_[k].data() + c * w;
        for (std::size_t e = 0; e < w; ++e) acc += res_coeff[k][e] * rrow[e];
      }
      lw[c] = acc;
    }
  } else {
    SpinConfiguration states(system_.site_count);
    for (std::size_t c = 0; c < configs_; ++c) {
      decode(c, states);
      lw[c] = log_weight(system_, r, states);
    }
  }
  for (double v : lw)
    if (!std::isfinite(v)) throw NonFiniteError("exact engine: non-finite Gibbs log-weight");
  return lw;
}

std::vector<double> ExactEnumerator::distribution(const Realization& r) const {
  std::vector<double> p = log_weights(r);
  const double top = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

MomentTable ExactEnumerator::moments(const Realization& r, const MomentRequest& request) const {
  const std::size_t n_e = system_.index_count();
  MomentTable table(n_e, request, EngineKind::exact);
  const std::vector<double> lw = log_weights(r);
  const double top = *std::max_element(lw.begin(), lw.end());

  auto& first = table.mutable_first();
  auto& second = table.mutable_second();
  const auto& pairs = table.stored_pairs();
  std::vector<double> f(n_e);
  double z = 0.0;
  for (std::size_t c = 0; c < configs_; ++c) {
    const double w = std::exp(lw[c] - top);
    z += w;
    if (n_e == 0) continue;
    chaos_values(c, f);
    for (std::size_t e = 0; e < n_e; ++e) first[e] += w * f[e];
    if (table.is_dense()) {
      std::size_t idx = 0;
      for (std::size_t e = 0; e < n_e; ++e) {
        const double wf = w * f[e];
        for (std::size_t g = e; g < n_e; ++g) second[idx++] += wf * f[g];
      }
    } else {
      for (std::size_t q = 0; q < pairs.size(); ++q)
        second[q] += w * f[pairs[q].first] * f[pairs[q].second];
    }
  }
  for (double& v : first) v /= z;
  for (double& v : second) v /= z;
  table.set_log_partition(top + std::log(z));
  return table;
}

MomentTable exact_moments(const FactorSystem& system, const Realization& r,
                          const MomentRequest& request) {
  return ExactEnumerator(system).moments(r, request);
}

// -------------------------------------------------------------------- MCMC

void McmcConfig::validate() const {
  if (sweeps == 0) throw std::invalid_argument("mcmc: sweeps must be positive");
  if (sweeps <= burn_in) throw std::invalid_argument("mcmc: sweeps must exceed burn_in");
  if (thin == 0) throw std::invalid_argument("mcmc: thin must be positive");
  if (chains == 0) throw std::invalid_argument("mcmc: chains must be positive");
  if ((sweeps - burn_in + thin - 1) / thin < kBatchCount)
    throw std::invalid_argument("mcmc: fewer retained samples than batches (32)");
}

MetropolisChain::MetropolisChain(const FactorSystem& system, const Realization& r, Engine engine)
    : system_(&system), realization_(&r), engine_(std::move(engine)) {
  const std::size_t n = system.site_count;
  const std::size_t q = system.space->state_count();
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(q - 1));
  state_.resize(n);
  for (auto& s : state_) s = pick(engine_);

  std::vector<std::uint32_t> support;
  chaos_at_site_.resize(n);
  for (std::size_t e = 0; e < system.index_count(); ++e) {
    system.factors.support(e, support);
    for (std::uint32_t i : support) chaos_at_site_[i].push_back(static_cast<std::uint32_t>(e));
  }
  residual_at_site_.resize(system.residual.size());
  for (std::size_t k = 0; k < system.residual.size(); ++k) {
    residual_at_site_[k].resize(n);
    const auto& fam = system.residual[k].factors;
    for (std::size_t e = 0; e < fam.size(); ++e) {
      fam.support(e, support);
      for (std::uint32_t i : support) residual_at_site_[k][i].push_back(static_cast<std::uint32_t>(e));
    }
  }
  values_.resize(system.index_count());
  for (std::size_t e = 0; e < values_.size(); ++e) values_[e] = system.bond(e, state_);
}

void MetropolisChain::propose(std::uint32_t site) {
  const FactorSystem& sys = *system_;
  const std::size_t q = sys.space->state_count();
  if (q < 2) return;
  const std::uint32_t old_state = state_[site];
  std::uint32_t new_state;
  if (q == 2) {
    new_state = 1u - old_state;
  } else {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(q - 2));
    const std::uint32_t u = pick(engine_);
    new_state = u < old_state ? u : u + 1;
  }

  double delta = sys.space->log_weights[new_state] - sys.space->log_weights[old_state];
  double residual_old = 0.0;
  for (std::size_t k = 0; k < sys.residual.size(); ++k) {
    const auto& term = sys.residual[k];
    double acc = 0.0;
    for (std::uint32_t e : residual_at_site_[k][site])
      acc += realization_->residual[k][e] * term.factors.value(e, state_);
    residual_old += term.strength * acc;
  }

  state_[site] = new_state;
  const auto& touched = chaos_at_site_[site];
  scratch_.resize(touched.size());
  double chaos_delta = 0.0;
  for (std::size_t m = 0; m < touched.size(); ++m) {
    const std::uint32_t e = touched[m];
    scratch_[m] = sys.bond(e, state_);
    chaos_delta += realization_->chaos[e] * (scratch_[m] - values_[e]);
  }
  double residual_new = 0.0;
  for (std::size_t k = 0; k < sys.residual.size(); ++k) {
    const auto& term = sys.residual[k];
    double acc = 0.0;
    for (std::uint32_t e : residual_at_site_[k][site])
      acc += realization_->residual[k][e] * term.factors.value(e, state_);
    residual_new += term.strength * acc;
  }
  delta += sys.gamma * chaos_delta + (residual_new - residual_old);

  ++proposed_;
  bool accept = delta >= 0.0;
  if (!accept) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    accept = unit(engine_) < std::exp(delta);
  }
  if (accept) {
    ++accepted_;
    for (std::size_t m = 0; m < touched.size(); ++m) values_[touched[m]] = scratch_[m];
  } else {
    state_[site] = old_state;
  }
}

void MetropolisChain::sweep() {
  for (std::uint32_t i = 0; i < state_.size(); ++i) propose(i);
}

double MetropolisChain::acceptance_rate() const noexcept {
  return proposed_ == 0 ? 0.0 : double(accepted_) / double(proposed_);
}

MomentTable mcmc_moments(const FactorSystem& system, const Realization& r,
                         const MomentRequest& request, const McmcConfig& config,
                         const SeedSpec& seed) {
  config.validate();
  const std::size_t n_e = system.index_count();
  MomentTable table(n_e, request, EngineKind::mcmc);
  const auto& pairs = table.stored_pairs();
  const std::size_t width = n_e + pairs.size();

  const std::size_t retained = (config.sweeps - config.burn_in + config.thin - 1) / config.thin;
  const std::size_t batch_size = retained / kBatchCount;
  const std::size_t batches = kBatchCount * config.chains;
  std::vector<double> batch_means(batches * width, 0.0);

  for (std::size_t c = 0; c < config.chains; ++c) {
    MetropolisChain chain(system, r, make_engine(seed, domain::mcmc_chain + c));
    for (std::size_t s = 0; s < config.burn_in; ++s) chain.sweep();
    for (std::size_t b = 0; b < kBatchCount; ++b) {
      double* acc = batch_means.data() + (c * kBatchCount + b) * width;
      for (std::size_t s = 0; s < batch_size; ++s) {
        for (std::size_t j = 0; j < config.thin; ++j) chain.sweep();
        const auto& f = chain.factor_values();
        for (std::size_t e = 0; e < n_e; ++e) acc[e] += f[e];
        for (std::size_t q = 0; q < pairs.size(); ++q)
          acc[n_e + q] += f[pairs[q].first] * f[pairs[q].second];
      }
      for (std::size_t j = 0; j < width; ++j) acc[j] /= double(batch_size);
    }
  }

  std::vector<double> mean(width, 0.0);
  std::vector<double> err(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    RunningStats stats;
    for (std::size_t b = 0; b < batches; ++b) stats.push(batch_means[b * width + j]);
    mean[j] = stats.mean;
    err[j] = stats.stderr_of_mean();
    if (err[j] > config.stderr_cap)
      throw NonConvergenceError("mcmc: standard error " + std::to_string(err[j]) +
                                " exceeds cap " + std::to_string(config.stderr_cap));
  }

  std::copy_n(mean.begin(), n_e, table.mutable_first().begin());
  std::copy(mean.begin() + static_cast<std::ptrdiff_t>(n_e), mean.end(),
            table.mutable_second().begin());
  table.mutable_first_stderr().assign(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(n_e));
  table.mutable_second_stderr().assign(err.begin() + static_cast<std::ptrdiff_t>(n_e), err.end());
  return table;
}

MomentTable compute_moments(const FactorSystem& system, const Realization& r,
                            const MomentRequest& request, const EngineChoice& engine,
                            const SeedSpec& seed, const ExactEnumerator* enumerator) {
  if (engine.kind == EngineKind::mcmc) return mcmc_moments(system, r, request, engine.mcmc, seed);
  if (enumerator) return enumerator->moments(r, request);
  return exact_moments(system, r, request);
}

// ------------------------------------------------------- replica assembly

OverlapMoments overlap_moments(const MomentTable& first, const MomentTable& second) {
  const std::size_t n = first.index_count();
  if (second.index_count() != n)
    throw std::invalid_argument("overlap moments: tables cover different index sets");
  OverlapMoments out;
  if (n == 0) return out;

  double q = 0.0;
  for (std::size_t e = 0; e < n; ++e) q += first.first(e) * second.first(e);

  double q2 = 0.0;
  double q11q21 = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t f = e; f < n; ++f) {
      const double mult = e == f ? 1.0 : 2.0;
      const double s2 = second.second(e, f);
      q2 += mult * first.second(e, f) * s2;
      q11q21 += mult * first.first(e) * first.first(f) * s2;
    }
  }
  const double inv = 1.0 / double(n);
  out.q = q * inv;
  out.q2 = q2 * inv * inv;
  out.q11q21 = q11q21 * inv * inv;
  return out;
}

Estimate replica_variance(const CoupledPair& pair, const EngineChoice& engine,
                          const SeedSpec& mcmc_seed) {
  const std::size_t n = pair.first.index_count();
  if (n == 0) return {};
  const MomentTable m1 = compute_moments(pair.first, pair.realization_first(),
                                         MomentRequest::all(), engine, derive(mcmc_seed, 1));
  const MomentTable m2 = compute_moments(pair.second, pair.realization_second(),
                                         MomentRequest::all(), engine, derive(mcmc_seed, 2));
  const OverlapMoments om = overlap_moments(m1, m2);
  Estimate out{om.q2 - om.q * om.q, 0.0};
  if (!m1.has_stderr() && !m2.has_stderr()) return out;

  // First-order propagation, treating moment errors as independent.
  const double inv = 1.0 / double(n);
  double var_q = 0.0;
  double var_q2 = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    var_q += std::pow(m2.first(e) * m1.first_stderr(e), 2) +
             std::pow(m1.first(e) * m2.first_stderr(e), 2);
    for (std::size_t f = e; f < n; ++f) {
      const double mult = e == f ? 1.0 : 2.0;
      var_q2 += mult * mult *
                (std::pow(m2.second(e, f) * m1.second_stderr(e, f), 2) +
                 std::pow(m1.second(e, f) * m2.second_stderr(e, f), 2));
    }
  }
  var_q *= inv * inv;
  var_q2 *= inv * inv * inv * inv;
  out.stderr = std::sqrt(var_q2 + 4.0 * om.q * om.q * var_q);
  return out;
}

}  // namespace chaoslab
