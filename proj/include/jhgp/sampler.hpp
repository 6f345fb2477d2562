#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jhgp/data_model.hpp"
#include "jhgp/kernels.hpp"
#include "jhgp/priors.hpp"
#include "jhgp/rng.hpp"

namespace jhgp {

/// Which channels the model carries.
///  Joint            - longitudinal and survival linked through psi (JHGP)
///  LongitudinalOnly - hierarchical GP for Y alone
///  SurvivalOnly     - extended HGP for the logit hazard, psi is the frailty (phi = 1)
enum class ModelMode { Joint, LongitudinalOnly, SurvivalOnly };

std::string to_string(ModelMode m);
ModelMode model_mode_from_string(const std::string& s);

enum class PsiHyperPrior { Jeffreys, Uniform };

struct SamplerConfig {
  ModelMode mode = ModelMode::Joint;
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 5;

  KernelSpec psi_kernel = KernelSpec::ar1(-0.5);
  // Unset: squared exponential with length-scale = span / 4 and jitter 1e-6.
  std::optional<KernelSpec> mu_y_kernel;
  std::optional<KernelSpec> mu_h_kernel;

  PsiHyperPrior psi_hyper_prior = PsiHyperPrior::Jeffreys;

  // Block switches; a disabled block keeps its initial value.
  bool sample_psi_hyper = true;
  bool sample_mean_hyper = true;
  bool sample_sigma2_y = true;
  bool sample_sigma2_psi = true;
  bool sample_mean_variances = true;
  bool sample_g = true;          // g_gamma, g_eta
  bool sample_phi_hyper = false;  // g_phi, mu_phi

  // g-prior on phi: phi ~ N(mu_phi, g_phi / sum_i psi_i'psi_i). g_phi <= 0 means
  // "number of event slots" (unit information).
  double g_phi = 0.0;
  double mu_phi = 0.0;

  double variance_floor = 1e-8;
  double target_accept = 0.3;
  int adapt_interval = 50;
  double initial_step = 0.3;
  bool keep_omega = false;

  // Initial values; NaN means "derive from the data".
  double init_sigma2_y = std::numeric_limits<double>::quiet_NaN();
  double init_sigma2_psi = std::numeric_limits<double>::quiet_NaN();
  double init_g_gamma = std::numeric_limits<double>::quiet_NaN();
  double init_g_eta = std::numeric_limits<double>::quiet_NaN();
  double init_sigma2_mu_y = std::numeric_limits<double>::quiet_NaN();
  double init_sigma2_mu_h = std::numeric_limits<double>::quiet_NaN();
  double init_phi = std::numeric_limits<double>::quiet_NaN();

  /// Throws UsageError on inconsistent settings.
  void validate() const;
  /// Flat key/value echo, e.g. {"mcmc.iterations": "10000", ...}.
  std::map<std::string, std::string> echo() const;
};

/// Per-subject view of the data on the subject's psi grid.
struct SubjectLayout {
  std::string id;
  std::vector<Tick> ticks;          // union of longitudinal ticks and event window
  std::vector<std::size_t> global;  // position of each tick on the global grid
  std::vector<char> has_y;
  std::vector<double> y;
  std::vector<char> has_r;
  std::vector<int> r;
  std::size_t n_y = 0;
  std::size_t n_r = 0;
  std::size_t shape = 0;  // index into ModelData::shapes

  std::size_t size() const { return ticks.size(); }
};

struct ModelData {
  ModelMode mode = ModelMode::Joint;
  TimeGrid grid;
  std::vector<SubjectLayout> subjects;
  // Distinct subject grids relative to their first tick. Kernels used here are
  // translation invariant (Brownian motion is anchored at the first tick).
  std::vector<std::vector<Tick>> shapes;
  std::vector<std::string> warnings;

  static ModelData build(const std::vector<SubjectSeries>& data, ModelMode mode);
  std::size_t total_y() const;
  std::size_t total_r() const;
};

/// One full set of latent processes and scalars.
struct ModelState {
  Eigen::VectorXd mu_y;  // global grid (empty in survival-only mode)
  Eigen::VectorXd mu_h;  // global grid (empty in longitudinal-only mode)
  std::vector<Eigen::VectorXd> psi;
  std::vector<double> gamma;
  std::vector<double> eta;
  double phi = 0.0;
  std::vector<double> theta_psi;
  std::vector<double> theta_mu_y;
  std::vector<double> theta_mu_h;
  double sigma2_mu_y = 1.0;
  double sigma2_mu_h = 1.0;
  PriorState prior;
  std::vector<Eigen::VectorXd> omega;  // per subject, per psi slot (0 where no event slot)

  bool operator==(const ModelState& o) const;
};

/// Shape information needed to interpret a ModelState without the raw data.
struct DrawLayout {
  ModelMode mode = ModelMode::Joint;
  std::vector<Tick> global_ticks;
  std::vector<std::string> subject_ids;
  std::vector<std::vector<Tick>> subject_ticks;
  KernelSpec psi_kernel;
  KernelSpec mu_y_kernel;
  KernelSpec mu_h_kernel;
  bool has_omega = false;

  bool operator==(const DrawLayout& o) const;
  std::size_t subject_index(const std::string& id) const;  // throws DataError
};

struct AcceptStat {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct ChainMeta {
  std::uint64_t seed = 0;
  int chain = 0;
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  std::map<std::string, double> acceptance;  // post burn-in
  std::map<std::string, double> step_size;   // frozen after burn-in

  bool operator==(const ChainMeta&) const = default;
};

struct PosteriorDraws {
  DrawLayout layout;
  std::vector<ModelState> states;
  std::vector<int> chain_of;  // chain index of each state
  std::vector<int> iteration_of;
  std::vector<ChainMeta> chains;
  std::map<std::string, std::string> config_echo;

  std::size_t size() const { return states.size(); }
  /// Draws belonging to one chain.
  PosteriorDraws chain(int c) const;
  /// Concatenate chains (layouts must agree).
  static PosteriorDraws merge(const std::vector<PosteriorDraws>& parts);
};

/// Gibbs / Metropolis-within-Gibbs engine. Each block update is public so that
/// tests can iterate a single conditional.
class GibbsSampler {
 public:
  GibbsSampler(ModelData data, SamplerConfig cfg);

  const ModelData& data() const { return data_; }
  ModelData& mutable_data() { return data_; }
  const SamplerConfig& config() const { return cfg_; }
  DrawLayout layout() const;

  ModelState init_state() const;

  /// One systematic scan over every block enabled for the mode.
  void sweep(ModelState& s, Rng& rng);

  void update_omega(ModelState& s, Rng& rng) const;
  void update_mu_y(ModelState& s, Rng& rng) const;
  void update_mu_h(ModelState& s, Rng& rng) const;
  void update_psi(ModelState& s, std::size_t i, Rng& rng);
  void update_intercepts(ModelState& s, Rng& rng) const;
  void update_phi(ModelState& s, Rng& rng) const;
  void update_sigma2_y(ModelState& s, Rng& rng) const;
  void update_scales(ModelState& s, Rng& rng);
  void update_mean_variances(ModelState& s, Rng& rng) const;
  void update_kernel_hyper(ModelState& s, Rng& rng);
  void update_g(ModelState& s, Rng& rng) const;

  /// Gaussian conditional of mu_y given everything else (mean, covariance).
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> mu_y_conditional(const ModelState& s) const;
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> mu_h_conditional(const ModelState& s) const;
  /// Gaussian part of psi_i's conditional (before the phi-prior correction).
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> psi_conditional(const ModelState& s, std::size_t i) const;

  /// Logit hazard on subject i's psi grid.
  Eigen::VectorXd logit_hazard(const ModelState& s, std::size_t i) const;

  void set_adapting(bool on) { adapting_ = on; }
  void end_adaptation_batch();
  void reset_acceptance();
  const std::map<std::string, AcceptStat>& acceptance() const { return accept_; }
  const std::map<std::string, double>& step_sizes() const { return step_; }

  KernelSpec mu_y_kernel(const ModelState& s) const;
  KernelSpec mu_h_kernel(const ModelState& s) const;
  KernelSpec psi_kernel(const std::vector<double>& theta) const;

 private:
  struct ShapeFactor {
    Eigen::MatrixXd v;  // correlation matrix (with kernel jitter)
    Eigen::MatrixXd l;  // Cholesky factor
    double log_det = 0.0;
  };
  const std::vector<ShapeFactor>& shape_factors(const std::vector<double>& theta) const;
  double psi_loglik(const ModelState& s, const std::vector<double>& theta) const;
  double psi_hyper_logprior(const std::vector<double>& theta) const;
  double mean_hyper_logtarget(const ModelState& s, bool y_channel, double length_scale) const;
  void mean_pseudo_obs(const ModelState& s, bool y_channel, Eigen::VectorXd& prec, Eigen::VectorXd& lin) const;
  double phi_prior_quadratic(const ModelState& s) const;
  double phi_g() const;
  void record(const std::string& block, bool accepted);

  ModelData data_;
  SamplerConfig cfg_;
  KernelSpec default_mean_kernel_;
  double g_phi_default_ = 1.0;
  bool adapting_ = false;
  std::map<std::string, AcceptStat> accept_;
  std::map<std::string, AcceptStat> batch_;
  std::map<std::string, double> step_;
  mutable std::vector<double> cached_theta_;
  mutable std::vector<ShapeFactor> cached_factors_;
};

/// Full chain: init, burn-in with step adaptation, thinning.
PosteriorDraws run_chain(const std::vector<SubjectSeries>& data, const SamplerConfig& cfg,
                         std::uint64_t seed, int chain = 0);

/// `chains` independent chains with seeds derived from `seed`, run concurrently,
/// merged in chain order.
PosteriorDraws run_chains(const std::vector<SubjectSeries>& data, const SamplerConfig& cfg,
                          std::uint64_t seed, int chains);

/// Named scalar columns of a state, in the persisted column order.
std::vector<std::pair<std::string, double>> flatten_state(const ModelState& s, const DrawLayout& layout);
std::vector<std::string> state_column_names(const DrawLayout& layout);
ModelState unflatten_state(const std::vector<double>& values, const DrawLayout& layout);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

/// Posterior summaries of arbitrary named columns (one vector of draws each).
std::vector<SummaryRow> summarize_columns(const std::vector<std::string>& names,
                                          const std::vector<std::vector<double>>& columns);

/// Scalar parameters, per-subject scalars, and per-tick mu_y, mu_h, lambda0.
/// Throws if draws are empty.
std::vector<SummaryRow> summarize(const PosteriorDraws& draws);

/// Type-7 quantile of an unsorted sample.
double quantile(std::vector<double> v, double p);

}  // namespace jhgp
