// dppkit command-line front end: sampling, verification, coreset extraction,
// benchmarking and spectrum statistics with reproducible seeding and
// machine-readable JSON output.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dppkit/coreset.hpp"
#include "dppkit/errors.hpp"
#include "dppkit/matrix_io.hpp"
#include "dppkit/oracle.hpp"
#include "dppkit/projective.hpp"
#include "dppkit/random.hpp"
#include "dppkit/spectral.hpp"
#include "dppkit/stats.hpp"
#include "dppkit/version.hpp"

using json = nlohmann::ordered_json;
using namespace dppkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBreakdown = 3;
constexpr int kExitVerifyFailed = 4;

enum class InputKind { kernel_matrix, feature_matrix, points };

InputKind kind_from_name(const std::string& name) {
  if (name == "kernel_matrix") return InputKind::kernel_matrix;
  if (name == "feature_matrix") return InputKind::feature_matrix;
  if (name == "points") return InputKind::points;
  throw InvalidArgumentError("unknown --kind '" + name +
                             "' (expected kernel_matrix|feature_matrix|points)");
}

std::string kind_name(InputKind kind) {
  switch (kind) {
    case InputKind::kernel_matrix: return "kernel_matrix";
    case InputKind::feature_matrix: return "feature_matrix";
    case InputKind::points: return "points";
  }
  return "unknown";
}

struct RunConfig {
  std::string input;
  std::string kind = "kernel_matrix";
  std::string algorithm = "efficient";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int k = 0; // 0 = two-phase dpp mode
  std::uint64_t trials = 1;
  std::string output;
  double bandwidth = 0.0;
  bool with_stats = false;
  // verify tolerances; overridable on the command line
  double tv_tolerance = 0.01;
  double p_tolerance = 0.001;
  double trace_tolerance = 1e-8;
  double norm_tolerance = 1e-6;
  bool corrupt = false;

  json to_json() const {
    json j;
    j["input"] = input;
    j["kind"] = kind;
    j["algorithm"] = algorithm;
    j["mode"] = k > 0 ? "kdpp" : "dpp";
    if (k > 0) j["k"] = k;
    j["seed"] = seed;
    j["trials"] = trials;
    if (bandwidth > 0.0) j["bandwidth"] = bandwidth;
    j["tolerances"] = {{"tv", tv_tolerance},
                       {"p_value", p_tolerance},
                       {"trace", trace_tolerance},
                       {"normalization", norm_tolerance}};
    return j;
  }
};

void finalize_seed(RunConfig& config) {
  if (config.seed_given) return;
  std::random_device device;
  config.seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

json make_document(const std::string& command, const RunConfig& config) {
  json doc;
  doc["schema_version"] = 1;
  doc["dppkit_version"] = DPPKIT_VERSION;
  doc["command"] = command;
  doc["config"] = config.to_json();
  return doc;
}

void emit(const json& doc, const RunConfig& config) {
  if (config.output.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(config.output);
  if (!out) throw InvalidArgumentError("cannot open '" + config.output + "' for writing");
  out << doc.dump(2) << "\n";
}

unsigned worker_count() {
  if (const char* env = std::getenv("DPPKIT_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) return static_cast<unsigned>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? hw : 1;
}

// Runs fn(state, trial) for every trial index, fanned out over worker
// threads. Each worker owns a State; the returned vector (one State per
// worker, in worker order) is merged by the caller, so aggregation stays
// order-independent. Seeds must be derived from the trial index, never from
// the worker, to keep results thread-count invariant.
template <typename State, typename Fn>
std::vector<State> run_trials(std::uint64_t trials, Fn fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), std::max<std::uint64_t>(trials, 1)));
  std::vector<State> states(workers);
  if (workers <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) fn(states[0], t);
    return states;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::atomic<std::uint64_t> next{0};
  constexpr std::uint64_t kChunk = 64;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (;;) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= trials) break;
        const std::uint64_t end = std::min(begin + kChunk, trials);
        for (std::uint64_t t = begin; t < end; ++t) fn(states[w], t);
      }
    });
  }
  for (auto& thread : threads) thread.join();
  return states;
}

// ---------------------------------------------------------------------------
// Input loading

struct LoadedInput {
  InputKind kind;
  std::optional<LEnsemble> ensemble;       // kernel_matrix or points
  std::optional<DualFactor> factor;        // feature_matrix
  std::optional<Dataset> dataset;          // points
  double bandwidth_used = 0.0;
};

LoadedInput load_input(const RunConfig& config, bool need_kernel = true) {
  LoadedInput in;
  in.kind = kind_from_name(config.kind);
  const Eigen::MatrixXd raw = load_csv_matrix(config.input);
  switch (in.kind) {
    case InputKind::kernel_matrix:
      in.ensemble.emplace(raw);
      break;
    case InputKind::feature_matrix:
      in.factor.emplace(raw);
      break;
    case InputKind::points: {
      in.dataset.emplace(raw);
      if (need_kernel) {
        in.bandwidth_used =
            config.bandwidth > 0.0 ? config.bandwidth : median_pairwise_distance(*in.dataset);
        in.ensemble.emplace(gaussian_similarity(*in.dataset, in.bandwidth_used));
      }
      break;
    }
  }
  return in;
}

// Indices of the k largest positive eigenvalues (into the ascending order).
std::vector<int> top_k_indices(const Eigen::VectorXd& eigenvalues, int k) {
  const auto n = static_cast<int>(eigenvalues.size());
  if (k < 1 || k > n) {
    throw InvalidArgumentError("--k must be between 1 and the spectrum size");
  }
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const int which = n - 1 - j;
    if (!(eigenvalues(which) > 0.0)) {
      throw RankMismatchError("--k exceeds the kernel rank: eigenvalue " +
                              std::to_string(which) + " is zero");
    }
    idx[static_cast<std::size_t>(j)] = which;
  }
  return idx;
}

// ---------------------------------------------------------------------------
// sample

struct SampleState {
  std::unordered_map<std::uint32_t, std::uint64_t> subset_counts;
  std::vector<std::uint64_t> inclusion;
  std::vector<std::uint64_t> cardinality;
  double sum_cardinality = 0.0;
  double max_norm_dev = 0.0;
  std::vector<int> first_indices;
  bool have_first = false;
  std::uint64_t first_trial = std::numeric_limits<std::uint64_t>::max();
};

void accumulate(SampleState& state, std::uint64_t trial, const SampleDraw& draw, int n,
                bool track_subsets) {
  if (state.inclusion.empty()) state.inclusion.assign(static_cast<std::size_t>(n), 0);
  if (state.cardinality.empty()) state.cardinality.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i : draw.indices) ++state.inclusion[static_cast<std::size_t>(i)];
  ++state.cardinality[draw.indices.size()];
  state.sum_cardinality += static_cast<double>(draw.indices.size());
  state.max_norm_dev = std::max(state.max_norm_dev, draw.max_normalization_error);
  if (track_subsets && n <= kMaxEnumerationItems) {
    ++state.subset_counts[subset_mask(draw.indices, n)];
  }
  if (trial < state.first_trial) {
    state.first_trial = trial;
    state.first_indices = draw.indices;
    state.have_first = true;
  }
}

SampleState merge(std::vector<SampleState> states) {
  SampleState out;
  for (SampleState& s : states) {
    if (!s.have_first) continue;
    if (out.inclusion.empty()) {
      out.inclusion.assign(s.inclusion.size(), 0);
      out.cardinality.assign(s.cardinality.size(), 0);
    }
    for (std::size_t i = 0; i < s.inclusion.size(); ++i) out.inclusion[i] += s.inclusion[i];
    for (std::size_t i = 0; i < s.cardinality.size(); ++i) out.cardinality[i] += s.cardinality[i];
    for (const auto& [mask, c] : s.subset_counts) out.subset_counts[mask] += c;
    out.sum_cardinality += s.sum_cardinality;
    out.max_norm_dev = std::max(out.max_norm_dev, s.max_norm_dev);
    if (s.first_trial < out.first_trial) {
      out.first_trial = s.first_trial;
      out.first_indices = s.first_indices;
      out.have_first = true;
    }
  }
  return out;
}

// One draw of the configured sampler; `trial` seeds a derived stream.
SampleDraw run_one_draw(const LoadedInput& in, const RunConfig& config, Algorithm algorithm,
                        std::uint64_t trial) {
  RandomStream rng = RandomStream(config.seed).derived(trial);
  if (in.kind == InputKind::feature_matrix) {
    const DualFactor& factor = *in.factor;
    if (config.k > 0) {
      const std::vector<int> top = top_k_indices(factor.eigenvalues(), config.k);
      if (algorithm == Algorithm::dual) {
        return sample_projective_dual(DualProjective(factor, top), rng);
      }
      return sample_projective(algorithm, lifted_basis(factor, top), rng);
    }
    return sample_dpp(factor, rng, algorithm);
  }
  const LEnsemble& ensemble = *in.ensemble;
  if (algorithm == Algorithm::dual) {
    throw InvalidArgumentError("--algorithm dual requires --kind feature_matrix");
  }
  if (config.k > 0) {
    const std::vector<int> top = top_k_indices(ensemble.spectrum().eigenvalues, config.k);
    return sample_projective(algorithm, selected_eigenvectors(ensemble.spectrum(), top), rng);
  }
  return sample_dpp(ensemble, rng, algorithm);
}

int cmd_sample(RunConfig& config) {
  finalize_seed(config);
  const LoadedInput in = load_input(config);
  const Algorithm algorithm = algorithm_from_name(config.algorithm);
  const int n = static_cast<int>(in.kind == InputKind::feature_matrix ? in.factor->items()
                                                                      : in.ensemble->size());

  const bool track_subsets = config.with_stats;
  auto states = run_trials<SampleState>(config.trials, [&](SampleState& state, std::uint64_t t) {
    accumulate(state, t, run_one_draw(in, config, algorithm, t), n, track_subsets);
  });
  const SampleState total = merge(std::move(states));

  json doc = make_document("sample", config);
  json& results = doc["results"];
  results["n"] = n;
  results["indices"] = total.first_indices;

  double mu = 0.0;
  Eigen::VectorXd marginals;
  if (in.kind == InputKind::feature_matrix) {
    const DualFactor& f = *in.factor;
    const SpectrumStats stats = spectrum_stats(f);
    mu = stats.mu;
    marginals = Eigen::VectorXd::Zero(f.items());
    for (Eigen::Index k = 0; k < f.rank(); ++k) {
      marginals += (stats.inclusion(k) / f.eigenvalues()(k)) *
                   f.feature_projections().row(k).transpose().cwiseAbs2();
    }
  } else {
    mu = spectrum_stats(*in.ensemble).mu;
    marginals = marginal_kernel(*in.ensemble).diagonal();
  }
  results["mu"] = mu;
  results["mean_cardinality"] = total.sum_cardinality / static_cast<double>(config.trials);
  results["max_normalization_error"] = total.max_norm_dev;
  if (in.bandwidth_used > 0.0) results["bandwidth"] = in.bandwidth_used;

  if (config.with_stats) {
    results["marginals"] = std::vector<double>(marginals.data(), marginals.data() + marginals.size());
    json empirical;
    std::vector<double> inclusion(total.inclusion.size());
    for (std::size_t i = 0; i < inclusion.size(); ++i) {
      inclusion[i] = static_cast<double>(total.inclusion[i]) / static_cast<double>(config.trials);
    }
    empirical["inclusion_frequencies"] = inclusion;
    empirical["cardinality_histogram"] = total.cardinality;
    if (!total.subset_counts.empty()) {
      json freqs = json::object();
      for (const auto& [mask, count] : total.subset_counts) {
        freqs[std::to_string(mask)] =
            static_cast<double>(count) / static_cast<double>(config.trials);
      }
      empirical["subset_frequencies"] = std::move(freqs);
    }
    results["empirical"] = std::move(empirical);
  }

  emit(doc, config);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(RunConfig& config) {
  finalize_seed(config);
  const LoadedInput in = load_input(config);
  const Algorithm algorithm = algorithm_from_name(config.algorithm);

  // Everything is enumerated, so materialize the kernel for feature input.
  std::optional<LEnsemble> ensemble;
  if (in.kind == InputKind::feature_matrix) {
    ensemble.emplace(in.factor->features().transpose() * in.factor->features());
  } else {
    ensemble.emplace(*in.ensemble);
  }
  const int n = static_cast<int>(ensemble->size());
  if (n > kMaxEnumerationItems) {
    throw TooLargeError("verify: ground set of " + std::to_string(n) +
                        " items exceeds the enumeration cap of 20");
  }

  std::optional<SubsetDistribution> exact;
  std::optional<ProjectiveBasis> trace_basis;
  std::optional<DualProjective> trace_dual;
  if (config.k > 0) {
    if (in.kind == InputKind::feature_matrix) {
      const std::vector<int> top = top_k_indices(in.factor->eigenvalues(), config.k);
      trace_basis.emplace(lifted_basis(*in.factor, top));
      trace_dual.emplace(*in.factor, top);
    } else {
      const std::vector<int> top = top_k_indices(ensemble->spectrum().eigenvalues, config.k);
      trace_basis.emplace(selected_eigenvectors(ensemble->spectrum(), top));
    }
    exact.emplace(enumerate_projective_kdpp(*trace_basis));
  } else {
    exact.emplace(enumerate_dpp(*ensemble));
    // Paired traces run on the positive part of the spectrum.
    std::vector<int> positive;
    for (int i = 0; i < n; ++i) {
      if (ensemble->spectrum().eigenvalues(i) > 0.0) positive.push_back(i);
    }
    if (!positive.empty()) {
      trace_basis.emplace(selected_eigenvectors(ensemble->spectrum(), positive));
    }
  }

  auto states = run_trials<SampleState>(config.trials, [&](SampleState& state, std::uint64_t t) {
    SampleDraw draw = run_one_draw(in, config, algorithm, t);
    if (config.corrupt && t % 3 == 2) {
      // Negative-control fixture: every third draw replays the subset that
      // trial 0 produced, skewing the empirical distribution inside the
      // support of the exact one.
      SampleDraw first = run_one_draw(in, config, algorithm, 0);
      draw.indices = first.indices;
    }
    accumulate(state, t, draw, n, /*track_subsets=*/true);
  });
  const SampleState total = merge(std::move(states));

  json doc = make_document("verify", config);
  json& results = doc["results"];
  bool ok = true;

  FitReport fit;
  try {
    fit = goodness_of_fit(total.subset_counts, *exact);
  } catch (const UnsupportedSubsetError& e) {
    results["unsupported_subset"] = e.what();
    results["passed"] = false;
    emit(doc, config);
    return kExitVerifyFailed;
  }
  results["tv_distance"] = fit.tv_distance;
  results["chi_square"] = fit.chi_square;
  results["chi_square_dof"] = fit.dof;
  results["p_value"] = fit.p_value;
  results["n_draws"] = fit.n_draws;
  ok = ok && fit.tv_distance <= config.tv_tolerance && fit.p_value > config.p_tolerance;

  results["max_normalization_error"] = total.max_norm_dev;
  ok = ok && total.max_norm_dev <= config.norm_tolerance;

  if (trace_basis) {
    const PairedTraces traces = trace_dual
                                    ? paired_trace(*trace_basis, *trace_dual, config.seed)
                                    : paired_trace(*trace_basis, config.seed);
    const double discrepancy = max_trace_discrepancy(traces);
    results["trace_discrepancy"] = discrepancy;
    results["trace_indices_identical"] = identical_indices(traces);
    ok = ok && discrepancy <= config.trace_tolerance && identical_indices(traces);
  }

  results["passed"] = ok;
  emit(doc, config);
  return ok ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------------------
// coreset

int cmd_coreset(RunConfig& config) {
  finalize_seed(config);
  if (kind_from_name(config.kind) != InputKind::points) {
    throw InvalidArgumentError("coreset requires --kind points");
  }
  const LoadedInput in = load_input(config);
  const Dataset& data = *in.dataset;
  if (data.size() < 2) throw InvalidArgumentError("coreset: need at least two points");

  const SensitivityVector sensitivities = sensitivity_1means(data);
  const LEnsemble& l = *in.ensemble;
  const CoresetKernel kernel = coreset_kernel(l);

  Spectrum scaled;
  scaled.eigenvalues = kernel.alpha * l.spectrum().eigenvalues;
  scaled.eigenvectors = l.spectrum().eigenvectors;
  RandomStream rng(config.seed);
  const std::vector<int> selected = bernoulli_phase(spectrum_stats(scaled.eigenvalues), rng);
  std::vector<int> indices;
  double max_norm_dev = 0.0;
  if (!selected.empty()) {
    const SampleDraw draw =
        sample_projective_efficient(selected_eigenvectors(scaled, selected), rng);
    indices = draw.indices;
    max_norm_dev = draw.max_normalization_error;
  }
  const WeightedSample sample = make_weighted_sample(indices, kernel.marginals);

  json doc = make_document("coreset", config);
  json& results = doc["results"];
  results["n"] = data.size();
  results["dim"] = data.dim();
  results["bandwidth"] = in.bandwidth_used;
  results["alpha"] = kernel.alpha;
  results["mu"] = kernel.mu;
  const double an = kernel.alpha * static_cast<double>(data.size());
  results["mu_bounds_ok"] = kernel.mu >= an / 2.0 - 1e-10 && kernel.mu <= an + 1e-10;
  results["indices"] = sample.indices;
  results["weights"] =
      std::vector<double>(sample.weights.data(), sample.weights.data() + sample.weights.size());
  results["max_normalization_error"] = max_norm_dev;
  if (config.with_stats || true) {
    results["sigma"] = std::vector<double>(sensitivities.sigma.data(),
                                           sensitivities.sigma.data() + sensitivities.sigma.size());
    results["sigma_sum"] = sensitivities.sigma.sum();
    results["degenerate_variance"] = sensitivities.degenerate_variance;
  }
  emit(doc, config);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchRow {
  std::string algorithm;
  int n = 0;
  int k = 0;
  int d = 0;
  double decompose_seconds = 0.0;
  double median_draw_seconds = 0.0;
  int reps = 0;
};

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

int cmd_bench(const std::string& output, const std::string& csv_path, int n,
              std::vector<int> k_list, std::vector<std::string> algorithms, int reps, int d,
              RunConfig& config) {
  finalize_seed(config);
  reps = std::max(reps, 5);
  if (k_list.empty()) k_list = {16, 32, 64, 128};
  if (algorithms.empty()) algorithms = {"reference", "efficient"};
  config.output = output;

  using clock = std::chrono::steady_clock;
  std::mt19937_64 engine(mix64(config.seed));
  std::normal_distribution<double> normal;
  const auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(engine);
    return m;
  };

  std::vector<BenchRow> rows;
  std::unordered_map<std::string, std::vector<double>> times_by_algorithm;

  if (d > 0) {
    // Pipeline comparison: d x d factorization + dual draws against the full
    // N x N decomposition + efficient draws, on the same L = Psi^T Psi.
    const Eigen::MatrixXd psi = gaussian(d, n) / std::sqrt(static_cast<double>(n));
    for (const std::string& name : algorithms) {
      BenchRow row;
      row.algorithm = name;
      row.n = n;
      row.d = d;
      row.k = -1; // two-phase; cardinality is Bernoulli-distributed
      row.reps = reps;
      const Algorithm algorithm = algorithm_from_name(name);

      const auto t0 = clock::now();
      std::optional<DualFactor> factor;
      std::optional<LEnsemble> ensemble;
      if (algorithm == Algorithm::dual) {
        factor.emplace(psi);
      } else {
        ensemble.emplace(psi.transpose() * psi);
      }
      row.decompose_seconds = std::chrono::duration<double>(clock::now() - t0).count();

      std::vector<double> times;
      for (int r = 0; r < reps; ++r) {
        RandomStream rng = RandomStream(config.seed).derived(static_cast<std::uint64_t>(r));
        const auto s0 = clock::now();
        if (algorithm == Algorithm::dual) {
          sample_dpp(*factor, rng, algorithm);
        } else {
          sample_dpp(*ensemble, rng, algorithm);
        }
        times.push_back(std::chrono::duration<double>(clock::now() - s0).count());
      }
      row.median_draw_seconds = median_of(times);
      rows.push_back(row);
    }
  } else {
    for (const std::string& name : algorithms) {
      const Algorithm algorithm = algorithm_from_name(name);
      for (int k : k_list) {
        BenchRow row;
        row.algorithm = name;
        row.n = n;
        row.k = k;
        row.d = algorithm == Algorithm::dual ? k : 0;
        row.reps = reps;

        std::optional<ProjectiveBasis> basis;
        std::optional<DualProjective> dual;
        if (algorithm == Algorithm::dual) {
          const Eigen::MatrixXd psi = gaussian(k, n);
          const DualFactor factor(psi);
          std::vector<int> all(static_cast<std::size_t>(factor.rank()));
          std::iota(all.begin(), all.end(), 0);
          dual.emplace(factor, all);
        } else {
          const Eigen::MatrixXd raw = gaussian(n, k);
          Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
          basis.emplace(qr.householderQ() * Eigen::MatrixXd::Identity(n, k));
        }

        std::vector<double> times;
        for (int r = 0; r < reps; ++r) {
          RandomStream rng = RandomStream(config.seed).derived(static_cast<std::uint64_t>(r));
          const auto s0 = clock::now();
          if (algorithm == Algorithm::dual) {
            sample_projective_dual(*dual, rng);
          } else {
            sample_projective(algorithm, *basis, rng);
          }
          times.push_back(std::chrono::duration<double>(clock::now() - s0).count());
        }
        row.median_draw_seconds = median_of(times);
        rows.push_back(row);
        times_by_algorithm[name].push_back(row.median_draw_seconds);
      }
    }
  }

  json doc = make_document("bench", config);
  json& results = doc["results"];
  results["rows"] = json::array();
  for (const BenchRow& row : rows) {
    results["rows"].push_back({{"algorithm", row.algorithm},
                               {"n", row.n},
                               {"k", row.k},
                               {"d", row.d},
                               {"decompose_seconds", row.decompose_seconds},
                               {"median_draw_seconds", row.median_draw_seconds},
                               {"total_seconds",
                                row.decompose_seconds + row.reps * row.median_draw_seconds},
                               {"reps", row.reps}});
  }
  if (d <= 0 && k_list.size() >= 2) {
    json slopes = json::object();
    std::vector<double> ks(k_list.begin(), k_list.end());
    for (const auto& [name, times] : times_by_algorithm) {
      slopes[name] = stats::log_log_slope(ks, times);
    }
    results["log_log_slopes"] = std::move(slopes);
  }
  emit(doc, config);

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw InvalidArgumentError("cannot open '" + csv_path + "' for writing");
    csv << "algorithm,n,k,d,decompose_seconds,median_draw_seconds,reps\n";
    for (const BenchRow& row : rows) {
      csv << row.algorithm << ',' << row.n << ',' << row.k << ',' << row.d << ','
          << row.decompose_seconds << ',' << row.median_draw_seconds << ',' << row.reps << "\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(RunConfig& config) {
  finalize_seed(config);
  const LoadedInput in = load_input(config);
  json doc = make_document("stats", config);
  json& results = doc["results"];

  if (in.kind == InputKind::feature_matrix) {
    const DualFactor& f = *in.factor;
    const SpectrumStats stats = spectrum_stats(f);
    results["n"] = f.items();
    results["feature_dim"] = f.feature_dim();
    results["rank"] = f.rank();
    results["eigenvalues"] = std::vector<double>(
        f.eigenvalues().data(), f.eigenvalues().data() + f.eigenvalues().size());
    results["inclusion"] = std::vector<double>(stats.inclusion.data(),
                                               stats.inclusion.data() + stats.inclusion.size());
    results["mu"] = stats.mu;
    results["variance"] = stats.variance;
  } else {
    const LEnsemble& l = *in.ensemble;
    const SpectrumStats stats = spectrum_stats(l);
    const Eigen::VectorXd marginals = marginal_kernel(l).diagonal();
    results["n"] = l.size();
    results["eigenvalues"] = std::vector<double>(
        l.spectrum().eigenvalues.data(),
        l.spectrum().eigenvalues.data() + l.spectrum().eigenvalues.size());
    results["inclusion"] = std::vector<double>(stats.inclusion.data(),
                                               stats.inclusion.data() + stats.inclusion.size());
    results["mu"] = stats.mu;
    results["variance"] = stats.variance;
    results["marginals"] =
        std::vector<double>(marginals.data(), marginals.data() + marginals.size());
    if (in.bandwidth_used > 0.0) results["bandwidth"] = in.bandwidth_used;
  }
  emit(doc, config);
  return kExitOk;
}

void add_common_options(CLI::App* cmd, RunConfig& config, bool needs_input = true) {
  auto* input = cmd->add_option("--input", config.input, "CSV matrix path");
  if (needs_input) input->required();
  cmd->add_option("--kind", config.kind, "kernel_matrix|feature_matrix|points");
  cmd->add_option("--seed", config.seed, "64-bit seed (random and recorded when omitted)")
      ->each([&config](const std::string&) { config.seed_given = true; });
  cmd->add_option("--output", config.output, "write the JSON document here instead of stdout");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dppkit: exact DPP sampling, verification and k-means coresets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DPPKIT_VERSION);

  RunConfig config;

  auto* sample = app.add_subcommand("sample", "draw from a DPP or projective k-DPP");
  add_common_options(sample, config);
  sample->add_option("--algorithm", config.algorithm, "reference|schur|efficient|dual");
  sample->add_option("--k", config.k, "fixed-size mode: top-k eigenvector projective DPP");
  sample->add_flag("--dpp", [](std::int64_t) {}, "two-phase DPP mode (default)");
  sample->add_option("--trials", config.trials, "number of independent draws");
  sample->add_flag("--stats", config.with_stats, "include marginals and empirical frequencies");
  sample->add_option("--bandwidth", config.bandwidth, "Gaussian bandwidth for --kind points");

  auto* verify = app.add_subcommand("verify", "check draws against brute-force enumeration");
  add_common_options(verify, config);
  verify->add_option("--algorithm", config.algorithm, "reference|schur|efficient|dual");
  verify->add_option("--k", config.k, "fixed-size mode");
  verify->add_option("--trials", config.trials, "number of draws for the fit test")
      ->default_val(200000);
  verify->add_option("--bandwidth", config.bandwidth, "Gaussian bandwidth for --kind points");
  verify->add_option("--tv-tolerance", config.tv_tolerance, "max total-variation distance");
  verify->add_option("--p-tolerance", config.p_tolerance, "min chi-square p-value");
  verify->add_option("--trace-tolerance", config.trace_tolerance, "max trace discrepancy");
  verify->add_option("--norm-tolerance", config.norm_tolerance,
                     "max normalization-identity deviation");
  verify->add_flag("--corrupt", config.corrupt)->group(""); // negative-control fixture

  auto* coreset = app.add_subcommand("coreset", "importance-weighted coreset via DPP sampling");
  add_common_options(coreset, config);
  coreset->get_option("--kind")->default_val("points");
  coreset->add_option("--bandwidth", config.bandwidth, "Gaussian similarity bandwidth");

  auto* bench = app.add_subcommand("bench", "per-draw timing over (n, k, d, algorithm)");
  std::string bench_output, bench_csv;
  int bench_n = 2000, bench_reps = 5, bench_d = 0;
  std::vector<int> bench_k;
  std::vector<std::string> bench_algorithms;
  bench->add_option("--n", bench_n, "ground-set size");
  bench->add_option("--k-list", bench_k, "comma-separated k values")->delimiter(',');
  bench->add_option("--algorithms", bench_algorithms, "comma-separated algorithm names")
      ->delimiter(',');
  bench->add_option("--reps", bench_reps, "draws per configuration (min 5)");
  bench->add_option("--d", bench_d,
                    "feature dimension: switches to the two-phase pipeline comparison");
  bench->add_option("--seed", config.seed, "64-bit seed")
      ->each([&config](const std::string&) { config.seed_given = true; });
  bench->add_option("--output", bench_output, "JSON output path");
  bench->add_option("--csv", bench_csv, "also write the timing table as CSV");

  auto* statscmd = app.add_subcommand("stats", "spectrum statistics of the input");
  add_common_options(statscmd, config);
  statscmd->add_option("--bandwidth", config.bandwidth, "Gaussian bandwidth for --kind points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) return cmd_sample(config);
    if (verify->parsed()) return cmd_verify(config);
    if (coreset->parsed()) return cmd_coreset(config);
    if (bench->parsed()) {
      return cmd_bench(bench_output, bench_csv, bench_n, bench_k, bench_algorithms, bench_reps,
                       bench_d, config);
    }
    if (statscmd->parsed()) return cmd_stats(config);
  } catch (const NumericalBreakdownError& e) {
    std::cerr << "numerical breakdown: " << e.what() << "\n";
    return kExitBreakdown;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
