#include "contdp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "contdp/accountant.hpp"
#include "contdp/errors.hpp"
#include "contdp/format.hpp"
#include "contdp/parallel.hpp"
#include "contdp/recompute.hpp"
#include "contdp/reductions.hpp"
#include "contdp/tree.hpp"

namespace contdp {

namespace {

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Quantile with linear interpolation between order statistics; `sorted`
// must be ascending and nonempty.
double quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

std::int64_t effective_T(const RunConfig& config,
                         const std::vector<Record>& stream) {
  return config.stream.source == StreamSpec::Source::kUniform
             ? config.T
             : static_cast<std::int64_t>(stream.size());
}

double exact_truth(const ColumnSums& sums, Variant variant) {
  return variant == Variant::kMaxSum
             ? static_cast<double>(max_sum(sums))
             : static_cast<double>(sum_select(sums));
}

}  // namespace

std::vector<Record> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open dataset file: " + path);
  std::vector<Record> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Record x;
    x.reserve(line.size());
    for (char c : line) {
      if (c != '0' && c != '1')
        throw ArgumentError(path + ":" + std::to_string(lineno) +
                            ": records are lines of 0/1 characters");
      x.push_back(static_cast<Bit>(c - '0'));
    }
    if (!records.empty() && x.size() != records.front().size())
      throw ArgumentError(path + ":" + std::to_string(lineno) +
                          ": record width differs from the first record");
    records.push_back(std::move(x));
  }
  if (records.empty()) throw ArgumentError(path + ": dataset file has no records");
  return records;
}

std::vector<Record> make_stream(const RunConfig& config, std::int64_t trial) {
  switch (config.stream.source) {
    case StreamSpec::Source::kUniform: {
      if (!(config.stream.p >= 0 && config.stream.p <= 1))
        throw ArgumentError("uniform stream probability must be in [0,1]");
      Rng rng(derive_seed(config.seed,
                          {kKeyStream, static_cast<std::uint64_t>(trial)}));
      std::vector<Record> records(static_cast<std::size_t>(config.T));
      for (Record& x : records) {
        x.resize(static_cast<std::size_t>(config.d));
        for (int j = 0; j < config.d; ++j)
          x[static_cast<std::size_t>(j)] =
              static_cast<Bit>(rng.next_unit() < config.stream.p);
      }
      return records;
    }
    case StreamSpec::Source::kFile:
      return load_dataset(config.stream.path);
    case StreamSpec::Source::kReductionMarginals: {
      const std::vector<Record> y = load_dataset(config.stream.path);
      const int d = static_cast<int>(y.front().size());
      return build_maxsum_reduction_stream(
          y, static_cast<std::int64_t>(y.size()), d);
    }
    case StreamSpec::Source::kReductionKindsel: {
      const std::vector<Record> y = load_dataset(config.stream.path);
      const int width = static_cast<int>(y.front().size());
      if (config.d < 1 || width % config.d != 0)
        throw ArgumentError("record width " + std::to_string(width) +
                            " is not divisible into blocks of d=" +
                            std::to_string(config.d));
      return build_kindsel_reduction_stream(
          y, static_cast<std::int64_t>(y.size()), config.d, width / config.d);
    }
  }
  throw ArgumentError("unknown stream source");
}

PrivacyBudget resolve_budget(const RunConfig& config) {
  if (config.rho.has_value()) {
    if (config.eps.has_value())
      throw ArgumentError("give either --rho or --eps, not both");
    return PrivacyBudget::ZCDP(*config.rho);
  }
  if (config.eps.has_value()) {
    if (config.delta.has_value())
      return PrivacyBudget::ZCDP(rho_from_approx_dp(*config.eps, *config.delta));
    return PrivacyBudget::PureDP(*config.eps);
  }
  if (config.delta.has_value())
    throw ArgumentError("--delta requires --eps");
  if (config.noise_override.has_value() ||
      config.mechanism == MechanismChoice::kTrivial)
    return PrivacyBudget::ZCDP(1.0);  // unused placeholder
  throw ArgumentError("a privacy budget is required: --rho or --eps [--delta]");
}

std::unique_ptr<Mechanism> build_mechanism(const RunConfig& config,
                                           std::uint64_t seed) {
  if (config.T < 1) throw ArgumentError("T must be >= 1");
  if (config.d < 1) throw ArgumentError("d must be >= 1");
  const PrivacyBudget budget = resolve_budget(config);
  switch (config.mechanism) {
    case MechanismChoice::kTrivial:
      if (config.period.has_value() || config.period_auto)
        throw ArgumentError("--period does not apply to the trivial mechanism");
      return std::make_unique<TrivialMechanism>(config.T, config.d,
                                                config.variant);
    case MechanismChoice::kTree:
      if (config.period.has_value() || config.period_auto)
        throw ArgumentError("--period does not apply to the tree mechanism");
      return std::make_unique<TreeMechanism>(config.T, config.d, budget,
                                             config.variant, seed,
                                             config.noise_override);
    case MechanismChoice::kRecompute: {
      std::int64_t r = 0;
      if (config.period.has_value()) {
        r = *config.period;
      } else if (config.period_auto) {
        const PeriodChoice choice =
            optimal_period(config.T, config.d, budget, config.variant);
        if (choice.trivial())
          return std::make_unique<TrivialMechanism>(config.T, config.d,
                                                    config.variant);
        r = choice.r;
      } else {
        throw ArgumentError("recompute needs --period N or --period auto");
      }
      const RecomputeTarget target = config.variant == Variant::kSelect
                                         ? RecomputeTarget::Select()
                                         : RecomputeTarget::MaxSum();
      return std::make_unique<RecomputeMechanism>(config.T, r, config.d, budget,
                                                  target, seed,
                                                  config.noise_override);
    }
  }
  throw ArgumentError("unknown mechanism");
}

std::string run_csv(const RunConfig& config) {
  if (config.trials < 1) throw ArgumentError("trials must be >= 1");
  const bool per_trial_stream =
      config.stream.source == StreamSpec::Source::kUniform;
  std::vector<Record> shared_stream;
  if (!per_trial_stream) shared_stream = make_stream(config, 0);

  RunConfig cfg = config;
  if (!per_trial_stream) {
    cfg.T = effective_T(config, shared_stream);
    cfg.d = static_cast<int>(shared_stream.front().size());
  }

  std::vector<std::string> chunks(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, [&](std::int64_t trial) {
    const std::vector<Record>& stream =
        per_trial_stream ? make_stream(cfg, trial) : shared_stream;
    std::unique_ptr<Mechanism> mech = build_mechanism(
        cfg, derive_seed(cfg.seed, {kKeyTrial, static_cast<std::uint64_t>(trial)}));
    ColumnSums sums(static_cast<std::size_t>(cfg.d), 0);
    std::string rows;
    for (std::int64_t t = 1; t <= cfg.T; ++t) {
      const Record& x = stream[static_cast<std::size_t>(t - 1)];
      add_record(sums, x);
      const double answer = mech->step(x);
      rows += format_int(trial);
      rows += ',';
      rows += format_int(t);
      rows += ',';
      rows += format_double(exact_truth(sums, cfg.variant));
      rows += ',';
      rows += format_double(answer);
      rows += ',';
      rows += format_double(step_error(sums, answer, cfg.variant));
      rows += '\n';
    }
    chunks[static_cast<std::size_t>(trial)] = std::move(rows);
  });

  std::string csv = "trial,t,truth,answer,err\n";
  for (const std::string& chunk : chunks) csv += chunk;
  return csv;
}

std::string cmd_run(const RunConfig& config) {
  std::string csv = run_csv(config);
  if (!config.out.empty()) write_file(config.out, csv);
  return csv;
}

namespace {

std::string plot_script_for(const std::string& csv_name) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# Log-log plot of a sweep CSV (param, median and quantiles of max error).\n";
  s += "import csv, sys\n";
  s += "import matplotlib\n";
  s += "matplotlib.use(\"Agg\")\n";
  s += "import matplotlib.pyplot as plt\n\n";
  s += "path = sys.argv[1] if len(sys.argv) > 1 else \"" + csv_name + "\"\n";
  s += "xs, med, lo, hi = [], [], [], []\n";
  s += "with open(path) as f:\n";
  s += "    for row in csv.DictReader(f):\n";
  s += "        xs.append(float(row[\"param\"]))\n";
  s += "        med.append(float(row[\"median_max_error\"]))\n";
  s += "        lo.append(float(row[\"q_one_third\"]))\n";
  s += "        hi.append(float(row[\"q_two_thirds\"]))\n";
  s += "plt.figure()\n";
  s += "plt.plot(xs, med, marker=\"o\", label=\"median max error\")\n";
  s += "plt.fill_between(xs, lo, hi, alpha=0.3, label=\"1/3..2/3 quantiles\")\n";
  s += "plt.xscale(\"log\")\n";
  s += "plt.yscale(\"log\")\n";
  s += "plt.xlabel(\"param\")\n";
  s += "plt.ylabel(\"max error\")\n";
  s += "plt.legend()\n";
  s += "plt.tight_layout()\n";
  s += "plt.savefig(path + \".png\", dpi=150)\n";
  s += "print(\"wrote\", path + \".png\")\n";
  return s;
}

}  // namespace

SweepResult cmd_sweep(const SweepConfig& config) {
  if (config.T_values.empty()) throw ArgumentError("sweep grid is empty");
  if (config.base.stream.source != StreamSpec::Source::kUniform)
    throw ArgumentError("sweep requires the uniform stream source");
  if (config.base.trials < 1) throw ArgumentError("trials must be >= 1");
  const bool sweep_T = config.T_values.size() > 1;
  const bool sweep_rho = config.rho_values.size() > 1;
  if (sweep_T && sweep_rho)
    throw ArgumentError("sweep one axis at a time: T or rho");

  std::vector<std::pair<std::int64_t, double>> grid;  // (T, rho), rho 0 = base budget
  if (!config.rho_values.empty()) {
    for (std::int64_t T : config.T_values)
      for (double rho : config.rho_values) grid.emplace_back(T, rho);
  } else {
    for (std::int64_t T : config.T_values) grid.emplace_back(T, 0.0);
  }

  SweepResult result;
  result.csv = "param,median_max_error,q_one_third,q_two_thirds\n";
  for (const auto& [T, rho] : grid) {
    RunConfig cfg = config.base;
    cfg.T = T;
    if (rho != 0.0) {
      cfg.rho = rho;
      cfg.eps.reset();
      cfg.delta.reset();
    }
    std::vector<double> max_errors(static_cast<std::size_t>(cfg.trials), 0.0);
    parallel_for(cfg.trials, [&](std::int64_t trial) {
      const std::vector<Record> stream = make_stream(cfg, trial);
      std::unique_ptr<Mechanism> mech = build_mechanism(
          cfg,
          derive_seed(cfg.seed, {kKeyTrial, static_cast<std::uint64_t>(trial)}));
      ColumnSums sums(static_cast<std::size_t>(cfg.d), 0);
      double worst = 0;
      for (std::int64_t t = 1; t <= cfg.T; ++t) {
        const Record& x = stream[static_cast<std::size_t>(t - 1)];
        add_record(sums, x);
        const double e = step_error(sums, mech->step(x), cfg.variant);
        if (e > worst) worst = e;
      }
      max_errors[static_cast<std::size_t>(trial)] = worst;
    });
    std::sort(max_errors.begin(), max_errors.end());
    SweepPoint point;
    point.param = sweep_rho ? rho : static_cast<double>(T);
    point.median_max_error = quantile(max_errors, 0.5);
    point.q_one_third = quantile(max_errors, 1.0 / 3.0);
    point.q_two_thirds = quantile(max_errors, 2.0 / 3.0);
    result.points.push_back(point);
    result.csv += format_double(point.param);
    result.csv += ',';
    result.csv += format_double(point.median_max_error);
    result.csv += ',';
    result.csv += format_double(point.q_one_third);
    result.csv += ',';
    result.csv += format_double(point.q_two_thirds);
    result.csv += '\n';
  }

  const std::string& out = config.base.out;
  result.plot_script = plot_script_for(out.empty() ? "sweep.csv" : out);
  if (!out.empty()) {
    write_file(out, result.csv);
    write_file(out + ".plot.py", result.plot_script);
  }
  return result;
}

double sweep_loglog_slope(const std::vector<SweepPoint>& points) {
  if (points.size() < 2)
    throw ArgumentError("slope needs at least two sweep points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const SweepPoint& p : points) {
    if (!(p.param > 0) || !(p.median_max_error > 0))
      throw ArgumentError("log-log slope needs positive params and errors");
    const double x = std::log(p.param);
    const double y = std::log(p.median_max_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// The scripted distinguishing setup used by the attack command: challenge at
// t=1 with two records that differ in their first two attributes (or in the
// single attribute when d=1), zeros afterwards.
struct AttackSetup {
  std::vector<Record> records;
  Record xL, xR;
};

AttackSetup attack_setup(std::int64_t T, int d) {
  AttackSetup s;
  s.records.assign(static_cast<std::size_t>(T),
                   Record(static_cast<std::size_t>(d), 0));
  s.xL.assign(static_cast<std::size_t>(d), 0);
  s.xR.assign(static_cast<std::size_t>(d), 0);
  s.xL[0] = 1;
  if (d > 1)
    s.xR[1] = 1;
  return s;
}

std::vector<double> noiseless_answers(const RunConfig& config,
                                      const std::vector<Record>& stream) {
  RunConfig cfg = config;
  cfg.noise_override = NoiseKind::None();
  std::unique_ptr<Mechanism> mech = build_mechanism(cfg, 0);
  std::vector<double> answers;
  answers.reserve(stream.size());
  for (const Record& x : stream) answers.push_back(mech->step(x));
  return answers;
}

}  // namespace

GameReport cmd_game(GameCommand command, const RunConfig& config) {
  GameReport report;
  report.trials = config.trials;
  if (config.trials < 1) throw ArgumentError("trials must be >= 1");

  if (command == GameCommand::kAttack) {
    const AttackSetup setup = attack_setup(config.T, config.d);
    std::vector<Record> streamL = setup.records;
    streamL[0] = setup.xL;
    std::vector<Record> streamR = setup.records;
    streamR[0] = setup.xR;
    const GuessRule rule = nearest_template(noiseless_answers(config, streamL),
                                            noiseless_answers(config, streamR));
    const AdversaryFactory make_adversary = [setup]() {
      return std::make_unique<ScriptedAdversary>(setup.records, 1, setup.xL,
                                                 setup.xR);
    };
    const MechanismFactory make_mechanism = [config](std::uint64_t seed) {
      return build_mechanism(config, seed);
    };
    report.advantage = estimate_advantage(make_mechanism, make_adversary, rule,
                                          config.trials, config.seed);

    double eps = 0;
    const PrivacyBudget budget = resolve_budget(config);
    if (config.mechanism != MechanismChoice::kTrivial &&
        !config.noise_override.has_value()) {
      eps = budget.kind == BudgetKind::kPureDP
                ? budget.eps
                : zcdp_to_dp(budget.rho, config.delta.value_or(1e-6));
      report.dp_advantage_bound = (std::exp(eps) - 1) / (std::exp(eps) + 1);
    }

    std::ostringstream text;
    if (report.advantage.small_sample)
      text << "warning: fewer than 100 trials per side, estimate unreliable\n";
    text << "advantage " << format_double(report.advantage.advantage) << " +- "
         << format_double(report.advantage.stderr_) << " ("
         << report.advantage.trials_per_side << " games per side)\n";
    if (report.dp_advantage_bound > 0)
      text << "dp bound (eps=" << format_double(eps)
           << "): advantage <= " << format_double(report.dp_advantage_bound)
           << "\n";
    report.text = text.str();
    report.csv = "advantage,stderr,trials_per_side,dp_advantage_bound\n" +
                 format_double(report.advantage.advantage) + ',' +
                 format_double(report.advantage.stderr_) + ',' +
                 format_int(report.advantage.trials_per_side) + ',' +
                 format_double(report.dp_advantage_bound) + '\n';
    if (!config.out.empty()) write_file(config.out, report.csv);
    return report;
  }

  // couple-tree / couple-recompute
  const PrivacyBudget budget = resolve_budget(config);
  TreeParams tree_params;
  RecomputeParams rcmp_params;
  if (command == GameCommand::kCoupleTree) {
    if (config.period.has_value() || config.period_auto)
      throw ArgumentError("--period does not apply to the tree mechanism");
    tree_params = TreeParams{config.T, config.d, budget, config.variant,
                             config.noise_override};
  } else {
    std::int64_t r = 0;
    if (config.period.has_value()) {
      r = *config.period;
    } else if (config.period_auto) {
      const PeriodChoice choice =
          optimal_period(config.T, config.d, budget, config.variant);
      if (choice.trivial())
        throw ArgumentError(
            "auto period is trivial for this budget; coupling needs a "
            "concrete --period");
      r = choice.r;
    } else {
      throw ArgumentError("couple-recompute needs --period N or --period auto");
    }
    rcmp_params = RecomputeParams{config.T,      r,
                                  config.d,      budget,
                                  config.variant, config.noise_override};
  }

  std::vector<std::uint8_t> mism(static_cast<std::size_t>(2 * config.trials), 0);
  parallel_for(2 * config.trials, [&](std::int64_t i) {
    const std::int64_t trial = i / 2;
    const Side side = i % 2 == 0 ? Side::kL : Side::kR;
    const std::uint64_t mech_seed = derive_seed(
        config.seed, {kKeyTrial, static_cast<std::uint64_t>(trial), 0});
    const std::uint64_t adv_seed =
        derive_seed(config.seed,
                    {kKeyTrial, static_cast<std::uint64_t>(trial), kKeyAdversary});
    RandomAdaptiveAdversary adv_game(config.T, config.d);
    RandomAdaptiveAdversary adv_sim(config.T, config.d);
    View game, sim;
    if (command == GameCommand::kCoupleTree) {
      game = run_game(tree_params.factory(), adv_game, side, mech_seed, adv_seed);
      sim = run_binary_simulation(tree_params, adv_sim, side, mech_seed, adv_seed);
    } else {
      game = run_game(rcmp_params.factory(), adv_game, side, mech_seed, adv_seed);
      sim = run_recompute_simulation(rcmp_params, adv_sim, side, mech_seed,
                                     adv_seed);
    }
    mism[static_cast<std::size_t>(i)] = game == sim ? 0 : 1;
  });

  std::string csv = "trial,side,match\n";
  for (std::int64_t i = 0; i < 2 * config.trials; ++i) {
    report.mismatches += mism[static_cast<std::size_t>(i)];
    csv += format_int(i / 2);
    csv += i % 2 == 0 ? ",L," : ",R,";
    csv += mism[static_cast<std::size_t>(i)] ? "0\n" : "1\n";
  }
  report.csv = std::move(csv);
  std::ostringstream text;
  text << (command == GameCommand::kCoupleTree ? "couple-tree" : "couple-recompute")
       << ": " << config.trials << " adversaries x 2 sides, "
       << report.mismatches << " mismatches\n";
  report.text = text.str();
  if (!config.out.empty()) write_file(config.out, report.csv);
  return report;
}

ReduceResult cmd_reduce(ReduceCommand command, const RunConfig& config) {
  if (config.stream.path.empty())
    throw ArgumentError("reduce needs a dataset file: --stream file:PATH");
  const std::vector<Record> y = load_dataset(config.stream.path);
  const std::int64_t n = static_cast<std::int64_t>(y.size());
  const int width = static_cast<int>(y.front().size());

  ReduceResult result;
  RunConfig cfg = config;
  std::vector<Record> stream;
  if (command == ReduceCommand::kMarginals) {
    cfg.variant = Variant::kMaxSum;
    cfg.d = width;
    stream = build_maxsum_reduction_stream(y, n, width);
  } else {
    cfg.variant = Variant::kSelect;
    if (config.d < 1 || width % config.d != 0)
      throw ArgumentError("record width " + std::to_string(width) +
                          " is not divisible into blocks of d=" +
                          std::to_string(config.d));
    cfg.d = width;
    stream = build_kindsel_reduction_stream(y, n, config.d, width / config.d);
  }
  cfg.T = static_cast<std::int64_t>(stream.size());

  std::unique_ptr<Mechanism> mech =
      build_mechanism(cfg, derive_seed(cfg.seed, {kKeyTrial, 0}));
  std::vector<double> answers;
  answers.reserve(stream.size());
  for (const Record& x : stream) answers.push_back(mech->step(x));

  const ColumnSums y_sums = column_sums(StreamPrefix{y});
  if (command == ReduceCommand::kMarginals) {
    result.recovered = marginals_from_answers(answers, n, width);
    result.exact.resize(static_cast<std::size_t>(width));
    for (int j = 0; j < width; ++j)
      result.exact[static_cast<std::size_t>(j)] =
          static_cast<double>(y_sums[static_cast<std::size_t>(j)]) /
          static_cast<double>(n);
  } else {
    const int d = config.d;
    const int k = width / d;
    const std::vector<int> picks = kindsel_from_answers(answers, n, d, k);
    result.recovered.assign(picks.begin(), picks.end());
    result.exact.resize(static_cast<std::size_t>(k));
    for (int b = 0; b < k; ++b) {
      int best = 0;
      for (int c = 1; c < d; ++c)
        if (y_sums[static_cast<std::size_t>(b * d + c)] >
            y_sums[static_cast<std::size_t>(b * d + best)])
          best = c;
      result.exact[static_cast<std::size_t>(b)] = best + 1;
    }
  }

  result.csv = "coord,recovered,exact,deviation\n";
  for (std::size_t i = 0; i < result.recovered.size(); ++i) {
    const double dev = std::abs(result.recovered[i] - result.exact[i]);
    if (dev > result.max_deviation) result.max_deviation = dev;
    result.csv += format_int(static_cast<std::int64_t>(i) + 1);
    result.csv += ',';
    result.csv += format_double(result.recovered[i]);
    result.csv += ',';
    result.csv += format_double(result.exact[i]);
    result.csv += ',';
    result.csv += format_double(dev);
    result.csv += '\n';
  }
  if (!config.out.empty()) write_file(config.out, result.csv);
  return result;
}

}  // namespace contdp
