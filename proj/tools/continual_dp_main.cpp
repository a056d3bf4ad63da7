// continual-dp: command-line front end for the contdp library.
//
// Subcommands:
//   run     stream a mechanism and emit per-timestep CSV rows
//   sweep   aggregate max-error quantiles over a T or rho grid
//   game    coupling checks and a distinguishing-advantage estimate
//   reduce  lower-bound reductions: recover marginals / per-block argmaxes
//
// Exit codes: 0 ok, 1 usage error, 2 runtime error, 3 coupling-test failure.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contdp/errors.hpp"
#include "contdp/experiment.hpp"
#include "contdp/format.hpp"

namespace {

using contdp::ArgumentError;

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse " + what + ": '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse " + what + ": '" + s + "'");
  }
}

contdp::StreamSpec parse_stream(const std::string& s) {
  contdp::StreamSpec spec;
  if (s == "uniform") return spec;
  if (s.rfind("uniform:", 0) == 0) {
    spec.p = parse_double(s.substr(8), "--stream probability");
    return spec;
  }
  const auto with_path = [&](contdp::StreamSpec::Source source,
                             std::size_t skip) {
    spec.source = source;
    spec.path = s.substr(skip);
    if (spec.path.empty()) throw ArgumentError("--stream needs a path after ':'");
    return spec;
  };
  if (s.rfind("file:", 0) == 0)
    return with_path(contdp::StreamSpec::Source::kFile, 5);
  if (s.rfind("reduction-marginals:", 0) == 0)
    return with_path(contdp::StreamSpec::Source::kReductionMarginals, 20);
  if (s.rfind("reduction-kindsel:", 0) == 0)
    return with_path(contdp::StreamSpec::Source::kReductionKindsel, 18);
  throw ArgumentError(
      "unknown --stream '" + s +
      "'; expected uniform[:p], file:PATH, reduction-marginals:PATH or "
      "reduction-kindsel:PATH");
}

contdp::NoiseKind parse_noise(const std::string& s) {
  if (s == "none") return contdp::NoiseKind::None();
  if (s.rfind("gaussian:", 0) == 0)
    return contdp::NoiseKind::Gaussian(parse_double(s.substr(9), "--noise sigma"));
  if (s.rfind("laplace:", 0) == 0)
    return contdp::NoiseKind::Laplace(parse_double(s.substr(8), "--noise lambda"));
  throw ArgumentError("unknown --noise '" + s +
                      "'; expected none, gaussian:SIGMA or laplace:LAMBDA");
}

// One flag set per subcommand; --T and --rho accept comma-separated lists so
// the sweep grid uses the same flags as the scalar commands.
struct CommonFlags {
  std::string mechanism = "tree";
  std::string variant = "select";
  std::vector<std::int64_t> T{64};
  int d = 1;
  std::vector<double> rho;
  double eps = 0;
  double delta = 0;
  std::string period;
  std::string noise;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string stream = "uniform";
  std::string out;
  std::string config;

  CLI::Option* o_rho = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_delta = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& f, bool grid) {
  sub->add_option("--mechanism", f.mechanism, "tree | recompute | trivial")
      ->check(CLI::IsMember({"tree", "recompute", "trivial"}));
  sub->add_option("--variant", f.variant, "maxsum | select")
      ->check(CLI::IsMember({"maxsum", "select"}));
  sub->add_option("--T", f.T,
                  grid ? "stream horizon(s), comma-separated grid"
                       : "stream horizon")
      ->delimiter(',');
  sub->add_option("--d", f.d, "number of binary attributes per record");
  f.o_rho = sub->add_option("--rho", f.rho,
                            grid ? "zCDP budget(s), comma-separated grid"
                                 : "zCDP budget")
                ->delimiter(',');
  f.o_eps = sub->add_option("--eps", f.eps, "pure-DP budget (zCDP with --delta)");
  f.o_delta = sub->add_option("--delta", f.delta,
                              "with --eps: convert to rho = eps^2/(16 ln(1/delta))");
  sub->add_option("--period", f.period,
                  "recompute period r, or 'auto' for the error-optimal choice");
  sub->add_option("--noise", f.noise,
                  "override: none | gaussian:SIGMA | laplace:LAMBDA");
  sub->add_option("--trials", f.trials, "independent trials");
  sub->add_option("--seed", f.seed, "master seed; all randomness derives from it");
  sub->add_option("--stream", f.stream,
                  "uniform[:p] | file:PATH | reduction-marginals:PATH | "
                  "reduction-kindsel:PATH");
  sub->add_option("--out", f.out, "output CSV path (default: stdout)");
  sub->add_option("--config", f.config,
                  "read flags from a 'key = value' file "
                  "(# comments; command-line flags win)");
  sub->allow_config_extras(CLI::config_extras_mode::error);
}

// Feeds the config file through the subcommand's own option set. Options
// already given on the command line keep their values.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream file(path);
  if (!file) throw ArgumentError("cannot open config file: " + path);
  sub->parse_from_stream(file);
}

contdp::RunConfig to_config(const CommonFlags& f, bool grid) {
  contdp::RunConfig cfg;
  if (f.mechanism == "tree") cfg.mechanism = contdp::MechanismChoice::kTree;
  else if (f.mechanism == "recompute") cfg.mechanism = contdp::MechanismChoice::kRecompute;
  else cfg.mechanism = contdp::MechanismChoice::kTrivial;
  cfg.variant = f.variant == "maxsum" ? contdp::Variant::kMaxSum
                                      : contdp::Variant::kSelect;
  if (f.T.empty()) throw ArgumentError("--T needs at least one value");
  if (!grid && f.T.size() != 1)
    throw ArgumentError("this command takes a single --T value");
  cfg.T = f.T.front();
  cfg.d = f.d;
  if (f.o_rho->count() > 0) {
    if (f.rho.empty()) throw ArgumentError("--rho needs at least one value");
    if (!grid && f.rho.size() != 1)
      throw ArgumentError("this command takes a single --rho value");
    cfg.rho = f.rho.front();
  }
  if (f.o_eps->count() > 0) cfg.eps = f.eps;
  if (f.o_delta->count() > 0) cfg.delta = f.delta;
  if (!f.period.empty()) {
    if (f.period == "auto") cfg.period_auto = true;
    else cfg.period = parse_int(f.period, "--period");
  }
  if (!f.noise.empty()) cfg.noise_override = parse_noise(f.noise);
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.stream = parse_stream(f.stream);
  cfg.out = f.out;
  return cfg;
}

void note_written(const std::string& path) {
  if (!path.empty()) std::cerr << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "continual-dp: differentially private MaxSum/SumSelect in the "
      "continual release model"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, game_flags, reduce_flags;
  CLI::App* run = app.add_subcommand(
      "run", "stream a mechanism, emit trial,t,truth,answer,err rows");
  add_common(run, run_flags, /*grid=*/false);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "max-error quantiles over a --T or --rho grid, plus a "
               "log-log plot script");
  add_common(sweep, sweep_flags, /*grid=*/true);

  std::string game_kind;
  CLI::App* game = app.add_subcommand(
      "game", "couple-tree | couple-recompute: check run_game against the "
              "proof simulator; attack: estimate distinguishing advantage");
  game->add_option("check", game_kind, "couple-tree | couple-recompute | attack")
      ->required()
      ->check(CLI::IsMember({"couple-tree", "couple-recompute", "attack"}));
  add_common(game, game_flags, /*grid=*/false);

  std::string reduce_kind;
  CLI::App* reduce = app.add_subcommand(
      "reduce", "run a lower-bound reduction stream through the configured "
                "mechanism and recover marginals or per-block argmaxes");
  reduce->add_option("what", reduce_kind, "marginals | kindsel")
      ->required()
      ->check(CLI::IsMember({"marginals", "kindsel"}));
  add_common(reduce, reduce_flags, /*grid=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) apply_config(run, run_flags.config);
    if (*sweep) apply_config(sweep, sweep_flags.config);
    if (*game) apply_config(game, game_flags.config);
    if (*reduce) apply_config(reduce, reduce_flags.config);

    if (*run) {
      const contdp::RunConfig cfg = to_config(run_flags, false);
      const std::string csv = contdp::cmd_run(cfg);
      if (cfg.out.empty()) std::cout << csv;
      note_written(cfg.out);
    } else if (*sweep) {
      contdp::SweepConfig cfg;
      cfg.base = to_config(sweep_flags, true);
      cfg.T_values = sweep_flags.T;
      if (sweep_flags.o_rho->count() > 0) cfg.rho_values = sweep_flags.rho;
      const contdp::SweepResult result = contdp::cmd_sweep(cfg);
      if (cfg.base.out.empty()) std::cout << result.csv;
      note_written(cfg.base.out);
      if (!cfg.base.out.empty()) note_written(cfg.base.out + ".plot.py");
      if (result.points.size() >= 2) {
        try {
          std::cerr << "log-log slope "
                    << contdp::format_double(
                           contdp::sweep_loglog_slope(result.points))
                    << "\n";
        } catch (const ArgumentError&) {
          // Non-positive points have no log-log slope; quantiles still stand.
        }
      }
    } else if (*game) {
      const contdp::RunConfig cfg = to_config(game_flags, false);
      contdp::GameCommand command = contdp::GameCommand::kAttack;
      if (game_kind == "couple-tree") command = contdp::GameCommand::kCoupleTree;
      if (game_kind == "couple-recompute")
        command = contdp::GameCommand::kCoupleRecompute;
      const contdp::GameReport report = contdp::cmd_game(command, cfg);
      std::cout << report.text;
      note_written(cfg.out);
      if (command != contdp::GameCommand::kAttack && report.mismatches > 0)
        return 3;
    } else if (*reduce) {
      const contdp::RunConfig cfg = to_config(reduce_flags, false);
      const contdp::ReduceCommand command =
          reduce_kind == "marginals" ? contdp::ReduceCommand::kMarginals
                                     : contdp::ReduceCommand::kKindsel;
      const contdp::ReduceResult result = contdp::cmd_reduce(command, cfg);
      if (cfg.out.empty()) std::cout << result.csv;
      note_written(cfg.out);
      std::cerr << "max deviation " << contdp::format_double(result.max_deviation)
                << "\n";
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
