#include "contdp/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <utility>

#include "contdp/errors.hpp"
#include "contdp/format.hpp"
#include "contdp/parallel.hpp"

namespace contdp {

AdversaryMove AdversaryMove::Regular(Record x) {
  AdversaryMove m;
  m.kind = Kind::kRegular;
  m.x = std::move(x);
  return m;
}

AdversaryMove AdversaryMove::Challenge(Record xL, Record xR) {
  if (xL.size() != xR.size())
    throw DimensionMismatchError("challenge pair has mismatched widths");
  AdversaryMove m;
  m.kind = Kind::kChallenge;
  m.xL = std::move(xL);
  m.xR = std::move(xR);
  return m;
}

namespace {

std::string bits_string(const Record& x) {
  std::string s;
  s.reserve(x.size());
  for (Bit b : x) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace

std::string serialize_view(const View& view) {
  std::string out;
  for (std::size_t i = 0; i < view.moves.size(); ++i) {
    const AdversaryMove& m = view.moves[i];
    out += format_int(static_cast<std::int64_t>(i) + 1);
    if (m.kind == AdversaryMove::Kind::kRegular) {
      out += ",regular,";
      out += bits_string(m.x);
    } else {
      out += ",challenge,";
      out += bits_string(m.xL);
      out += '|';
      out += bits_string(m.xR);
    }
    out += ',';
    out += format_double(view.answers[i]);
    out += '\n';
  }
  return out;
}

View run_game(const MechanismFactory& make_mechanism, Adversary& adversary,
              Side side, std::uint64_t mech_seed, std::uint64_t adv_seed) {
  std::unique_ptr<Mechanism> mech = make_mechanism(mech_seed);
  if (mech->dim() != adversary.dim())
    throw ArgumentError("mechanism and adversary disagree on d");
  if (mech->horizon() < adversary.horizon())
    throw ArgumentError("mechanism horizon shorter than the adversary's");

  Rng rng(adv_seed);
  View view;
  view.adversary_seed = adv_seed;
  bool challenged = false;
  const std::int64_t T = adversary.horizon();
  for (std::int64_t t = 1; t <= T; ++t) {
    AdversaryMove move = adversary.next(view.answers, rng);
    const Record* fed = nullptr;
    if (move.kind == AdversaryMove::Kind::kChallenge) {
      if (challenged)
        throw ProtocolViolationError("second challenge at t=" + std::to_string(t));
      challenged = true;
      validate_record(move.xL, mech->dim());
      validate_record(move.xR, mech->dim());
      fed = side == Side::kL ? &move.xL : &move.xR;
    } else {
      validate_record(move.x, mech->dim());
      fed = &move.x;
    }
    const double answer = mech->step(*fed);
    view.moves.push_back(std::move(move));
    view.answers.push_back(answer);
  }
  if (!challenged)
    throw ProtocolViolationError("game ended without a challenge");
  return view;
}

MechanismFactory TreeParams::factory() const {
  TreeParams p = *this;
  return [p](std::uint64_t seed) -> std::unique_ptr<Mechanism> {
    return std::make_unique<TreeMechanism>(p.T, p.d, p.budget, p.variant, seed,
                                           p.noise_override);
  };
}

MechanismFactory RecomputeParams::factory() const {
  RecomputeParams p = *this;
  return [p](std::uint64_t seed) -> std::unique_ptr<Mechanism> {
    const RecomputeTarget target = p.variant == Variant::kSelect
                                       ? RecomputeTarget::Select()
                                       : RecomputeTarget::MaxSum();
    return std::make_unique<RecomputeMechanism>(p.T, p.r, p.d, p.budget, target,
                                                seed, p.noise_override);
  };
}

std::int64_t challenge_node_count(std::int64_t T_padded) {
  return floor_log2(next_pow2(T_padded)) + 1;
}

namespace {

// The only party in the binary simulation that knows the side. Each query
// returns x^(side) plus the queried node's keyed noise vector; the query
// budget is the number of tree levels.
class GaussOracle {
 public:
  GaussOracle(std::uint64_t mech_seed, const NoiseKind& noise, int d,
              std::int64_t max_queries, Side side)
      : seed_(mech_seed), noise_(noise), d_(d), max_queries_(max_queries),
        side_(side) {}

  void set_challenge(const Record& xL, const Record& xR) {
    x_ = side_ == Side::kL ? xL : xR;
  }

  std::vector<double> query(Interval node) {
    if (++queries_ > max_queries_)
      throw ProtocolViolationError("challenge oracle query budget exceeded");
    std::vector<double> v = tree_node_noise(seed_, noise_, d_, node);
    for (int j = 0; j < d_; ++j)
      v[j] = static_cast<double>(x_[j]) + v[j];
    return v;
  }

  std::int64_t queries() const { return queries_; }

 private:
  std::uint64_t seed_;
  NoiseKind noise_;
  int d_;
  std::int64_t max_queries_;
  Side side_;
  Record x_;
  std::int64_t queries_ = 0;
};

}  // namespace

View run_binary_simulation(const TreeParams& params, Adversary& adversary,
                           Side side, std::uint64_t mech_seed,
                           std::uint64_t adv_seed) {
  if (params.d != adversary.dim())
    throw ArgumentError("simulation and adversary disagree on d");
  if (params.T < adversary.horizon())
    throw ArgumentError("simulation horizon shorter than the adversary's");

  // The simulator's own tree state: at the challenge timestep it accumulates
  // a zero record, so its node sums exclude the challenge record everywhere.
  TreeState sim = tree_init(params.T, params.d, params.budget, params.variant,
                            mech_seed, params.noise_override);
  GaussOracle oracle(mech_seed, sim.noise, sim.d, sim.levels, side);

  Rng rng(adv_seed);
  View view;
  view.adversary_seed = adv_seed;
  std::int64_t t_star = 0;
  const Record zero(static_cast<std::size_t>(sim.d), 0);
  const std::int64_t T = adversary.horizon();
  for (std::int64_t t = 1; t <= T; ++t) {
    AdversaryMove move = adversary.next(view.answers, rng);
    const Record* fed = &zero;
    if (move.kind == AdversaryMove::Kind::kChallenge) {
      if (t_star != 0)
        throw ProtocolViolationError("second challenge at t=" + std::to_string(t));
      t_star = t;
      validate_record(move.xL, sim.d);
      validate_record(move.xR, sim.d);
      oracle.set_challenge(move.xL, move.xR);
    } else {
      validate_record(move.x, sim.d);
      fed = &move.x;
    }

    ++sim.t;
    add_record(sim.live_sums, *fed);
    for (ColumnSums& open : sim.open_sums) add_record(open, *fed);
    for (Interval node : nodes_completed_at(sim.t, sim.T_padded)) {
      const int h = floor_log2(node.hi - node.lo + 1);
      std::vector<double> value;
      if (t_star != 0 && node.lo <= t_star && t_star <= node.hi) {
        // Challenge-containing nodes complete bottom-up, so this is the
        // oracle's next response in completion order.
        value = oracle.query(node);
        for (int j = 0; j < sim.d; ++j)
          value[j] = static_cast<double>(sim.open_sums[h][j]) + value[j];
      } else {
        value = tree_node_noise(sim.seed, sim.noise, sim.d, node);
        for (int j = 0; j < sim.d; ++j)
          value[j] = static_cast<double>(sim.open_sums[h][j]) + value[j];
      }
      sim.nodes.emplace(node, std::move(value));
      std::fill(sim.open_sums[h].begin(), sim.open_sums[h].end(), 0);
    }

    view.moves.push_back(std::move(move));
    view.answers.push_back(answer_from_sum(tree_current_sum(sim), sim.variant));
  }
  if (t_star == 0)
    throw ProtocolViolationError("game ended without a challenge");
  return view;
}

namespace {

// The only party in the recompute simulation that knows the side. Each
// query evaluates the target on y^(side) with the stage-keyed noise; at
// most m queries.
class CompOracle {
 public:
  CompOracle(std::uint64_t mech_seed, const RecomputeState& proto, Side side)
      : seed_(mech_seed), noise_(proto.noise), eps_prime_(proto.eps_prime),
        select_noiseless_(proto.select_noiseless), kind_(proto.target.kind),
        max_queries_(proto.m), side_(side) {}

  double query(std::int64_t k, const std::vector<Record>& yL,
               const std::vector<Record>& yR) {
    if (++queries_ > max_queries_)
      throw ProtocolViolationError("recompute oracle query budget exceeded");
    const std::vector<Record>& y = side_ == Side::kL ? yL : yR;
    ColumnSums sums = column_sums(StreamPrefix{y});
    if (kind_ == RecomputeTarget::Kind::kSelect) {
      Rng rng = stage_rng(seed_, k);
      return static_cast<double>(exponential_select(
          sums,
          select_noiseless_ ? std::nullopt : std::optional<double>(eps_prime_),
          rng));
    }
    return static_cast<double>(max_sum(sums)) + stage_noise(seed_, noise_, k);
  }

 private:
  std::uint64_t seed_;
  NoiseKind noise_;
  double eps_prime_;
  bool select_noiseless_;
  RecomputeTarget::Kind kind_;
  std::int64_t max_queries_;
  Side side_;
  std::int64_t queries_ = 0;
};

}  // namespace

View run_recompute_simulation(const RecomputeParams& params,
                              Adversary& adversary, Side side,
                              std::uint64_t mech_seed, std::uint64_t adv_seed) {
  if (params.d != adversary.dim())
    throw ArgumentError("simulation and adversary disagree on d");
  if (params.T < adversary.horizon())
    throw ArgumentError("simulation horizon shorter than the adversary's");

  const RecomputeTarget target = params.variant == Variant::kSelect
                                     ? RecomputeTarget::Select()
                                     : RecomputeTarget::MaxSum();
  // Before the challenge the simulator IS the mechanism (shared stage keys);
  // afterwards it only tracks the two neighboring datasets and delegates
  // every recomputation to the oracle.
  RecomputeState sim = recompute_init(params.T, params.r, params.d,
                                      params.budget, target, mech_seed,
                                      params.noise_override);
  CompOracle oracle(mech_seed, sim, side);

  Rng rng(adv_seed);
  View view;
  view.adversary_seed = adv_seed;
  std::int64_t t_star = 0;
  std::vector<Record> seen;  // records before the challenge
  std::vector<Record> yL, yR;
  double cached = 0;
  std::int64_t k = 0;
  const std::int64_t T = adversary.horizon();
  for (std::int64_t t = 1; t <= T; ++t) {
    AdversaryMove move = adversary.next(view.answers, rng);
    if (move.kind == AdversaryMove::Kind::kChallenge) {
      if (t_star != 0)
        throw ProtocolViolationError("second challenge at t=" + std::to_string(t));
      t_star = t;
      validate_record(move.xL, params.d);
      validate_record(move.xR, params.d);
      yL = seen;
      yL.push_back(move.xL);
      yR = seen;
      yR.push_back(move.xR);
    } else {
      validate_record(move.x, params.d);
      if (t_star == 0) {
        seen.push_back(move.x);
      } else {
        yL.push_back(move.x);
        yR.push_back(move.x);
      }
    }

    if (t_star == 0) {
      cached = recompute_step(sim, move.x);
      k = sim.k;
    } else if (is_recompute_step(t, params.r, sim.m)) {
      ++k;
      cached = oracle.query(k, yL, yR);
    }

    view.moves.push_back(std::move(move));
    view.answers.push_back(cached);
  }
  if (t_star == 0)
    throw ProtocolViolationError("game ended without a challenge");
  return view;
}

GuessRule last_answer_threshold(double tau) {
  return [tau](const View& view) {
    return !view.answers.empty() && view.answers.back() >= tau ? Side::kR
                                                               : Side::kL;
  };
}

GuessRule nearest_template(std::vector<double> template_L,
                           std::vector<double> template_R) {
  return [tL = std::move(template_L),
          tR = std::move(template_R)](const View& view) {
    auto dist2 = [&view](const std::vector<double>& tmpl) {
      const std::size_t n = std::min(view.answers.size(), tmpl.size());
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = view.answers[i] - tmpl[i];
        s += diff * diff;
      }
      return s;
    };
    return dist2(tL) <= dist2(tR) ? Side::kL : Side::kR;
  };
}

AdvantageEstimate estimate_advantage(const MechanismFactory& make_mechanism,
                                     const AdversaryFactory& make_adversary,
                                     const GuessRule& guess,
                                     std::int64_t trials,
                                     std::uint64_t master_seed) {
  if (trials < 1) throw ArgumentError("estimate_advantage requires trials >= 1");
  std::vector<std::uint8_t> guessed_L(static_cast<std::size_t>(2 * trials), 0);
  parallel_for(2 * trials, [&](std::int64_t i) {
    const Side side = i < trials ? Side::kL : Side::kR;
    const std::uint64_t mech_seed =
        derive_seed(master_seed, {kKeyTrial, static_cast<std::uint64_t>(i), 0});
    const std::uint64_t adv_seed = derive_seed(
        master_seed, {kKeyTrial, static_cast<std::uint64_t>(i), kKeyAdversary});
    std::unique_ptr<Adversary> adversary = make_adversary();
    const View view = run_game(make_mechanism, *adversary, side, mech_seed, adv_seed);
    guessed_L[static_cast<std::size_t>(i)] = guess(view) == Side::kL ? 1 : 0;
  });

  std::int64_t hits_L = 0, hits_R = 0;
  for (std::int64_t i = 0; i < trials; ++i) hits_L += guessed_L[i];
  for (std::int64_t i = trials; i < 2 * trials; ++i) hits_R += guessed_L[i];
  const double n = static_cast<double>(trials);
  const double pL = static_cast<double>(hits_L) / n;
  const double pR = static_cast<double>(hits_R) / n;

  AdvantageEstimate est;
  est.advantage = std::abs(pL - pR);
  est.stderr_ = std::sqrt(pL * (1 - pL) / n + pR * (1 - pR) / n);
  est.trials_per_side = trials;
  est.small_sample = trials < 100;
  return est;
}

ScriptedAdversary::ScriptedAdversary(std::vector<Record> records,
                                     std::int64_t t_star, Record xL, Record xR)
    : records_(std::move(records)), t_star_(t_star), xL_(std::move(xL)),
      xR_(std::move(xR)) {
  if (records_.empty()) throw ArgumentError("scripted adversary needs records");
  if (t_star_ < 1 || t_star_ > static_cast<std::int64_t>(records_.size()))
    throw ArgumentError("challenge timestep outside [1, T]");
  const int d = static_cast<int>(records_.front().size());
  for (const Record& x : records_) validate_record(x, d);
  validate_record(xL_, d);
  validate_record(xR_, d);
}

std::int64_t ScriptedAdversary::horizon() const {
  return static_cast<std::int64_t>(records_.size());
}

int ScriptedAdversary::dim() const {
  return static_cast<int>(records_.front().size());
}

AdversaryMove ScriptedAdversary::next(const std::vector<double>& answers,
                                      Rng& rng) {
  (void)rng;
  const std::int64_t t = static_cast<std::int64_t>(answers.size()) + 1;
  if (t > horizon()) throw ProtocolViolationError("scripted adversary past T");
  if (t == t_star_) return AdversaryMove::Challenge(xL_, xR_);
  return AdversaryMove::Regular(records_[static_cast<std::size_t>(t - 1)]);
}

RandomAdaptiveAdversary::RandomAdaptiveAdversary(std::int64_t T, int d)
    : T_(T), d_(d) {
  if (T < 1) throw ArgumentError("adversary horizon must be >= 1");
  if (d < 1) throw ArgumentError("adversary dimension must be >= 1");
}

AdversaryMove RandomAdaptiveAdversary::next(const std::vector<double>& answers,
                                            Rng& rng) {
  const std::int64_t t = static_cast<std::int64_t>(answers.size()) + 1;
  if (t == 1)
    t_star_ = 1 + static_cast<std::int64_t>(rng.next_u64() %
                                            static_cast<std::uint64_t>(T_));
  // Folding the previous answer's bits into the draw makes the move sequence
  // depend on the mechanism's outputs, not just on the seed.
  const std::uint64_t fold =
      answers.empty() ? 0 : std::bit_cast<std::uint64_t>(answers.back());
  Rng step(mix64(rng.next_u64() ^ mix64(fold)));
  auto draw = [this, &step] {
    Record x(static_cast<std::size_t>(d_));
    std::uint64_t w = 0;
    for (int j = 0; j < d_; ++j) {
      if (j % 64 == 0) w = step.next_u64();
      x[static_cast<std::size_t>(j)] = static_cast<Bit>((w >> (j % 64)) & 1);
    }
    return x;
  };
  if (t != t_star_) return AdversaryMove::Regular(draw());
  Record xL = draw();
  Record xR = draw();
  if (xL == xR)
    xR[step.next_u64() % static_cast<std::uint64_t>(d_)] ^= 1;
  return AdversaryMove::Challenge(std::move(xL), std::move(xR));
}

}  // namespace contdp
