#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contdp/mechanism.hpp"
#include "contdp/noise.hpp"
#include "contdp/recompute.hpp"
#include "contdp/stream.hpp"
#include "contdp/tree.hpp"

namespace contdp {

// Which of the two challenge records the game actually feeds the mechanism.
// Hidden from the adversary and from the simulator.
enum class Side { kL, kR };

struct AdversaryMove {
  enum class Kind { kRegular, kChallenge };

  Kind kind = Kind::kRegular;
  Record x;        // kRegular
  Record xL, xR;   // kChallenge

  static AdversaryMove Regular(Record x);
  static AdversaryMove Challenge(Record xL, Record xR);

  bool operator==(const AdversaryMove&) const = default;
};

// Everything the adversary sees: its own randomness and, per timestep, the
// move it sent (the challenge entry holds both candidates, not the pick)
// and the answer it received. Equality is exact, including answer bits.
struct View {
  std::uint64_t adversary_seed = 0;
  std::vector<AdversaryMove> moves;
  std::vector<double> answers;

  bool operator==(const View&) const = default;
};

// Line-per-timestep serialization, byte-stable:
//   t,move_kind,payload,answer
// move_kind is `regular` or `challenge`; payload is the record's bits as a
// 0/1 string, or `bitsL|bitsR` for the challenge; answer uses the shortest
// round-trip decimal form.
std::string serialize_view(const View& view);

// Adaptive record source. next() must be deterministic given the rng's seed
// and the answer history; implementations must not keep hidden state that
// survives across games.
class Adversary {
 public:
  virtual ~Adversary() = default;

  virtual std::int64_t horizon() const = 0;
  virtual int dim() const = 0;
  virtual AdversaryMove next(const std::vector<double>& answers, Rng& rng) = 0;
};

using MechanismFactory =
    std::function<std::unique_ptr<Mechanism>(std::uint64_t seed)>;
using AdversaryFactory = std::function<std::unique_ptr<Adversary>()>;

// Plays the T-round game: forwards regular records to the mechanism, feeds
// x^(side) at the challenge, collects the View. Exactly one challenge must
// occur or the game aborts with ProtocolViolationError.
View run_game(const MechanismFactory& make_mechanism, Adversary& adversary,
              Side side, std::uint64_t mech_seed, std::uint64_t adv_seed);

// Tree-mechanism parameters shared verbatim between run_game and the
// simulator so coupled runs are parameterized identically.
struct TreeParams {
  std::int64_t T = 0;
  int d = 0;
  PrivacyBudget budget;
  Variant variant = Variant::kSelect;
  std::optional<NoiseKind> noise_override;

  MechanismFactory factory() const;
};

struct RecomputeParams {
  std::int64_t T = 0;
  std::int64_t r = 0;
  int d = 0;
  PrivacyBudget budget;
  Variant variant = Variant::kMaxSum;
  std::optional<NoiseKind> noise_override;

  MechanismFactory factory() const;
};

// Simulator for the tree mechanism's privacy argument. It never learns the
// side: nodes not containing the challenge timestep get locally drawn keyed
// noise, and the value of each challenge-containing node is completed from
// one response of an oracle that knows the side (response = x^(side) plus
// the node-keyed noise vector). Exactly floor(log2 T_padded)+1 responses
// are consumed; one more query throws ProtocolViolationError. Under equal
// seeds the returned View is bit-identical to run_game's.
View run_binary_simulation(const TreeParams& params, Adversary& adversary,
                           Side side, std::uint64_t mech_seed,
                           std::uint64_t adv_seed);

// Number of oracle queries the last run_binary_simulation-style run would
// issue for a challenge at t_star: always floor(log2 T_padded)+1.
std::int64_t challenge_node_count(std::int64_t T_padded);

// Simulator for the recompute mechanism's privacy argument. Before the
// challenge it runs the mechanism verbatim (shared stage-noise keys); from
// the challenge on, every recomputation is answered by an oracle that holds
// the two neighboring datasets and evaluates the target on y^(side) with
// the stage-keyed noise. At most m oracle queries; more throw
// ProtocolViolationError. Under equal seeds the View is bit-identical to
// run_game's.
View run_recompute_simulation(const RecomputeParams& params,
                              Adversary& adversary, Side side,
                              std::uint64_t mech_seed, std::uint64_t adv_seed);

// Maps a completed View to a guess of the hidden side.
using GuessRule = std::function<Side(const View&)>;

// Guess kR when the last answer is >= tau, else kL. For select variants the
// answer is the published index.
GuessRule last_answer_threshold(double tau);

// Guess the side whose template answer sequence is closer in L2. Templates
// shorter than the run are compared on their common prefix.
GuessRule nearest_template(std::vector<double> template_L,
                           std::vector<double> template_R);

struct AdvantageEstimate {
  double advantage = 0;   // |P(guess=L | side=L) - P(guess=L | side=R)|
  double stderr_ = 0;     // binomial, sqrt(pL(1-pL)/N + pR(1-pR)/N)
  std::int64_t trials_per_side = 0;
  bool small_sample = false;  // trials < 100: estimate unreliable
};

// Plays `trials` independent games per side with seed-derived randomness and
// applies the guess rule. Trials run in parallel; the estimate does not
// depend on the schedule.
AdvantageEstimate estimate_advantage(const MechanismFactory& make_mechanism,
                                     const AdversaryFactory& make_adversary,
                                     const GuessRule& guess,
                                     std::int64_t trials,
                                     std::uint64_t master_seed);

// Fully scripted adversary: fixed records, one challenge at t_star with the
// given pair. With xL == xR it is nonadaptive in the strict sense and
// run_game degenerates to a plain stream run.
class ScriptedAdversary final : public Adversary {
 public:
  ScriptedAdversary(std::vector<Record> records, std::int64_t t_star,
                    Record xL, Record xR);

  std::int64_t horizon() const override;
  int dim() const override;
  AdversaryMove next(const std::vector<double>& answers, Rng& rng) override;

 private:
  std::vector<Record> records_;
  std::int64_t t_star_;
  Record xL_, xR_;
};

// Randomized adaptive adversary for coupling sweeps: the challenge timestep,
// the challenge pair and every regular record are drawn from the game rng,
// and each record also folds in the bits of the previous answer, so the
// move sequence genuinely depends on the mechanism's outputs.
class RandomAdaptiveAdversary final : public Adversary {
 public:
  RandomAdaptiveAdversary(std::int64_t T, int d);

  std::int64_t horizon() const override { return T_; }
  int dim() const override { return d_; }
  AdversaryMove next(const std::vector<double>& answers, Rng& rng) override;

 private:
  std::int64_t T_;
  int d_;
  std::int64_t t_star_ = 0;  // drawn on the first call
};

}  // namespace contdp
