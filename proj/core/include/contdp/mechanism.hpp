#pragma once

#include <cstdint>
#include <memory>

#include "contdp/stream.hpp"

namespace contdp {

// Streaming interface shared by every mechanism: consume one record, publish
// one answer. Select-variant answers are 1-based indices carried as doubles.
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  virtual double step(const Record& x) = 0;
  virtual std::int64_t horizon() const = 0;
  virtual int dim() const = 0;
  virtual Variant variant() const = 0;
};

// Publishes 0 (maxsum) or index 1 (select) and never reads the data. Used
// when the optimal-period search lands in the trivial regime, and as the
// null model in privacy-advantage checks.
class TrivialMechanism final : public Mechanism {
 public:
  TrivialMechanism(std::int64_t T, int d, Variant variant);

  double step(const Record& x) override;
  std::int64_t horizon() const override { return T_; }
  int dim() const override { return d_; }
  Variant variant() const override { return variant_; }

 private:
  std::int64_t T_;
  int d_;
  Variant variant_;
  std::int64_t t_ = 0;
};

}  // namespace contdp
