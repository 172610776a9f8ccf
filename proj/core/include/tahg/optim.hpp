#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tahg {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

// Adam over any number of flat parameter blocks. Each block is addressed by a
// stable slot index; moments for a slot are allocated on first use.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Call once per optimization step, before the apply() calls of that step.
  void begin_step() { ++step_; }
  void apply(std::size_t slot, double* param, const double* grad, std::size_t n);

  std::uint64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }

  // Block "ADAMSTA1": u64 step, u64 slots, per slot u64 n, n f64 m, n f64 v.
  void write(std::ostream& out) const;
  static Adam read(std::istream& in, AdamConfig config);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace tahg
