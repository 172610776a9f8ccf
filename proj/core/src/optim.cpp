#include "tahg/optim.hpp"

#include <cmath>

#include "binary_io.hpp"

namespace tahg {

void Adam::apply(std::size_t slot, double* param, const double* grad, std::size_t n) {
  if (slot >= m_.size()) {
    m_.resize(slot + 1);
    v_.resize(slot + 1);
  }
  auto& m = m_[slot];
  auto& v = v_[slot];
  if (m.size() != n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
  const double t = static_cast<double>(step_ == 0 ? 1 : step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i] + config_.weight_decay * param[i];
    m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
    v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

void Adam::write(std::ostream& out) const {
  io::write_magic(out, "ADAMSTA1");
  io::write_u64(out, step_);
  io::write_u64(out, m_.size());
  for (std::size_t s = 0; s < m_.size(); ++s) {
    io::write_u64(out, m_[s].size());
    for (double x : m_[s]) io::write_f64(out, x);
    for (double x : v_[s]) io::write_f64(out, x);
  }
}

Adam Adam::read(std::istream& in, AdamConfig config) {
  io::expect_magic(in, "ADAMSTA1");
  Adam adam(config);
  adam.step_ = io::read_u64(in);
  const auto slots = io::read_u64(in);
  if (slots > (1u << 20)) fail(ErrorCode::BadFormat, "implausible optimizer slot count");
  adam.m_.resize(slots);
  adam.v_.resize(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    const auto n = io::read_u64(in);
    if (n > (1ULL << 32)) fail(ErrorCode::BadFormat, "implausible optimizer block size");
    adam.m_[s].resize(n);
    adam.v_[s].resize(n);
    for (auto& x : adam.m_[s]) x = io::read_f64(in);
    for (auto& x : adam.v_[s]) x = io::read_f64(in);
  }
  return adam;
}

}  // namespace tahg
