#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "ncfr/errors.hpp"

namespace ncfr {

/// Deterministic random stream backed by a Mersenne twister.
///
/// Every draw constructs its std:: distribution object fresh, so the output
/// sequence is a pure function of the engine state. The engine state
/// serializes losslessly, which is what makes checkpoint/resume bit-exact.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent per-chain stream: the root seed and the chain index are fed
  /// through a seed_seq, so chain c of run (seed) is reproducible in
  /// isolation and chains never share state.
  static Rng chain_stream(std::uint64_t root_seed, std::uint64_t chain_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(root_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(root_seed >> 32),
                      static_cast<std::uint32_t>(chain_index & 0xffffffffu),
                      static_cast<std::uint32_t>(chain_index >> 32)};
    Rng r(0);
    r.engine_.seed(seq);
    return r;
  }

  /// U(0,1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  /// Gamma with the shape/rate convention: mean = shape / rate.
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  /// Inverse-gamma with shape/scale convention: mean = scale / (shape - 1).
  /// Equivalently 1/G where G ~ Gamma(shape, rate = scale).
  double inv_gamma(double shape, double scale) {
    double g = gamma(shape, scale);
    if (g <= 0.0) throw NumericalError("inv_gamma: underflowed gamma draw");
    return 1.0 / g;
  }

  int poisson(double mean) {
    return std::poisson_distribution<int>(mean)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  int index(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(engine_);
  }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (!is) throw IoError("Rng::load_state: malformed engine state");
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ncfr
