#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace aoisched {

// Thrown when a configuration value violates a model constraint.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation is asked to run on an instance whose cost would
// explode (exhaustive enumeration, dense kernels, ...).
struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Physical and problem parameters of the two-client downlink.
//
// rho is the linear transmission SNR (transmit power over noise variance,
// before path loss). Distances are normalized to the reference distance;
// client 1 is the near user, so d1 < d2. Both clients share the target rate.
// Transmit power is quantized into n_levels equal steps, and all
// finite-state computations truncate both ages at m_trunc.
struct SystemConfig {
  double rho = 63.095734448019364;  // 18 dB
  double d1 = 2.0;
  double d2 = 4.0;
  double tau = 2.0;
  double rate = 1.0;
  int n_levels = 10;
  double w1 = 0.5;
  double w2 = 0.5;
  int m_trunc = 100;

  void validate() const {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive and finite");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(rate > 0.0)) throw ConfigError("rate must be positive");
    if (n_levels < 2) throw ConfigError("n_levels must be at least 2");
    if (m_trunc < 2) throw ConfigError("m_trunc must be at least 2");
    if (!(d1 > 0.0)) throw ConfigError("d1 must be positive");
    if (!(d1 < d2)) throw ConfigError("client 1 must be the near user: require d1 < d2");
    if (!(w1 > 0.0) || !(w2 > 0.0)) throw ConfigError("weights must be positive");
    if (std::abs(w1 + w2 - 1.0) > 1e-12) throw ConfigError("weights must satisfy w1 + w2 = 1");
  }
};

// dB -> linear conversion; kept at the interface boundary so that all core
// formulas see the linear SNR rho directly.
inline double linear_from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace aoisched
