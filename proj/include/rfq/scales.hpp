#pragma once

#include "rfq/model.hpp"

namespace rfq::free {

/// N(beta) = -(2 K beta / m)^{1/3}, odd in beta (real cube root branch).
inline double n_beta(const ModelParams& params, double beta) {
  return -cbrt_odd(2.0 * params.K() * beta / params.m());
}

/// p0(beta) = -beta / (2 K m lambda) = -beta * hbar_eff.
inline double p0_beta(const ModelParams& params, double beta) {
  return -beta / (2.0 * params.K() * params.m() * params.lambda());
}

/// Argument of the Airy factor of the Fourier mode e^{-i beta x} at momentum p.
/// The mode equation g'' = (2 K beta / m)(beta / (2 K m lambda) - i p) g is
/// solved by Ai(-N(beta)(p0 + i p)); the opposite sign gives g'' = -(...) g.
inline complex mode_argument(const ModelParams& params, double beta, double p) {
  return -n_beta(params, beta) * complex(p0_beta(params, beta), p);
}

}  // namespace rfq::free
