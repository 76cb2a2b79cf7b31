#pragma once

#include <cmath>
#include <sstream>

#include "cemimo/types.hpp"

namespace cemimo {

/// Power interval (dB) with rate(lo) < target <= rate(hi).
struct Bracket {
  double lo_db = 0;
  double hi_db = 0;
  double rate_lo = 0;
  double rate_hi = 0;
};

struct PowerSearchResult {
  double power_db = 0;
  double rate = 0;
  int probes = 0;
};

/// Grows [lo, hi] outward in `step` dB increments until it brackets the
/// target. Fails once the interval would exceed `max_span` dB.
template <typename RateFn>
Bracket expand_bracket(const RateFn& rate, double target, double lo, double hi, double step, double max_span) {
  Bracket b{lo, hi, rate(lo), rate(hi)};
  while (b.rate_lo >= target || b.rate_hi < target) {
    if (b.hi_db - b.lo_db + step > max_span + 1e-9) {
      std::ostringstream msg;
      msg << "could not bracket target rate " << target << " within " << max_span << " dB: rate("
          << b.lo_db << " dB) = " << b.rate_lo << ", rate(" << b.hi_db << " dB) = " << b.rate_hi;
      throw Error("bracket_expansion_failed", msg.str());
    }
    if (b.rate_lo >= target) {
      b.lo_db -= step;
      b.rate_lo = rate(b.lo_db);
    } else {
      b.hi_db += step;
      b.rate_hi = rate(b.hi_db);
    }
  }
  return b;
}

/// Checks that a fixed interval brackets the target.
template <typename RateFn>
Bracket fixed_bracket(const RateFn& rate, double target, double lo, double hi) {
  Bracket b{lo, hi, rate(lo), rate(hi)};
  if (b.rate_hi < target || b.rate_lo >= target) {
    std::ostringstream msg;
    msg << "target rate " << target << " is not bracketed by [" << lo << ", " << hi << "] dB: rate(" << lo
        << " dB) = " << b.rate_lo << ", rate(" << hi << " dB) = " << b.rate_hi;
    throw Error("unreachable_target", msg.str());
  }
  return b;
}

/// Bisection on a nondecreasing rate curve. Stops when a probe lands within
/// `rate_tol` of the target (ignored when zero) or the interval is narrower
/// than `width_db`; in the latter case the endpoint closer to the target
/// is returned.
template <typename RateFn>
PowerSearchResult bisect_min_power(const RateFn& rate, double target, Bracket b, double rate_tol,
                                   double width_db) {
  PowerSearchResult out;
  while (b.hi_db - b.lo_db > width_db) {
    const double mid = 0.5 * (b.lo_db + b.hi_db);
    const double r = rate(mid);
    ++out.probes;
    if (rate_tol > 0 && std::abs(r - target) <= rate_tol) {
      out.power_db = mid;
      out.rate = r;
      return out;
    }
    if (r < target) {
      b.lo_db = mid;
      b.rate_lo = r;
    } else {
      b.hi_db = mid;
      b.rate_hi = r;
    }
  }
  const bool take_hi = std::abs(b.rate_hi - target) <= std::abs(target - b.rate_lo);
  out.power_db = take_hi ? b.hi_db : b.lo_db;
  out.rate = take_hi ? b.rate_hi : b.rate_lo;
  return out;
}

}  // namespace cemimo
