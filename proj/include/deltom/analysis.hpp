#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace deltom {

struct RegimeParams {
  double q = 0.9;       // per-step correctness probability
  int steps = 4;        // K, belief-updating steps per trajectory
  int traces = 4;       // N, sampled trajectories
  int answers = 5;      // L, candidate answers
  int trials = 10000;   // Monte-Carlo repetitions
  std::uint64_t seed = 0;

  void validate() const;  // throws DomainError
};

struct RegimeResult {
  RegimeParams params;
  double a_pbm_closed = 0.0;
  double a_pbm_mc = 0.0;
  double a_pbm_stderr = 0.0;
  double a_maj_mc = 0.0;
  double a_maj_stderr = 0.0;
};

// Closed-form verifier-selection success 1 - (1 - q^K)^N, evaluated through
// log1p/expm1 so extreme exponents keep their precision.
double pbm_success(double q, int steps, int traces);

// Monte-Carlo estimate of majority-voting success under uniform scattering:
// per trial, G good trajectories out of N (each trajectory good with
// probability q^K), the N - G bad ones voting uniformly over the L - 1 wrong
// answers; success iff G >= 1 and G strictly exceeds every wrong-answer
// count. The verifier-selection indicator {G >= 1} is accumulated from the
// same draws, so a_maj_mc <= a_pbm_mc holds trial by trial. Trials are
// seeded individually (counter-based), so they are order-independent.
RegimeResult majority_success(const RegimeParams& params);

// Runs every grid point and checks the dominance inequality
// a_maj_mc <= a_pbm_mc + 3 * stderr at each one. Throws DominanceViolation
// (an implementation bug, not randomness) when it fails.
std::vector<RegimeResult> sweep(const std::vector<RegimeParams>& grid);

// Fixed-header CSV: q,K,N,L,trials,a_pbm_closed,a_pbm_mc,a_pbm_stderr,
// a_maj_mc,a_maj_stderr.
void write_sweep_csv(const std::vector<RegimeResult>& results, std::ostream& out);

// The default grid: q in {0.5,0.7,0.9} x K in {1,4,16} x N in {4,64,1024},
// L = 5.
std::vector<RegimeParams> default_grid(int trials, std::uint64_t seed);

}  // namespace deltom
