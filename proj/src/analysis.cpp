#include "deltom/analysis.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "deltom/errors.hpp"
#include "deltom/rng.hpp"

namespace deltom {

void RegimeParams::validate() const {
  if (q < 0.0 || q > 1.0) throw DomainError("q must be in [0,1]");
  if (steps < 1) throw DomainError("K must be at least 1");
  if (traces < 1) throw DomainError("N must be at least 1");
  if (answers < 2) throw DomainError("L must be at least 2");
  if (trials < 1) throw DomainError("trials must be at least 1");
}

double pbm_success(double q, int steps, int traces) {
  if (q < 0.0 || q > 1.0) throw DomainError("q must be in [0,1]");
  if (steps < 1 || traces < 1) throw DomainError("K and N must be at least 1");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  const double log_good = static_cast<double>(steps) * std::log(q);  // log q^K
  const double good = std::exp(log_good);
  if (good >= 1.0) return 1.0;
  // 1 - (1 - p)^N = -expm1(N * log1p(-p))
  return -std::expm1(static_cast<double>(traces) * std::log1p(-good));
}

namespace {

double binomial_stderr(double p, int n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

RegimeResult majority_success(const RegimeParams& params) {
  params.validate();
  const double p_good = std::pow(params.q, params.steps);

  long long pbm_hits = 0;
  long long maj_hits = 0;
  std::vector<int> votes(static_cast<std::size_t>(params.answers - 1));

  for (int trial = 0; trial < params.trials; ++trial) {
    Rng rng(derive_seed(params.seed, {fnv1a64("deltom.analysis"),
                                      static_cast<std::uint64_t>(trial)}));
    int good = 0;
    for (int i = 0; i < params.traces; ++i) {
      if (rng.bernoulli(p_good)) ++good;
    }
    std::fill(votes.begin(), votes.end(), 0);
    const int bad = params.traces - good;
    for (int i = 0; i < bad; ++i) {
      ++votes[rng.index(votes.size())];
    }
    int worst = 0;
    for (int v : votes) worst = std::max(worst, v);

    if (good >= 1) {
      ++pbm_hits;
      if (good > worst) ++maj_hits;
    }
  }

  RegimeResult res;
  res.params = params;
  res.a_pbm_closed = pbm_success(params.q, params.steps, params.traces);
  res.a_pbm_mc = static_cast<double>(pbm_hits) / params.trials;
  res.a_pbm_stderr = binomial_stderr(res.a_pbm_mc, params.trials);
  res.a_maj_mc = static_cast<double>(maj_hits) / params.trials;
  res.a_maj_stderr = binomial_stderr(res.a_maj_mc, params.trials);
  return res;
}

std::vector<RegimeResult> sweep(const std::vector<RegimeParams>& grid) {
  if (grid.empty()) throw DomainError("empty sweep grid");
  std::vector<RegimeResult> results;
  results.reserve(grid.size());
  for (const RegimeParams& params : grid) {
    RegimeResult res = majority_success(params);
    if (res.a_maj_mc > res.a_pbm_mc + 3.0 * res.a_maj_stderr) {
      std::ostringstream os;
      os << "majority success " << res.a_maj_mc << " exceeds verifier success "
         << res.a_pbm_mc << " at q=" << params.q << " K=" << params.steps
         << " N=" << params.traces << " L=" << params.answers;
      throw DominanceViolation(os.str());
    }
    results.push_back(res);
  }
  return results;
}

void write_sweep_csv(const std::vector<RegimeResult>& results, std::ostream& out) {
  out << "q,K,N,L,trials,a_pbm_closed,a_pbm_mc,a_pbm_stderr,a_maj_mc,a_maj_stderr\n";
  for (const RegimeResult& r : results) {
    out << r.params.q << "," << r.params.steps << "," << r.params.traces << ","
        << r.params.answers << "," << r.params.trials << "," << r.a_pbm_closed << ","
        << r.a_pbm_mc << "," << r.a_pbm_stderr << "," << r.a_maj_mc << ","
        << r.a_maj_stderr << "\n";
  }
}

std::vector<RegimeParams> default_grid(int trials, std::uint64_t seed) {
  std::vector<RegimeParams> grid;
  for (double q : {0.5, 0.7, 0.9}) {
    for (int steps : {1, 4, 16}) {
      for (int traces : {4, 64, 1024}) {
        RegimeParams p;
        p.q = q;
        p.steps = steps;
        p.traces = traces;
        p.answers = 5;
        p.trials = trials;
        p.seed = derive_seed(seed, {fnv1a64("grid"), static_cast<std::uint64_t>(grid.size())});
        grid.push_back(p);
      }
    }
  }
  return grid;
}

}  // namespace deltom
