// Trains one quantum boosting run on MAJ3 and prints the per-round trace.
#include <cstdio>

#include "qboost/qboost.hpp"

int main() {
  using namespace qboost;
  const auto s = full_domain(Concept::majority_of_first(3, 3));
  WeakLearnerSpec learner;
  learner.Q = 4;
  QuantumBoostOptions opt;
  opt.mode = OracleMode::qsim;
  DefaultRng rng(1);
  const auto run = run_quantum_boost(s, learner, 40, opt, rng);
  for (const auto& r : run.rounds)
    std::printf("t=%2d %-3s eps~=%.6f sum=%.9f train_err=%.3f\n", r.t, to_string(r.branch), r.eps_tilde,
                r.sum_Dtilde, r.train_err);
  std::printf("training error %.3f, total queries %llu\n", training_error(run.ensemble, s),
              static_cast<unsigned long long>(run.ledger.total()));
}
