// Shapley effects and PME for a small Gaussian linear model, first exactly
// and then from a double Monte Carlo estimate of the total-index table.
#include <iostream>

#include "gsa/gsa.hpp"

int main() {
  using namespace gsa;
  // Y = X1 + X2 with X3 correlated to X1 but absent from the model.
  const GaussianLinearModel model = toycase_model({ToyCase::ExogenousLinear, 0.5});

  const GameTable exact = total_index_table(model);
  std::cout << "exact total indices\n";
  write_value_table(std::cout, exact);

  std::cout << "\nShapley effects\n";
  write_allocation(std::cout, shapley_effects_from_indices(exact));
  std::cout << "\nPME\n";
  write_allocation(std::cout, pme_from_total_indices(exact));

  const GaussianLaw law(model);
  const EstimatedTable est = estimate_all_total_indices(model, law, McBudget{20000, 500, 100, 2024});
  std::cout << "\nPME from a Monte Carlo table (zero threshold 1e-3)\n";
  write_allocation(std::cout, pme_from_total_indices(est.table, 1e-3));
  return 0;
}
