#pragma once

#include "hjvisc/core.hpp"

namespace hjvisc {

/// out_j = max_k (u_k - d(x_k, x_j)^2 / (2 delta)), d the periodic distance,
/// by brute force over all k. out >= u holds exactly since k = j is a candidate.
ScalarField sup_convolution(const ScalarField& u, double delta);

/// max_j max(0, lambda u_j + H(x_j, Du_j)) with central differences.
double subsolution_defect(const ScalarField& u_delta, double lambda,
                          const HamiltonianModel& model);

/// min_j (u_{j+1} - 2 u_j + u_{j-1}), periodic.
double min_second_difference(const ScalarField& u);

}  // namespace hjvisc
