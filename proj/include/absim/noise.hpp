#pragma once

#include <absim/fock.hpp>
#include <absim/scheme.hpp>
#include <absim/types.hpp>

namespace absim {

/// Pairwise internal-state overlaps of the input photons,
/// S_ij = <psi_i|psi_j>. Hermitian, unit diagonal, PSD.
struct GramMatrix {
  CMatrix s;

  int n() const { return static_cast<int>(s.rows()); }
};

/// Imperfect-source model: partial distinguishability (gram), multiphoton
/// contamination (g2), uniform per-photon survival eta commuted to the
/// source, and per-output-mode detector efficiencies.
struct NoiseModel {
  GramMatrix gram;
  double g2 = 0.0;        // in [0, 1)
  double eta = 1.0;       // in (0, 1]
  RVector detector_eta;   // size m, or empty for unit efficiency

  static NoiseModel ideal(int n_photons);
};

void validate_noise_model(const NoiseModel& model);

/// Pivot-tolerant Cholesky of the Gram matrix: row i is photon i's
/// amplitude vector over at most n orthonormal internal modes, with
/// L L^dag reproducing S to 1e-10.
CMatrix internal_decomposition(const GramMatrix& gram);

/// Weight of the distinguishable-companion branch solved (bisection,
/// tol 1e-10) so a single source with that branch shows autocorrelation g2.
/// The branch model saturates at g2 = 1/2.
double noise_branch_weight(double g2);

/// Predicted two-photon dip visibility at a splitter of the given power
/// reflectivity; equals |s12|^2 at 50:50.
double hom_visibility(cplx s12, double reflectivity);

/// Output distribution of partially distinguishable, lossy photons,
/// summed over the unobserved internal labels. Includes the undetected
/// (lost-photon) sectors, so probabilities total one.
OutputDistribution noisy_output_distribution(const CMatrix& u,
                                             const FockState& input,
                                             const NoiseModel& model);

struct NoisyConditional {
  double probability = 0.0;
  DensityMatrix state;  // generally mixed
};

/// Conditional rail state under the noise model; reduces to
/// conditional_state in the noiseless limit.
NoisyConditional noisy_conditional_state(const AbsScheme& scheme,
                                         const Outcome& outcome,
                                         const NoiseModel& model);

std::vector<DensityMatrix> noisy_conditional_states_all(
    const AbsScheme& scheme, const NoiseModel& model);

}  // namespace absim
