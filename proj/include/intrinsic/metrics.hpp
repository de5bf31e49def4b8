// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include "intrinsic/decompose.hpp"
#include "intrinsic/image_io.hpp"
#include "intrinsic/tensor.hpp"

namespace intrinsic {

struct WhdrReport {
    double whdr = 0.0;
    double total_weight = 0.0;
    double disagreement_weight = 0.0;
    double delta = 0.0;
    int n_comparisons = 0;
};

/// Weighted human disagreement rate. Lightness is the channel mean of
/// the reflectance at each judged point; a comparison predicts "2"
/// (point2 darker) when L1/L2 > 1+delta, "1" when L2/L1 > 1+delta and
/// "E" otherwise. Lightness is floored at kDefaultDivisionFloor so
/// black pixels yield finite ratios.
WhdrReport whdr(const ImageTensor& r, const JudgmentSet& judgments, double delta = 0.10);

/// The four energy terms, separately evaluable:
///   data  = ||R*S - I||_2^2
///   tv    = alpha * ||TV(S - S')||_1 (tv_isotropic discretization)
///   l0    = beta * #pixels with pooled periodic gradient magnitude > 1e-9
///   scale = gamma * ||S - S0||_2^2
struct EnergyTerms {
    double data = 0.0;
    double tv = 0.0;
    double l0 = 0.0;
    double scale = 0.0;
    double total() const { return data + tv + l0 + scale; }
};

EnergyTerms energy_terms(const ImageTensor& i, const ImageTensor& r, const ImageTensor& s,
                         const ImageTensor& s_prior, const SolverParams& p);

/// Ensemble energy: sum of the four terms above.
double energy(const ImageTensor& i, const ImageTensor& r, const ImageTensor& s,
              const ImageTensor& s_prior, const SolverParams& p);

/// ||I - R*S||_2^2 summed over all elements.
double reconstruction_error(const ImageTensor& i, const ImageTensor& r, const ImageTensor& s);

}  // namespace intrinsic
