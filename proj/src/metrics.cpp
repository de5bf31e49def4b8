// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "intrinsic/errors.hpp"

namespace intrinsic {

namespace {

double lightness(const ImageTensor& r, int row, int col) {
    double acc = 0.0;
    for (int c = 0; c < r.channels(); ++c) acc += r.at(c, row, col);
    return acc / r.channels();
}

char predict(double l1, double l2, double delta) {
    const double f1 = std::max(l1, kDefaultDivisionFloor);
    const double f2 = std::max(l2, kDefaultDivisionFloor);
    if (f1 / f2 > 1.0 + delta) return '2';
    if (f2 / f1 > 1.0 + delta) return '1';
    return 'E';
}

}  // namespace

WhdrReport whdr(const ImageTensor& r, const JudgmentSet& judgments, double delta) {
    if (!(delta > 0.0)) {
        throw ParamError("whdr: delta must be positive, got " + std::to_string(delta));
    }
    WhdrReport report;
    report.delta = delta;
    report.n_comparisons = static_cast<int>(judgments.comparisons.size());
    for (const Comparison& c : judgments.comparisons) {
        if (c.row1 < 0 || c.row1 >= r.height() || c.col1 < 0 || c.col1 >= r.width() ||
            c.row2 < 0 || c.row2 >= r.height() || c.col2 < 0 || c.col2 >= r.width()) {
            throw IntegrityError("whdr: judgment point outside the image");
        }
        const char predicted =
            predict(lightness(r, c.row1, c.col1), lightness(r, c.row2, c.col2), delta);
        report.total_weight += c.weight;
        if (predicted != c.darker) report.disagreement_weight += c.weight;
    }
    if (!(report.total_weight > 0.0)) {
        throw EvalError("whdr: total judgment weight is zero, metric undefined");
    }
    report.whdr = report.disagreement_weight / report.total_weight;
    return report;
}

EnergyTerms energy_terms(const ImageTensor& i, const ImageTensor& r, const ImageTensor& s,
                         const ImageTensor& s_prior, const SolverParams& p) {
    EnergyTerms terms;

    const ImageTensor reconstruction = hadamard(r, s);
    for (std::size_t k = 0; k < i.size(); ++k) {
        const double d = reconstruction.data()[k] - i.data()[k];
        terms.data += d * d;
    }

    const ImageTensor prior =
        s_prior.channels() == s.channels() ? s_prior : replicate_channels(s_prior, s.channels());
    terms.tv = p.alpha * tv_isotropic(subtract(s, prior));

    // ||grad R||_0 counts pixels whose pooled periodic gradient
    // magnitude exceeds 1e-9; exact zero-counting is meaningless in
    // floating point.
    const GradientPair g = forward_diff(r, Boundary::periodic);
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < r.pixel_count(); ++k) {
        double mag2 = 0.0;
        for (int c = 0; c < r.channels(); ++c) {
            const double dx = g.gx.channel(c)[k];
            const double dy = g.gy.channel(c)[k];
            mag2 += dx * dx + dy * dy;
        }
        if (mag2 > 1e-18) ++nonzero;
    }
    terms.l0 = p.beta * static_cast<double>(nonzero);

    for (double v : s.data()) {
        const double d = v - p.s0;
        terms.scale += d * d;
    }
    terms.scale *= p.gamma;
    return terms;
}

double energy(const ImageTensor& i, const ImageTensor& r, const ImageTensor& s,
              const ImageTensor& s_prior, const SolverParams& p) {
    return energy_terms(i, r, s, s_prior, p).total();
}

double reconstruction_error(const ImageTensor& i, const ImageTensor& r,
                            const ImageTensor& s) {
    const ImageTensor reconstruction = hadamard(r, s);
    double acc = 0.0;
    for (std::size_t k = 0; k < i.size(); ++k) {
        const double d = i.data()[k] - reconstruction.data()[k];
        acc += d * d;
    }
    return acc;
}

}  // namespace intrinsic
