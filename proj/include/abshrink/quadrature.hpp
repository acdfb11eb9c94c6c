#pragma once

// Posterior moments for priors without closed form, by adaptive composite
// Gauss-Legendre quadrature over delta +/- 12 combined standard deviations.
// Point masses at 0 are handled analytically outside the integral.

#include <functional>
#include <vector>

#include "abshrink/prior.hpp"
#include "abshrink/readout.hpp"

namespace abshrink {

struct QuadraturePrior {
    // Continuous part of the prior density; may be unnormalized (moments are
    // ratios), but evidence is only meaningful when it integrates to
    // 1 - point_mass_zero.
    std::function<double(double)> density;
    double point_mass_zero = 0.0;
    // Variance-scale hint used to size the integration window.
    double spread2 = 1.0;
    // Locations where the density is not smooth; panel edges snap to these.
    std::vector<double> breakpoints;
};

struct QuadratureMoments {
    double mean = 0.0;
    double var = 0.0;
    double evidence = 0.0;      // marginal density of delta (linear scale)
    double log_evidence = 0.0;
    int panels = 0;             // panels used at convergence
};

// Panels are doubled until successive estimates agree to 1e-10 relative;
// non-convergence raises NumericError with the residual.
QuadratureMoments posterior_quadrature(const QuadraturePrior& prior, double delta, double se2);

// Normalized density adapter for any PriorModel (Zero handled as pure point mass).
QuadraturePrior quadrature_prior(const PriorModel& prior);

}  // namespace abshrink
