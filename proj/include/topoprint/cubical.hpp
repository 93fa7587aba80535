#pragma once

#include <vector>

#include "topoprint/core.hpp"

namespace topo {

using IntensityImage = Matrix;

/// One persistence interval. Convention follows superlevel-set sweeps, so
/// birth > death for finite bars; essential classes carry death = -infinity.
struct Bar {
    double birth;
    double death;

    bool operator==(const Bar&) const = default;
};

struct Barcode {
    std::vector<Bar> dim0;
    std::vector<Bar> dim1;
};

/// Integer-valued curve sampled at the midpoints x_r = lo + (r + 1/2)
/// (hi - lo) / R of a uniform grid over [lo, hi].
struct BettiCurve {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<int> samples;

    bool operator==(const BettiCurve&) const = default;
};

/// Persistent homology (dimensions 0 and 1, F2 coefficients) of the
/// superlevel-set filtration of the vertex-built cubical complex on a 2D
/// image: a cube is present at level s iff all of its pixels are >= s.
Barcode upper_star_persistence(const IntensityImage& img);

/// Count, at each grid midpoint x, the bars with death < x <= birth.
BettiCurve betti_curve(const Barcode& bc, int dim, double lo, double hi, int resolution);

/// Riemann-sum L1 distance ((hi-lo)/R) * sum_r |a_r - b_r|. The two curves
/// must share grid domain and resolution.
double betti_l1(const BettiCurve& a, const BettiCurve& b);

} // namespace topo
