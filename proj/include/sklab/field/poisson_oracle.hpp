#pragma once

namespace sklab::field {

// Independent evaluation route for the universal extension: convolution of
// the half-space Poisson kernel P(z, t) = t / (2 pi (|z|^2 + t^2)^{3/2})
// with the periodized bump, written as cell mean plus a lattice sum of
// adaptively integrated zero-mean cell contributions. Slow; test oracle
// for the Fourier-mode route.
double poisson_phi_p(double u, double v, double s, int lattice_radius = 32,
                     double cell_tol = 1e-9);

}  // namespace sklab::field
