#pragma once

#include "kinklab/grid.hpp"

namespace kinklab {

/// Frozen values outside the finite window. Only u_left (site n_min-1) and q_right
/// (site n_max+1) enter the equations; the other two define the background the
/// boundary gauge compares against.
struct Background {
  double u_left = 0.0;
  double u_right = 0.0;
  double q_left = 0.0;
  double q_right = 0.0;
};

/// Strain u and velocity field q on sites n_min..n_max at time t.
struct LatticeState {
  LatticeSeq u;
  LatticeSeq q;
  double t = 0.0;
  Background background;

  long n_min() const { return u.n_min(); }
  long n_max() const { return u.n_max(); }
  std::size_t size() const { return u.size(); }
  /// Throws when the u and q windows differ or values are non-finite.
  void validate() const;
};

} // namespace kinklab
