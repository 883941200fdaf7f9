#pragma once

#include "kinklab/grid.hpp"

#include <functional>

namespace kinklab {

double l2_norm(const LatticeSeq& a);
/// sqrt(sum_n <n>^4 a_n^2) with n the absolute site index.
double l2_weighted_norm(const LatticeSeq& a);

/// sqrt(sum_{j<=k} ||d^j f||^2_{L^2}) with spectral derivatives and periodic quadrature.
double sobolev_norm(const GridFunction& f, int k);
/// sobolev_norm of f(x) <x>^n_w.
double weighted_sobolev_norm(const GridFunction& f, int k, int n_w);

/// max|f| + ||f'||_{H^{k-1}}; f may tend to distinct constants at the window ends.
double xk_norm(const GridFunction& f, int k);

/// ||f||_{X^k_{n+}} + ||f||_{X^k_{n-}}. Throws TailMismatch when f misses its limits at
/// the window ends by more than tail_tol.
double weighted_xk_norm(const GridFunction& f, int k, int n_w, double f_plus, double f_minus,
                        double tail_tol = 1e-8);

LatticeSeq sample_to_lattice(const std::function<double(double)>& f, double eps, long n_min,
                             long n_max);

/// b_n = sum_{k <= n} a_k starting at the window's left edge. Throws SumMismatch unless
/// |sum a| <= rel_tol * ||a||_{l^2_2}.
LatticeSeq partial_sums(const LatticeSeq& a, double rel_tol = 1e-10);

/// Sharp constant C with ||b||_{l^2} <= C ||a||_{l^2_2} for zero-sum a supported in
/// [n_min, n_max]: C^2 = sum_n min(sum_{k<=n} <k>^{-4}, sum_{k>n} <k>^{-4}).
double partial_sum_constant(long n_min, long n_max);

} // namespace kinklab
