#pragma once

namespace ymir::ensemble {

/// I_x(a, b), evaluated by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// x with I_x(a, b) = p, Newton iteration on log x inside a shrinking bracket.
double inverse_regularized_incomplete_beta(double a, double b, double p);

double student_t_cdf(double t, double dof);

/// Quantile of Student's t with `dof` degrees of freedom, p in (0, 1).
/// Accurate to well below 1e-8 absolute for the ranges the ESD test uses.
double student_t_quantile(double p, double dof);

}  // namespace ymir::ensemble
