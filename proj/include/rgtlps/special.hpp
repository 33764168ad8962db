#pragma once

namespace rgtlps {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) by continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

}  // namespace rgtlps
