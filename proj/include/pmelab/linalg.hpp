#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pmelab {

using Vec = std::vector<double>;
using LinearOp = std::function<void(const Vec& x, Vec& y)>;

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);

/// Conjugate gradient for a symmetric positive definite operator.
/// `inv_diag`, when nonempty, is used as a Jacobi preconditioner.
/// x holds the initial guess on entry.
CgResult conjugate_gradient(const LinearOp& A, const Vec& b, Vec& x, double rel_tol,
                            int max_iter, const Vec& inv_diag = {});

}  // namespace pmelab
