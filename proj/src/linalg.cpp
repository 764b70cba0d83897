#include "pmelab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pmelab {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

CgResult conjugate_gradient(const LinearOp& A, const Vec& b, Vec& x, double rel_tol,
                            int max_iter, const Vec& inv_diag) {
    const std::size_t n = b.size();
    CgResult res;
    x.resize(n, 0.0);
    double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    Vec r(n), z(n), p(n), q(n);
    A(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    auto precondition = [&](const Vec& in, Vec& out) {
        if (inv_diag.empty()) {
            out = in;
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
        }
    };
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);
    while (rnorm > rel_tol * bnorm && res.iterations < max_iter) {
        A(p, q);
        double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm2(r);
        ++res.iterations;
        if (rnorm <= rel_tol * bnorm) break;
        precondition(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.relative_residual = rnorm / bnorm;
    res.converged = rnorm <= rel_tol * bnorm;
    return res;
}

}  // namespace pmelab
