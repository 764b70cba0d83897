#pragma once

#include <string>
#include <vector>

#include "pmelab/solver.hpp"

namespace pmelab {

struct DeGiorgiConstants {
    double alpha;
    double b;
    double lambda;
};

DeGiorgiConstants constants(double m, int n);

struct CylinderParams {
    Point x0{0.0, 0.0, 0.0};
    double t0 = 0.0;
    double rho = 0.5;
    double sigma = 0.5;
    double M = 0.0;
};

struct IterationRow {
    int j = 0;
    double k_j = 0.0;
    double rho_j = 0.0;
    double t_plus = 0.0;  // half-width of the time window
    std::size_t cells = 0;
    double Y = 0.0;
    double A_measure = 0.0;
    double bound = 0.0;   // 4^{-(j+2)} k^2 |A_j|
    double ratio = 0.0;   // Y_j / bound (inf when bound = 0)
    bool est_holds = true;
    double recursion_ratio = 0.0;  // Y_{j+1} / (b^j Y_j^{1+alpha}); 0 on the last row
    double closed_loop_bound = 0.0;
};

struct IterationReport {
    CylinderParams params;
    double k = 0.0;
    double m = 1.0;
    int n = 2;
    double L = 0.0;  // sup of u over Q(rho)
    DeGiorgiConstants c{};
    std::vector<IterationRow> rows;
    double fitted_A = 0.0;
    bool est_all = true;
    bool smallness_met = false;
    bool closed_loop_holds = true;
    bool truncated = false;
    std::string stop_reason;
};

struct IterateOptions {
    int j_max = 20;
    double floor = 1e-14;
};

IterationReport iterate(const Field& u, const CylinderParams& p, double k, double m,
                        const IterateOptions& opt = {});

struct SupEstimateEntry {
    std::string field_label;
    double M = 0.0;
    double lhs = 0.0;       // max over Q(sigma rho) of u - M
    double rhs_mean = 0.0;  // mean over Q(rho) of (u - M)_+^2
    double C = 0.0;
    bool flagged = false;   // lhs > 0 with zero right-hand side
};

SupEstimateEntry sup_estimate_check(const Field& u, const CylinderParams& p, double m);

struct SupEstimateLedger {
    std::vector<SupEstimateEntry> entries;
    double C_min = 0.0;
    double C_max = 0.0;
    double spread = 0.0;  // C_max / C_min - 1
    bool stable = false;
    double stability_tol = 0.2;
};

/// Fitted C across fields (refinement levels) and M values.
SupEstimateLedger sup_estimate_ledger(const std::vector<const Field*>& fields, const std::vector<std::string>& labels,
                                      const CylinderParams& p, const std::vector<double>& Ms, double m,
                                      double stability_tol = 0.2);

/// sup of u over the cells fully inside Q(x0, t0, rho).
double cylinder_sup(const Field& u, const CylinderParams& p);

}  // namespace pmelab
