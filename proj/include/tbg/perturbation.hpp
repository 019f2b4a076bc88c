#pragma once

#include <array>
#include <string>
#include <vector>

#include "tbg/bloch.hpp"

namespace tbg {

// per-sector arrays are indexed in kSectors order: 1, tau, taubar

// (psi_m^sigma, W psi_0^sigma) = sum_l sigma^-l W_{m - rho_l}
cplx matrix_element(const FourierPotential& W, const SymmetryData& sym, IVec2 m, Sector s);

struct FirstOrder {
    std::array<double, 3> by_sector{};
    bool sigma_independent = true;
};

FirstOrder first_order(const FourierPotential& W, const SymmetryData& sym);

struct PerturbationReport {
    double E0 = 0;
    FirstOrder E1;
    std::array<double, 3> E2{};
    double predicted_split = 0;  // E2_tau - E2_1 from the per-sector sums
    double split_from_sum = 0;   // -3 * second_order_sum
    bool zero_pattern_ok = false;
    bool inconclusive = false;
    SecondOrderSum sum;
};

PerturbationReport second_order(const FourierPotential& W, const SymmetryData& sym,
                                const OrbitSet& S, const Vec2& K_star, const Mat2& dual);

// sector choice, zero pattern and both orders for the orbits of a K*-anchored basis
PerturbationReport perturbation_report(const FourierPotential& W, const PlaneWaveBasis& basis);

struct ConsistencyReport {
    std::vector<double> lambdas;
    std::array<std::vector<double>, 3> energies;    // E_sigma(lambda) - E0
    std::array<std::vector<double>, 3> remainders;  // minus the quadratic model
    std::array<double, 3> exponent{};
    std::array<bool, 3> identically_zero{};
    std::vector<std::string> tracking_failures;
    double numerical_split = 0;  // (E_tau - E_1) / lambda^2 at the smallest lambda
    PerturbationReport model;
};

ConsistencyReport consistency_check(const FourierPotential& W, const PlaneWaveBasis& basis,
                                    const std::vector<double>& lambdas,
                                    const ParallelMap& pmap = ParallelMap{});

struct VelocityBound {
    double bracket = 0;
    double u_inf = 0;
    double grad_inf = 0;
    double lattice_sum = 0;
    double tail = 0;
};

VelocityBound velocity_bound(const FourierPotential& W, double lambda, const Vec2& K_star,
                             const Mat2& dual, double cutoff);

struct ScalingRow {
    std::int64_t a = 0, b = 0;
    double N = 0;
    double lambda = 0;
    double vd_abs = 0;
    double N_times_vd = 0;
    std::string flag;
    std::size_t basis_size = 0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    double ratio = 0;          // max / min of N |v_d| over rows with a velocity
    double loglog_slope = 0;   // of N |v_d| against N
};

struct ScalingOptions {
    double delta = 1.0;
    // basis radius in units of the unit-lattice reciprocal length |k1|
    double cutoff_factor = 2.2;
    Stacking stacking = Stacking::AA;
};

ScalingTable scaling_study(const FourierPotential& V,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& angles,
                           const ScalingOptions& opts, const ParallelMap& pmap = ParallelMap{});

}  // namespace tbg
