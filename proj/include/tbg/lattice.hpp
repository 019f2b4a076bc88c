#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "tbg/int_math.hpp"

namespace tbg {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline const double kPi = 3.14159265358979323846;
inline const double kSqrt3 = 1.73205080756887729353;

// Direct: a scaled copy of the triangular lattice with generators nu.
// Dual: a scaled copy of its reciprocal with generators kappa.
enum class LatticeKind { Direct, Dual };

struct HoneycombBasis {
    Mat2 basis;  // columns v1, v2
    Mat2 dual;   // columns k1, k2 with <k_i, v_j> = 2 pi delta_ij
    LatticeKind kind = LatticeKind::Direct;
    double scale = 1.0;
};

Mat2 nu_matrix();
Mat2 kappa_matrix();

HoneycombBasis unit_lambda();
HoneycombBasis unit_lambda_star();
HoneycombBasis dual_of(const HoneycombBasis& h);
double duality_defect(const HoneycombBasis& h);

// Clockwise rotation by 2 pi / 3. It satisfies dual * B = R * dual for the
// integer B of SymmetryData.
Mat2 rotation_2pi3();
Mat2 rotation(double angle);

enum class SuperKind { Lambda, LambdaStar };

struct CommensurationData {
    std::int64_t a = 0;
    std::int64_t b = 0;
    double theta = 0;
    int epsilon = 0;
    int rho_flag = 0;
    double alpha = 1;
    double N = 1;
    SuperKind superlattice = SuperKind::Lambda;

    std::string alpha_class() const;  // "1", "2", "4pi", "8pi"
    std::int64_t norm_sq() const { return a * a + 3 * b * b; }
};

CommensurationData classify_angle(std::int64_t a, std::int64_t b);
double reduce_angle(double theta);
Mat2 rotation_matrix(const CommensurationData& data);
HoneycombBasis superlattice_basis(const CommensurationData& data);

struct CouplingMatrices {
    IMat2 NA_plus;
    IMat2 NA_minus;
    double N_squared = 0;
    bool N_squared_exact = false;
};

// closed form with b replaced by sign_b * b, used for both signs and for -theta
IMat2 coupling_closed_form(const CommensurationData& data, int sign_b);
CouplingMatrices coupling_matrices(const CommensurationData& data);
// N * (N * superlattice dual)^-1 * R_{sign theta} * kappa
Mat2 coupling_float(const CommensurationData& data, int sign);

enum class KPoint { K, KPrime };

struct SymmetryData {
    IMat2 B;
    IVec2 rho_plus;
    IVec2 rho_minus;
    IVec2 k_coeff;  // K = dual * k_coeff / 3
    LatticeKind kind = LatticeKind::Direct;
    KPoint k_point = KPoint::K;

    IVec2 rotate(IVec2 m) const { return B * m + rho_plus; }
    IVec2 rho(int l) const;  // l in {-1, 0, 1}
    // |K + dual m|^2 = |dual col 1|^2 / 9 * norm_key(m), exactly
    std::int64_t norm_key(IVec2 m) const;
    std::array<IVec2, 3> orbit(IVec2 m) const;
};

SymmetryData symmetry_data(LatticeKind kind, KPoint k_point);

struct HighSymmetryPoints {
    Vec2 K;
    Vec2 K_prime;
};

HighSymmetryPoints high_symmetry_points(const HoneycombBasis& basis);

struct OrbitSet {
    std::vector<IVec2> representatives;
    double cutoff_radius = 0;
};

OrbitSet orbit_representatives(const SymmetryData& sym, const HoneycombBasis& basis,
                               const Vec2& K, double cutoff);

struct BezoutShift {
    IVec2 v_plus;
    IVec2 v_minus;
};

BezoutShift bezout_shift_decomposition(const CommensurationData& data);

// Length of the shortest nonzero superlattice vector.
double superlattice_scale(const CommensurationData& data);

std::vector<Vec2> brute_force_intersection(const CommensurationData& data, double radius);
std::vector<Vec2> superlattice_points(const CommensurationData& data, double radius);

}  // namespace tbg
