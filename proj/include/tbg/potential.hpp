#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "tbg/lattice.hpp"

namespace tbg {

using cplx = std::complex<double>;

inline constexpr double kZeroThreshold = 1e-14;

struct FourierPotential {
    HoneycombBasis lattice = unit_lambda();
    std::map<IVec2, cplx> coefficients;
    bool honeycomb = false;
    std::optional<double> decay_note;

    cplx at(IVec2 m) const {
        auto it = coefficients.find(m);
        return it == coefficients.end() ? cplx{} : it->second;
    }
    bool has(IVec2 m) const { return std::abs(at(m)) > kZeroThreshold; }
    double l1_norm() const;
};

struct CosineOrbit {
    IVec2 m;
    double a = 0;
};

FourierPotential build_cosine_family(const std::vector<CosineOrbit>& orbits, int sign);

struct HoneycombReport {
    bool reality = true;
    bool evenness = true;
    bool b_invariance = true;
    std::vector<IVec2> reality_violations;
    std::vector<IVec2> evenness_violations;
    std::vector<IVec2> b_violations;

    bool ok() const { return reality && evenness && b_invariance; }
};

HoneycombReport validate_honeycomb(const FourierPotential& pot);

enum class Stacking { AA, AB };
enum class Combiner { Additive, PointwiseProduct };

struct TwistSpec {
    CommensurationData data;
    Stacking stacking = Stacking::AA;
    Combiner combiner = Combiner::Additive;
    bool flip = false;  // build at -theta instead of theta
};

FourierPotential twist(const FourierPotential& pot, const TwistSpec& spec);

// the two rotated single-layer maps on the superlattice index grid
struct LayerMaps {
    std::map<IVec2, cplx> plus;
    std::map<IVec2, cplx> minus;
};

LayerMaps layer_maps(const FourierPotential& pot, const TwistSpec& spec);
std::map<IVec2, cplx> convolve(const std::map<IVec2, cplx>& f, const std::map<IVec2, cplx>& g);

struct SupportReport {
    bool ok = true;
    std::vector<IVec2> offending;
};

SupportReport support_check(const FourierPotential& W, const CouplingMatrices& cm);

struct ZeroPatternResult {
    bool ok = true;
    OrbitSet chosen;
    std::optional<IVec2> failing_orbit;
};

ZeroPatternResult choose_S_with_zero_pattern(const FourierPotential& W, const SymmetryData& sym,
                                             const OrbitSet& orbits);

cplx fw_condition(const FourierPotential& W, const SymmetryData& sym);

struct SecondOrderTerm {
    IVec2 m;
    cplx value;
};

struct SecondOrderSum {
    cplx total;
    std::vector<SecondOrderTerm> terms;  // nonzero summands only
    double tail_bound = 0;
    bool inconclusive = false;
    bool sign_definite = true;
};

// Denominators use the exact integer norm keys of sym, so K_star must be
// dual * sym.k_coeff / 3.
SecondOrderSum second_order_sum(const FourierPotential& W, const SymmetryData& sym,
                                const OrbitSet& S, const Vec2& K_star, const Mat2& dual);

}  // namespace tbg
