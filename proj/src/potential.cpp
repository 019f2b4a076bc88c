#include "tbg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tbg/error.hpp"

namespace tbg {

double FourierPotential::l1_norm() const {
    double s = 0;
    for (const auto& [m, c] : coefficients) s += std::abs(c);
    return s;
}

namespace {

const double kCoeffTol = 1e-12;

void prune(std::map<IVec2, cplx>& m) {
    std::erase_if(m, [](const auto& kv) { return std::abs(kv.second) <= kZeroThreshold; });
}

}  // namespace

FourierPotential build_cosine_family(const std::vector<CosineOrbit>& orbits, int sign) {
    if (sign != 1 && sign != -1) throw InvalidInput("cosine family sign must be +1 or -1");
    const IMat2 B = symmetry_data(LatticeKind::Direct, KPoint::K).B;
    FourierPotential pot;
    std::set<IVec2> classes;
    for (const CosineOrbit& o : orbits) {
        if (!(o.a > 0)) {
            std::ostringstream os;
            os << "orbit " << o.m << " has non-positive amplitude " << o.a;
            throw InvalidInput(os.str());
        }
        std::array<IVec2, 3> rot{o.m, B * o.m, B * (B * o.m)};
        IVec2 canon = o.m;
        for (const IVec2& v : rot) canon = std::min({canon, v, -v});
        if (!classes.insert(canon).second) {
            std::ostringstream os;
            os << "orbit " << o.m << " duplicates an earlier orbit";
            throw InvalidInput(os.str());
        }
        for (const IVec2& v : rot) {
            pot.coefficients[v] += sign * o.a / 2;
            pot.coefficients[-v] += sign * o.a / 2;
        }
    }
    pot.honeycomb = true;
    return pot;
}

HoneycombReport validate_honeycomb(const FourierPotential& pot) {
    HoneycombReport r;
    const IMat2 B = symmetry_data(pot.lattice.kind, KPoint::K).B;
    for (const auto& [m, c] : pot.coefficients) {
        if (std::abs(pot.at(-m) - std::conj(c)) > kCoeffTol) {
            r.reality = false;
            r.reality_violations.push_back(m);
        }
        if (std::abs(c.imag()) > kCoeffTol || std::abs(pot.at(-m) - c) > kCoeffTol) {
            r.evenness = false;
            r.evenness_violations.push_back(m);
        }
        if (std::abs(pot.at(B * m) - c) > kCoeffTol) {
            r.b_invariance = false;
            r.b_violations.push_back(m);
        }
    }
    return r;
}

LayerMaps layer_maps(const FourierPotential& pot, const TwistSpec& spec) {
    const CommensurationData& d = spec.data;
    const Mat2 kappa = kappa_matrix();
    const Mat2 r_plus = rotation_matrix(d);
    const Vec2 K0(1 / kSqrt3, 0);
    const Mat2 r3 = rotation_2pi3();
    const std::array<Vec2, 3> shifts{0.5 * (r3.transpose() * K0), 0.5 * K0, 0.5 * (r3 * K0)};
    LayerMaps out;
    for (int t : {1, -1}) {
        const int s = spec.flip ? -t : t;
        const IMat2 NA = coupling_closed_form(d, s);
        const Mat2 R = s > 0 ? r_plus : Mat2(r_plus.transpose());
        auto& target = t > 0 ? out.plus : out.minus;
        for (const auto& [p, c] : pot.coefficients) {
            cplx w = 1.0;
            if (spec.stacking == Stacking::AB) {
                const Vec2 g = R * kappa * Vec2(static_cast<double>(p.x), static_cast<double>(p.y));
                w = 0;
                for (const Vec2& sh : shifts) w += std::exp(cplx(0, t * g.dot(sh)));
                w /= 3.0;
            }
            target[NA * p] += w * c;
        }
    }
    return out;
}

std::map<IVec2, cplx> convolve(const std::map<IVec2, cplx>& f, const std::map<IVec2, cplx>& g) {
    std::map<IVec2, cplx> h;
    for (const auto& [p, a] : f)
        for (const auto& [q, b] : g) h[p + q] += a * b;
    prune(h);
    return h;
}

FourierPotential twist(const FourierPotential& pot, const TwistSpec& spec) {
    if (pot.lattice.kind != LatticeKind::Direct || std::abs(pot.lattice.scale - 1) > 1e-12)
        throw InvalidInput("twist expects a potential on the unit lattice Lambda");
    const HoneycombReport rep = validate_honeycomb(pot);
    if (!rep.ok()) {
        std::ostringstream os;
        os << "input potential is not honeycomb (reality " << rep.reality << ", evenness "
           << rep.evenness << ", rotation " << rep.b_invariance << ")";
        throw InvalidInput(os.str());
    }
    const LayerMaps layers = layer_maps(pot, spec);
    FourierPotential W;
    W.lattice = superlattice_basis(spec.data);
    if (spec.combiner == Combiner::Additive) {
        for (const auto& [m, c] : layers.plus) W.coefficients[m] += 0.5 * c;
        for (const auto& [m, c] : layers.minus) W.coefficients[m] += 0.5 * c;
        prune(W.coefficients);
    } else {
        W.coefficients = convolve(layers.plus, layers.minus);
    }
    W.honeycomb = spec.stacking == Stacking::AA;
    W.decay_note = pot.decay_note;
    return W;
}

SupportReport support_check(const FourierPotential& W, const CouplingMatrices& cm) {
    SupportReport r;
    for (const auto& [m, c] : W.coefficients) {
        if (std::abs(c) <= kZeroThreshold) continue;
        if (solve_exact(cm.NA_plus, m) || solve_exact(cm.NA_minus, m)) continue;
        r.ok = false;
        r.offending.push_back(m);
    }
    return r;
}

ZeroPatternResult choose_S_with_zero_pattern(const FourierPotential& W, const SymmetryData& sym,
                                             const OrbitSet& orbits) {
    ZeroPatternResult res;
    res.chosen.cutoff_radius = orbits.cutoff_radius;
    for (const IVec2& rep : orbits.representatives) {
        auto members = sym.orbit(rep);
        if (std::find(members.begin(), members.end(), IVec2{}) != members.end()) {
            res.chosen.representatives.push_back(IVec2{});
            continue;
        }
        std::sort(members.begin(), members.end());
        auto it = std::find_if(members.begin(), members.end(),
                               [&](IVec2 m) { return !W.has(m - sym.rho_plus); });
        if (it == members.end()) {
            res.ok = false;
            if (!res.failing_orbit) res.failing_orbit = rep;
            res.chosen.representatives.push_back(rep);
            continue;
        }
        res.chosen.representatives.push_back(*it);
    }
    return res;
}

cplx fw_condition(const FourierPotential& W, const SymmetryData& sym) {
    return W.at(-sym.rho_minus);
}

SecondOrderSum second_order_sum(const FourierPotential& W, const SymmetryData& sym,
                                const OrbitSet& S, const Vec2& K_star, const Mat2& dual) {
    const Vec2 c(static_cast<double>(sym.k_coeff.x), static_cast<double>(sym.k_coeff.y));
    if ((dual * c / 3.0 - K_star).norm() > 1e-9 * std::max(1.0, K_star.norm()))
        throw InvalidInput("K_star does not match the symmetry data of the dual lattice");
    const double unit = dual.col(0).squaredNorm() / 9.0;
    const std::int64_t key0 = sym.norm_key({0, 0});
    const double key_cut = S.cutoff_radius * S.cutoff_radius / unit * (1 + 1e-12);

    SecondOrderSum out;
    for (const IVec2& m : S.representatives) {
        const auto orb = sym.orbit(m);
        if (std::find(orb.begin(), orb.end(), IVec2{}) != orb.end()) continue;
        const std::int64_t key = sym.norm_key(m);
        if (key == key0) {
            std::ostringstream os;
            os << "degenerate denominator |K*(m)| = |K*| at m = " << m;
            throw ComputeGuard(os.str());
        }
        if (!W.has(m) || !W.has(m - sym.rho_minus)) continue;
        const cplx v = W.at(m) * W.at(m - sym.rho_minus) / (unit * static_cast<double>(key0 - key));
        out.terms.push_back({m, v});
        out.total += v;
    }
    // W is finitely supported, so everything S misses is bounded by the
    // support pairs beyond the cutoff
    for (const auto& [m, w] : W.coefficients) {
        if (static_cast<double>(sym.norm_key(m)) <= key_cut) continue;
        if (!W.has(m) || !W.has(m - sym.rho_minus)) continue;
        const std::int64_t key = sym.norm_key(m);
        if (key == key0) continue;
        out.tail_bound += std::abs(w) * std::abs(W.at(m - sym.rho_minus)) /
                          (unit * std::abs(static_cast<double>(key0 - key)));
    }
    int pos = 0, neg = 0;
    for (const auto& t : out.terms) {
        if (t.value.real() > kZeroThreshold) ++pos;
        if (t.value.real() < -kZeroThreshold) ++neg;
    }
    out.sign_definite = pos == 0 || neg == 0;
    out.inconclusive = out.terms.empty() || std::abs(out.total) <= kZeroThreshold;
    return out;
}

}  // namespace tbg
