#include "tbg/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tbg/error.hpp"
#include "tbg/kernels.hpp"

namespace tbg {

namespace {

int sector_index(Sector s) { return s == Sector::One ? 0 : s == Sector::Tau ? 1 : 2; }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

cplx matrix_element(const FourierPotential& W, const SymmetryData& sym, IVec2 m, Sector s) {
    const cplx sigma = sector_value(s);
    return W.at(m) + std::conj(sigma) * W.at(m - sym.rho_plus) + sigma * W.at(m - sym.rho_minus);
}

FirstOrder first_order(const FourierPotential& W, const SymmetryData& sym) {
    FirstOrder f;
    for (Sector s : kSectors) f.by_sector[sector_index(s)] = matrix_element(W, sym, {0, 0}, s).real();
    f.sigma_independent = !W.has(-sym.rho_plus) && !W.has(-sym.rho_minus);
    return f;
}

PerturbationReport second_order(const FourierPotential& W, const SymmetryData& sym,
                                const OrbitSet& S, const Vec2& K_star, const Mat2& dual) {
    PerturbationReport r;
    r.E0 = K_star.squaredNorm();
    r.E1 = first_order(W, sym);
    r.sum = second_order_sum(W, sym, S, K_star, dual);
    const double unit = dual.col(0).squaredNorm() / 9.0;
    const std::int64_t key0 = sym.norm_key({0, 0});
    for (const IVec2& m : S.representatives) {
        const auto orb = sym.orbit(m);
        if (std::find(orb.begin(), orb.end(), IVec2{}) != orb.end()) continue;
        const double den = unit * static_cast<double>(key0 - sym.norm_key(m));
        for (Sector s : kSectors) r.E2[sector_index(s)] += std::norm(matrix_element(W, sym, m, s)) / den;
    }
    r.predicted_split = r.E2[1] - r.E2[0];
    r.split_from_sum = -3 * r.sum.total.real();
    r.inconclusive = r.sum.inconclusive;
    return r;
}

PerturbationReport perturbation_report(const FourierPotential& W, const PlaneWaveBasis& basis) {
    if (!basis.sym) throw InvalidInput("perturbation needs a K*-anchored basis");
    const SymmetryData& sym = *basis.sym;
    const HoneycombBasis lat{Mat2::Zero(), basis.dual, sym.kind, 1.0};
    const OrbitSet orbits = orbit_representatives(sym, lat, basis.k_anchor, basis.shell_cutoff);
    const ZeroPatternResult z = choose_S_with_zero_pattern(W, sym, orbits);
    PerturbationReport r =
        second_order(W, sym, z.ok ? z.chosen : orbits, basis.k_anchor, basis.dual);
    r.zero_pattern_ok = z.ok;
    return r;
}

ConsistencyReport consistency_check(const FourierPotential& W, const PlaneWaveBasis& basis,
                                    const std::vector<double>& lambdas, const ParallelMap& pmap) {
    if (lambdas.size() < 4) throw InvalidInput("consistency check needs at least 4 lambda values");
    for (double l : lambdas)
        if (!(l > 0 && l <= 0.1)) throw InvalidInput("consistency check needs 0 < lambda <= 0.1");

    ConsistencyReport rep;
    rep.lambdas = lambdas;
    rep.model = perturbation_report(W, basis);
    const double E0 = rep.model.E0;
    const HMatrix H0 = assemble(basis, basis.k_anchor, 0.0, W);
    const HMatrix Hw = assemble(basis, basis.k_anchor, 1.0, W) - H0;
    const std::size_t n = basis.size();

    struct Point {
        std::array<double, 3> e{};
        std::array<bool, 3> ok{};
    };
    const auto pts = pmap(lambdas.size(), [&](std::size_t i) {
        const double lam = lambdas[i];
        const BlochSpectrum s = eigensolve(H0 + lam * Hw);
        const Eigen::MatrixXcd V = s.eigenvectors.leftCols(std::min<std::size_t>(3, n));
        Point p;
        for (Sector sec : kSectors) {
            const int si = sector_index(sec);
            Eigen::MatrixXcd PV(V.rows(), V.cols());
            for (Eigen::Index c = 0; c < V.cols(); ++c) PV.col(c) = sector_project(basis, V.col(c), sec);
            const Eigen::MatrixXcd G = V.adjoint() * PV;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (G + G.adjoint()));
            const Eigen::Index top = es.eigenvalues().size() - 1;
            p.ok[si] = es.eigenvalues()[top] > 0.9;
            CVec x = PV * es.eigenvectors().col(top);
            x.normalize();
            // Rayleigh quotient of H - E0 keeps the small shift free of cancellation
            CVec h0x(x.size()), hwx(x.size());
            const HMatrix H0s = H0 - E0 * HMatrix::Identity(n, n);
            kernels::matvec(H0s.data(), n, x.data(), h0x.data());
            kernels::matvec(Hw.data(), n, x.data(), hwx.data());
            p.e[si] = (kernels::cdot(x.data(), h0x.data(), n) + lam * kernels::cdot(x.data(), hwx.data(), n)).real();
        }
        return p;
    });

    std::vector<double> logl;
    for (double l : lambdas) logl.push_back(std::log(l));
    for (Sector sec : kSectors) {
        const int si = sector_index(sec);
        double worst = 0;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const double l = lambdas[i];
            const double e = pts[i].e[si];
            const double rem = e - l * rep.model.E1.by_sector[si] - l * l * rep.model.E2[si];
            rep.energies[si].push_back(e);
            rep.remainders[si].push_back(rem);
            worst = std::max(worst, std::abs(rem));
            if (!pts[i].ok[si]) {
                std::ostringstream os;
                os << "sector " << sector_name(sec) << " lost at lambda " << l;
                rep.tracking_failures.push_back(os.str());
            }
        }
        rep.identically_zero[si] = worst < 1e-12;
        if (rep.identically_zero[si]) {
            rep.exponent[si] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        std::vector<double> logr;
        for (double r : rep.remainders[si]) logr.push_back(std::log(std::max(std::abs(r), 1e-300)));
        rep.exponent[si] = fit_slope(logl, logr);
    }
    const std::size_t imin =
        static_cast<std::size_t>(std::min_element(lambdas.begin(), lambdas.end()) - lambdas.begin());
    const double lmin = lambdas[imin];
    rep.numerical_split = (pts[imin].e[1] - pts[imin].e[0]) / (lmin * lmin);
    return rep;
}

VelocityBound velocity_bound(const FourierPotential& W, double lambda, const Vec2& K_star,
                             const Mat2& dual, double cutoff) {
    VelocityBound v;
    for (const auto& [m, c] : W.coefficients) {
        v.u_inf += std::abs(c);
        v.grad_inf += std::abs(c) * (dual * Vec2(static_cast<double>(m.x), static_cast<double>(m.y))).norm();
    }
    const std::int64_t n =
        static_cast<std::int64_t>(std::ceil(dual.inverse().operatorNorm() * (cutoff + K_star.norm()))) + 1;
    for (std::int64_t i = -n; i <= n; ++i) {
        for (std::int64_t j = -n; j <= n; ++j) {
            const double r = (K_star + dual * Vec2(static_cast<double>(i), static_cast<double>(j))).norm();
            if (r <= cutoff && r > 0) v.lattice_sum += 1 / (r * r * r * r);
        }
    }
    // integral of r^-4 over |k| > cutoff, per reciprocal cell
    v.tail = kPi / (std::abs(dual.determinant()) * cutoff * cutoff);
    v.bracket = K_star.squaredNorm() + lambda * v.u_inf +
                lambda * lambda * v.grad_inf * v.grad_inf * (v.lattice_sum + v.tail);
    return v;
}

ScalingTable scaling_study(const FourierPotential& V,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& angles,
                           const ScalingOptions& opts, const ParallelMap& pmap) {
    if (!(opts.delta > 0)) throw InvalidInput("delta must be positive");
    if (angles.empty()) throw InvalidInput("scaling study needs at least one angle");
    std::vector<CommensurationData> data;
    for (auto [a, b] : angles) data.push_back(classify_angle(a, b));
    const double radius = opts.cutoff_factor * kappa_matrix().col(0).norm();

    ScalingTable t;
    t.rows = pmap(data.size(), [&](std::size_t i) {
        const CommensurationData& d = data[i];
        TwistSpec spec{d, opts.stacking, Combiner::Additive, false};
        const FourierPotential W = twist(V, spec);
        const SymmetryData sym = symmetry_data(W.lattice.kind, KPoint::K);
        const Vec2 K = high_symmetry_points(W.lattice).K;
        ScalingRow row;
        row.a = d.a;
        row.b = d.b;
        row.N = d.N;
        row.lambda = opts.delta / (d.N * d.N);
        const PlaneWaveBasis basis = build_basis(sym, W.lattice.dual, K, std::max(radius, 1.5 * K.norm()));
        row.basis_size = basis.size();
        const DiracReport rep = find_dirac(basis, W, row.lambda);
        row.flag = dirac_status_name(rep.status);
        if (rep.status == DiracStatus::Ok || rep.status == DiracStatus::Triple) {
            row.vd_abs = rep.v_d_magnitude;
            row.N_times_vd = d.N * rep.v_d_magnitude;
        }
        return row;
    });
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    std::vector<double> lx, ly;
    for (const ScalingRow& r : t.rows) {
        if (!(r.N_times_vd > 0)) continue;
        lo = std::min(lo, r.N_times_vd);
        hi = std::max(hi, r.N_times_vd);
        lx.push_back(std::log(r.N));
        ly.push_back(std::log(r.N_times_vd));
    }
    t.ratio = hi > 0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();
    t.loglog_slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    return t;
}

}  // namespace tbg
