#include "tbg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tbg/error.hpp"
#include "tbg/kernels.hpp"

namespace tbg {

Mat2 nu_matrix() {
    Mat2 m;
    m << kSqrt3 / 2, kSqrt3 / 2, 0.5, -0.5;
    return m;
}

Mat2 kappa_matrix() {
    const double s = 4 * kPi / kSqrt3;
    Mat2 m;
    m << s * 0.5, s * 0.5, s * kSqrt3 / 2, -s * kSqrt3 / 2;
    return m;
}

HoneycombBasis unit_lambda() { return {nu_matrix(), kappa_matrix(), LatticeKind::Direct, 1.0}; }

HoneycombBasis unit_lambda_star() {
    return {kappa_matrix(), nu_matrix(), LatticeKind::Dual, 1.0};
}

HoneycombBasis dual_of(const HoneycombBasis& h) {
    HoneycombBasis d;
    d.basis = h.dual;
    d.dual = 2 * kPi * h.dual.transpose().inverse();
    d.kind = h.kind == LatticeKind::Direct ? LatticeKind::Dual : LatticeKind::Direct;
    d.scale = 1.0 / h.scale;
    return d;
}

double duality_defect(const HoneycombBasis& h) {
    Mat2 g = h.dual.transpose() * h.basis - 2 * kPi * Mat2::Identity();
    return g.cwiseAbs().maxCoeff();
}

Mat2 rotation(double angle) {
    Mat2 r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

Mat2 rotation_2pi3() {
    Mat2 r;
    r << -0.5, kSqrt3 / 2, -kSqrt3 / 2, -0.5;
    return r;
}

std::string CommensurationData::alpha_class() const {
    if (rho_flag == 0) return epsilon == 0 ? "1" : "2";
    return epsilon == 0 ? "4pi" : "8pi";
}

CommensurationData classify_angle(std::int64_t a, std::int64_t b) {
    if (!(0 < b && b < a)) {
        std::ostringstream os;
        os << "need 0 < b < a, got (a,b) = (" << a << "," << b << ")";
        throw InvalidInput(os.str());
    }
    if (gcd(a, b) != 1) {
        std::ostringstream os;
        os << "(a,b) = (" << a << "," << b << ") not coprime";
        throw InvalidInput(os.str());
    }
    CommensurationData d;
    d.a = a;
    d.b = b;
    d.theta = std::atan(kSqrt3 * static_cast<double>(b) / static_cast<double>(a));
    d.epsilon = (a * b) % 2 != 0 ? 1 : 0;
    d.rho_flag = a % 3 == 0 ? 1 : 0;
    d.alpha = (d.epsilon ? 2.0 : 1.0) * (d.rho_flag ? 4 * kPi : 1.0);
    d.N = std::sqrt(static_cast<double>(d.norm_sq())) / d.alpha;
    d.superlattice = d.rho_flag ? SuperKind::LambdaStar : SuperKind::Lambda;
    return d;
}

double reduce_angle(double theta) {
    const double p = kPi / 3;
    double r = std::fmod(theta, p);
    if (r < 0) r += p;
    if (p - r < 1e-12) r = 0;
    return r;
}

Mat2 rotation_matrix(const CommensurationData& d) {
    const double a = static_cast<double>(d.a);
    const double b = static_cast<double>(d.b);
    Mat2 r;
    r << a, -kSqrt3 * b, kSqrt3 * b, a;
    return r / std::sqrt(static_cast<double>(d.norm_sq()));
}

HoneycombBasis superlattice_basis(const CommensurationData& d) {
    HoneycombBasis h;
    h.scale = d.N;
    if (d.rho_flag == 0) {
        h.basis = d.N * nu_matrix();
        h.dual = kappa_matrix() / d.N;
        h.kind = LatticeKind::Direct;
    } else {
        h.basis = d.N * kappa_matrix();
        h.dual = nu_matrix() / d.N;
        h.kind = LatticeKind::Dual;
    }
    return h;
}

IMat2 coupling_closed_form(const CommensurationData& d, int sign_b) {
    const std::int64_t a = d.a;
    const std::int64_t b = sign_b * d.b;
    IMat2 num;
    std::int64_t den;
    if (d.rho_flag == 0) {
        num = {a - b, 2 * b, -2 * b, a + b};
        den = d.epsilon ? 2 : 1;
    } else {
        num = {2 * a, -a + 3 * b, -a - 3 * b, 2 * a};
        den = d.epsilon ? 6 : 3;
    }
    for (std::int64_t e : {num.a, num.b, num.c, num.d}) {
        if (e % den != 0) {
            std::ostringstream os;
            os << "coupling matrix not integral for (a,b) = (" << d.a << "," << d.b << ")";
            throw InternalError(os.str());
        }
    }
    return {num.a / den, num.b / den, num.c / den, num.d / den};
}

Mat2 coupling_float(const CommensurationData& d, int sign) {
    const HoneycombBasis s = superlattice_basis(d);
    Mat2 r = rotation_matrix(d);
    if (sign < 0) r.transposeInPlace();
    return d.N * (d.N * s.dual).inverse() * r * kappa_matrix();
}

CouplingMatrices coupling_matrices(const CommensurationData& d) {
    CouplingMatrices c;
    c.NA_plus = coupling_closed_form(d, 1);
    c.NA_minus = coupling_closed_form(d, -1);
    c.N_squared = d.N * d.N;
    c.N_squared_exact = d.rho_flag == 0;
    if (c.N_squared_exact) c.N_squared = static_cast<double>(c.NA_plus.det());
    for (int sign : {1, -1}) {
        const IMat2& m = sign > 0 ? c.NA_plus : c.NA_minus;
        const Mat2 f = coupling_float(d, sign);
        const double err = std::max({std::abs(f(0, 0) - m.a), std::abs(f(0, 1) - m.b),
                                     std::abs(f(1, 0) - m.c), std::abs(f(1, 1) - m.d)});
        if (err > 1e-9) throw InternalError("coupling matrix disagrees with its float definition");
    }
    return c;
}

IVec2 SymmetryData::rho(int l) const {
    if (l == 1) return rho_plus;
    if (l == -1) return rho_minus;
    return {0, 0};
}

std::int64_t SymmetryData::norm_key(IVec2 m) const {
    const std::int64_t x = k_coeff.x + 3 * m.x;
    const std::int64_t y = k_coeff.y + 3 * m.y;
    if (kind == LatticeKind::Direct) return x * x - x * y + y * y;
    return x * x + x * y + y * y;
}

std::array<IVec2, 3> SymmetryData::orbit(IVec2 m) const {
    const IVec2 m1 = rotate(m);
    return {m, m1, rotate(m1)};
}

SymmetryData symmetry_data(LatticeKind kind, KPoint k_point) {
    SymmetryData s;
    s.kind = kind;
    s.k_point = k_point;
    if (kind == LatticeKind::Direct) {
        s.B = {0, -1, 1, -1};
        s.rho_plus = {0, 1};
        s.rho_minus = {-1, 0};
        s.k_coeff = {1, -1};
    } else {
        s.B = {-1, -1, 1, 0};
        s.rho_plus = {-1, 0};
        s.rho_minus = {0, -1};
        s.k_coeff = {1, 1};
    }
    if (k_point == KPoint::KPrime) {
        s.rho_plus = -s.rho_plus;
        s.rho_minus = -s.rho_minus;
        s.k_coeff = -s.k_coeff;
    }
    return s;
}

HighSymmetryPoints high_symmetry_points(const HoneycombBasis& basis) {
    const SymmetryData s = symmetry_data(basis.kind, KPoint::K);
    const Vec2 c(static_cast<double>(s.k_coeff.x), static_cast<double>(s.k_coeff.y));
    const Vec2 K = basis.dual * c / 3.0;
    return {K, -K};
}

namespace {

// integer box that covers the disk |offset + M u| <= radius
std::int64_t box_extent(const Mat2& M, const Vec2& offset, double radius) {
    const double inv_norm = M.inverse().operatorNorm();
    return static_cast<std::int64_t>(std::ceil(inv_norm * (radius + offset.norm()))) + 1;
}

}  // namespace

OrbitSet orbit_representatives(const SymmetryData& sym, const HoneycombBasis& basis,
                               const Vec2& K, double cutoff) {
    const double unit = basis.dual.col(0).squaredNorm() / 9.0;
    const double key_max = cutoff * cutoff / unit * (1 + 1e-12);
    const std::int64_t n = box_extent(basis.dual, K, cutoff);
    std::set<IVec2> reps;
    for (std::int64_t i = -n; i <= n; ++i) {
        for (std::int64_t j = -n; j <= n; ++j) {
            const IVec2 m{i, j};
            if (static_cast<double>(sym.norm_key(m)) > key_max) continue;
            const auto o = sym.orbit(m);
            reps.insert(*std::min_element(o.begin(), o.end()));
        }
    }
    return {std::vector<IVec2>(reps.begin(), reps.end()), cutoff};
}

BezoutShift bezout_shift_decomposition(const CommensurationData& d) {
    const std::int64_t a = d.a;
    const std::int64_t b = d.b;
    const Egcd e = extended_gcd(a, b);
    const std::int64_t q = e.y + a * (e.x + e.y);
    const std::int64_t p = e.x - b * (e.x + e.y);
    const std::int64_t f = d.epsilon ? 2 : 1;
    auto half = [](std::int64_t v) {
        if (v % 2 != 0) throw InternalError("odd numerator in shift decomposition");
        return v / 2;
    };
    BezoutShift s;
    if (d.rho_flag == 0) {
        const Egcd g = extended_gcd(3, a);
        const std::int64_t m = g.x;
        const std::int64_t n = g.y;
        s.v_plus = {half(-f * (p + q * (4 * m - 1))), f * (n * q * b - m * q)};
        s.v_minus = {half(f * (q * (4 * m - 1) - p)), f * (m * q + n * q * b)};
    } else {
        s.v_plus = {half(f * (q - p)), -f * p};
        s.v_minus = {half(-f * (p + q)), -f * p};
    }
    return s;
}

double superlattice_scale(const CommensurationData& d) {
    return superlattice_basis(d).basis.col(0).norm();
}

namespace {

std::vector<Vec2> lattice_disk(const Mat2& L, double radius) {
    const std::int64_t n = box_extent(L, Vec2::Zero(), radius);
    std::vector<Vec2> out;
    for (std::int64_t i = -n; i <= n; ++i) {
        for (std::int64_t j = -n; j <= n; ++j) {
            const Vec2 p = L * Vec2(static_cast<double>(i), static_cast<double>(j));
            if (p.norm() <= radius + 1e-9) out.push_back(p);
        }
    }
    return out;
}

bool vec_less(const Vec2& u, const Vec2& v) {
    if (std::abs(u.x() - v.x()) > 1e-9) return u.x() < v.x();
    return u.y() < v.y() - 1e-9;
}

}  // namespace

std::vector<Vec2> brute_force_intersection(const CommensurationData& d, double radius) {
    const double guard = 5 * superlattice_scale(d);
    if (radius > guard * (1 + 1e-12)) {
        std::ostringstream os;
        os << "radius " << radius << " exceeds guard " << guard;
        throw ComputeGuard(os.str());
    }
    const Mat2 r = rotation_matrix(d);
    const Mat2 nu = nu_matrix();
    const std::vector<Vec2> pts = lattice_disk(r * nu, radius);
    // x lies in R_{-theta} Lambda iff R_theta x lies in Lambda
    std::vector<double> qx(pts.size()), qy(pts.size()), res(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 q = r * pts[i];
        qx[i] = q.x();
        qy[i] = q.y();
    }
    const Mat2 nu_inv = nu.inverse();
    kernels::lattice_residual(qx.data(), qy.data(), pts.size(), nu.data(), nu_inv.data(),
                              res.data());
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (res[i] < 1e-9) out.push_back(pts[i]);
    std::sort(out.begin(), out.end(), vec_less);
    return out;
}

std::vector<Vec2> superlattice_points(const CommensurationData& d, double radius) {
    std::vector<Vec2> out = lattice_disk(superlattice_basis(d).basis, radius);
    std::sort(out.begin(), out.end(), vec_less);
    return out;
}

}  // namespace tbg
