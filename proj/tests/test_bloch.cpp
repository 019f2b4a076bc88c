#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tbg/bloch.hpp"
#include "tbg/error.hpp"

using namespace tbg;

namespace {

FourierPotential reference() { return build_cosine_family({{{1, 0}, 1.0}}, 1); }

struct Setup {
    FourierPotential W;
    SymmetryData sym;
    Vec2 K;
    PlaneWaveBasis basis;
};

Setup make(FourierPotential W, double shells, KPoint kp = KPoint::K) {
    Setup s{std::move(W), {}, {}, {}};
    s.sym = symmetry_data(s.W.lattice.kind, kp);
    const auto hs = high_symmetry_points(s.W.lattice);
    s.K = kp == KPoint::K ? hs.K : hs.K_prime;
    s.basis = build_basis(s.sym, s.W.lattice.dual, s.K, shells * s.W.lattice.dual.col(0).norm());
    return s;
}

FourierPotential free_on(const HoneycombBasis& h) {
    FourierPotential p;
    p.lattice = h;
    p.honeycomb = true;
    return p;
}

FourierPotential twisted(std::int64_t a, std::int64_t b, Stacking st = Stacking::AA) {
    TwistSpec spec{classify_angle(a, b)};
    spec.stacking = st;
    return twist(reference(), spec);
}

// same index set, reversed order
PlaneWaveBasis reversed(const PlaneWaveBasis& b) {
    PlaneWaveBasis r = b;
    std::reverse(r.indices.begin(), r.indices.end());
    r.position.clear();
    r.mx.clear();
    r.my.clear();
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
        r.position[r.indices[i]] = static_cast<int>(i);
        r.mx.push_back(double(r.indices[i].x));
        r.my.push_back(double(r.indices[i].y));
    }
    for (std::size_t i = 0; i < r.indices.size(); ++i)
        r.rotation_perm[i] = r.find(r.sym->rotate(r.indices[i]));
    return r;
}

// free-field velocity from the three-wave orbit of 0 alone
double free_velocity_oracle(const SymmetryData& sym, const Mat2& dual, const Vec2& K) {
    const cplx tau = std::polar(1.0, 2 * kPi / 3);
    IVec2 m{0, 0};
    cplx s = 0;
    for (int l = 0; l < 3; ++l) {
        const Vec2 q = K + dual * Vec2(double(m.x), double(m.y));
        s += std::pow(tau, 2 * l) * q.x();
        m = sym.rotate(m);
    }
    return std::abs(2.0 / 3.0 * s);
}

double max_abs(const Eigen::MatrixXcd& M) { return M.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("smallest basis is the orbit of 0") {
    const Setup s = make(reference(), 1.0);
    // |K| < |k1| so one shell already holds more; use a cutoff just above |K|
    const PlaneWaveBasis b = build_basis(s.sym, s.W.lattice.dual, s.K, s.K.norm() * (1 + 1e-9));
    REQUIRE(b.size() == 3);
    CHECK(b.find({0, 0}) >= 0);
    CHECK(b.find(s.sym.rho_plus) >= 0);
    CHECK(b.find(s.sym.rho_plus + s.sym.B * s.sym.rho_plus) >= 0);
    CHECK(s.sym.rho_plus + s.sym.B * s.sym.rho_plus == s.sym.rho_minus);
    int i = 0;
    for (int step = 0; step < 3; ++step) i = b.rotation_perm[i];
    CHECK(i == 0);
    for (int t = 0; t < 3; ++t) CHECK(b.rotation_perm[t] != t);

    CHECK_THROWS_AS(build_basis(s.sym, s.W.lattice.dual, s.K, 0.5 * s.K.norm()), InvalidInput);
    CHECK_THROWS_AS(build_basis(s.sym, s.W.lattice.dual, s.K * 1.01, 10.0), InvalidInput);
}

TEST_CASE("basis closure and ordering") {
    for (const auto& W : {reference(), free_on(unit_lambda_star()), twisted(2, 1), twisted(3, 1)}) {
        for (KPoint kp : {KPoint::K, KPoint::KPrime}) {
            const Setup s = make(W, 4.5, kp);
            const PlaneWaveBasis& b = s.basis;
            for (std::size_t i = 0; i < b.size(); ++i) {
                const int j = b.rotation_perm[i];
                CHECK(b.rotation_perm[b.rotation_perm[j]] == static_cast<int>(i));
                const auto q = [&](std::size_t t) {
                    return (s.K + b.dual * Vec2(b.mx[t], b.my[t])).norm();
                };
                CHECK(std::abs(q(i) - q(j)) < 1e-10);
                if (i > 0) {
                    const auto k0 = s.sym.norm_key(b.indices[i - 1]), k1 = s.sym.norm_key(b.indices[i]);
                    CHECK((k0 < k1 || (k0 == k1 && b.indices[i - 1] < b.indices[i])));
                }
            }
            // every index inside the cutoff is present
            for (std::int64_t x = -40; x <= 40; ++x)
                for (std::int64_t y = -40; y <= 40; ++y) {
                    const double r = (s.K + b.dual * Vec2(double(x), double(y))).norm();
                    if (r <= b.shell_cutoff * (1 - 1e-12)) CHECK(b.find({x, y}) >= 0);
                }
        }
    }
}

TEST_CASE("assemble") {
    const Setup s = make(twisted(2, 1), 3);
    const PlaneWaveBasis& b = s.basis;
    const Vec2 k = s.K + Vec2(0.013, -0.007);

    const HMatrix H0 = assemble(b, k, 0.0, s.W);
    for (Eigen::Index i = 0; i < H0.rows(); ++i)
        for (Eigen::Index j = 0; j < H0.cols(); ++j) {
            const double kin = (k + b.dual * Vec2(b.mx[i], b.my[i])).squaredNorm();
            if (i == j)
                CHECK(std::abs(H0(i, j) - kin) < 1e-13 * kin);
            else
                CHECK(H0(i, j) == cplx(0, 0));
        }

    FourierPotential single = free_on(s.W.lattice);
    const IVec2 q = s.W.coefficients.begin()->first;
    single.coefficients[q] = cplx(0.25, 0.5);
    single.coefficients[IVec2{0, 0} - q] = cplx(0.25, -0.5);
    const HMatrix H1 = assemble(b, k, 1.0, single);
    for (Eigen::Index i = 0; i < H1.rows(); ++i)
        for (Eigen::Index j = 0; j < H1.cols(); ++j) {
            if (i == j) continue;
            CHECK(H1(i, j) == single.at(b.indices[i] - b.indices[j]));
        }

    const HMatrix H = assemble(b, k, 0.7, s.W);
    CHECK(max_abs(H - H.adjoint()) == 0.0);

    CHECK_THROWS_AS(assemble(b, k, 0.5, reference()), InvalidInput);
}

TEST_CASE("eigensolve") {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(4, 4);
    D.diagonal() << 3.0, -1.0, 2.5, 0.0;
    const BlochSpectrum sd = eigensolve(D);
    CHECK(sd.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(sd.eigenvalues[1] == doctest::Approx(0.0));
    CHECK(sd.eigenvalues[2] == doctest::Approx(2.5));
    CHECK(sd.eigenvalues[3] == doctest::Approx(3.0));

    Eigen::MatrixXcd X(2, 2);
    X << 0, 1, 1, 0;
    const Eigen::VectorXd ex = eigenvalues_only(X);
    CHECK(ex[0] == doctest::Approx(-1.0));
    CHECK(ex[1] == doctest::Approx(1.0));

    const Setup s = make(twisted(2, 1), 6);
    const HMatrix H = assemble(s.basis, s.K + Vec2(0.01, 0.02), 0.5, s.W);
    const BlochSpectrum sp = eigensolve(H);
    const Eigen::Index n = H.rows();
    CHECK(max_abs(sp.eigenvectors.adjoint() * sp.eigenvectors - Eigen::MatrixXcd::Identity(n, n)) < 1e-10);
    for (Eigen::Index c = 0; c < n; ++c) {
        CHECK((H * sp.eigenvectors.col(c) - sp.eigenvalues[c] * sp.eigenvectors.col(c)).norm() <
              1e-9 * std::max(1.0, std::abs(sp.eigenvalues[c])));
        if (c > 0) CHECK(sp.eigenvalues[c - 1] <= sp.eigenvalues[c]);
    }
    const BlochSpectrum again = eigensolve(H);
    CHECK(again.eigenvalues == sp.eigenvalues);
    CHECK(again.eigenvectors == sp.eigenvectors);

    const Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(kMaxDimension + 1, 1);
    CHECK_THROWS_AS(eigensolve(big), ComputeGuard);
}

TEST_CASE("clusters") {
    Eigen::VectorXd e(6);
    e << -1, 1, 1 + 1e-12, 1 + 2e-12, 2, 2 + 1e-3;
    const auto c = clusters(e, 1e-8);
    REQUIRE(c.size() == 4);
    CHECK(c[1] == std::pair<int, int>{1, 4});
}

TEST_CASE("free field at K") {
    for (const auto& h : {unit_lambda(), unit_lambda_star()}) {
        const Setup s = make(free_on(h), 4);
        const BlochSpectrum sp = sector_decompose(eigensolve(assemble(s.basis, s.K, 0, s.W)), s.basis);
        const double E = s.K.squaredNorm();
        int near = 0;
        for (Eigen::Index c = 0; c < sp.eigenvalues.size(); ++c)
            if (std::abs(sp.eigenvalues[c] - E) < 1e-10) ++near;
        CHECK(near == 3);
        CHECK(sp.eigenvalues[0] == doctest::Approx(E).epsilon(1e-12));
        std::array<int, 3> count{};
        for (int c = 0; c < 3; ++c)
            for (int j = 0; j < 3; ++j)
                if (sp.labels[c] == kSectors[j]) ++count[j];
        CHECK(count == std::array<int, 3>{1, 1, 1});
        for (Eigen::Index c = 0; c < sp.eigenvalues.size(); ++c) {
            REQUIRE(sp.labels[c] != Sector::Mixed);
            const CVec v = sp.eigenvectors.col(c);
            CHECK((apply_rotation(s.basis, v) - sector_value(sp.labels[c]) * v).norm() < 1e-6);
        }

        const DiracReport r = find_dirac(s.basis, s.W, 0);
        CHECK(r.status == DiracStatus::Triple);
        CHECK(r.multiplicity == 3);
        CHECK(r.E0 == doctest::Approx(E).epsilon(1e-12));
        const double oracle = free_velocity_oracle(s.sym, h.dual, s.K);
        CHECK(r.v_d_magnitude == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(r.v_d_magnitude == doctest::Approx(s.K.norm()).epsilon(1e-12));
    }
    CHECK(make(free_on(unit_lambda()), 2).K.norm() == doctest::Approx(4 * kPi / 3));
    CHECK(make(free_on(unit_lambda_star()), 2).K.norm() == doctest::Approx(1 / kSqrt3));
}

TEST_CASE("free field on a superlattice scales as 1/N") {
    const auto d = classify_angle(2, 1);
    const Setup s = make(free_on(superlattice_basis(d)), 4);
    const DiracReport r = find_dirac(s.basis, s.W, 0);
    CHECK(r.v_d_magnitude == doctest::Approx(4 * kPi / 3 / std::sqrt(7.0)).epsilon(1e-12));
    CHECK(r.v_d_magnitude ==
          doctest::Approx(free_velocity_oracle(s.sym, s.W.lattice.dual, s.K)).epsilon(1e-12));
}

TEST_CASE("rotation commutes with H") {
    for (const auto& W : {twisted(2, 1), twisted(5, 2), twisted(4, 1, Stacking::AB), reference()}) {
        for (KPoint kp : {KPoint::K, KPoint::KPrime}) {
            const Setup s = make(W, 4, kp);
            const HMatrix H = assemble(s.basis, s.K, 0.8, s.W);
            const auto& p = s.basis.rotation_perm;
            double worst = 0;
            for (Eigen::Index i = 0; i < H.rows(); ++i)
                for (Eigen::Index j = 0; j < H.cols(); ++j)
                    worst = std::max(worst, std::abs(H(p[i], p[j]) - H(i, j)));
            CHECK(worst < 1e-10);

            const BlochSpectrum sp = sector_decompose(eigensolve(H), s.basis);
            std::size_t labeled = 0;
            for (Eigen::Index c = 0; c < sp.eigenvalues.size(); ++c) {
                if (sp.labels[c] == Sector::Mixed) continue;
                ++labeled;
                CHECK(sector_defect(s.basis, sp.eigenvectors.col(c), sp.labels[c]) < 1e-6);
            }
            CHECK(labeled == s.basis.size());
        }
    }
}

TEST_CASE("Dirac velocity invariances") {
    const Setup s = make(twisted(2, 1), 6);
    const DiracReport r = find_dirac(s.basis, s.W, 0.5);
    REQUIRE(r.valid());
    CHECK(r.multiplicity == 2);
    CHECK(r.v_d_magnitude == std::abs(r.v_d_formula));
    CHECK(r.phi2_by_conjugation);
    CHECK(sector_defect(s.basis, r.phi2, Sector::TauBar) < 1e-8);

    const cplx phase = std::polar(1.0, 0.73);
    const CVec p1 = phase * r.phi1;
    CHECK(std::abs(dirac_velocity(s.basis, p1, p1.conjugate())) ==
          doctest::Approx(r.v_d_magnitude).epsilon(1e-12));

    const PlaneWaveBasis rb = reversed(s.basis);
    const DiracReport rr = find_dirac(rb, s.W, 0.5);
    REQUIRE(rr.valid());
    CHECK(rr.v_d_magnitude == doctest::Approx(r.v_d_magnitude).epsilon(1e-9));
    CHECK(rr.E0 == doctest::Approx(r.E0).epsilon(1e-12));

    const Setup sp = make(twisted(2, 1), 6, KPoint::KPrime);
    const DiracReport rp = find_dirac(sp.basis, sp.W, 0.5);
    REQUIRE(rp.valid());
    CHECK(rp.v_d_magnitude == doctest::Approx(r.v_d_magnitude).epsilon(1e-9));
    CHECK(rp.E0 == doctest::Approx(r.E0).epsilon(1e-12));
}

TEST_CASE("AB stacking has a Dirac point") {
    const Setup s = make(twisted(2, 1, Stacking::AB), 6);
    const DiracReport r = find_dirac(s.basis, s.W, 0.5);
    CHECK(r.valid());
    CHECK(r.v_d_magnitude > 0);
    CHECK(sector_defect(s.basis, r.phi2, Sector::TauBar) < 1e-6);
}

TEST_CASE("cone fit") {
    SUBCASE("free field is a triple point") {
        const Setup s = make(free_on(unit_lambda()), 3);
        const DiracReport r = find_dirac(s.basis, s.W, 0);
        const ConeFit f = cone_fit(s.basis, s.W, 0, r, 0.01, 12);
        CHECK(f.ambiguous);
        CHECK(f.min_overlap == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
        CHECK_THROWS_AS(cone_fit(s.basis, s.W, 0, r, 0.01, 6), InvalidInput);
    }
    SUBCASE("reference twist at lambda 0.5") {
        const Setup s = make(twisted(2, 1), 8);
        const DiracReport r = find_dirac(s.basis, s.W, 0.5);
        REQUIRE(r.valid());
        const double rad = default_ring_radius(s.basis, r);
        CHECK(rad > 0);
        CHECK(rad <= s.basis.dual.col(0).norm() / 20);
        const ParallelMap pmap(4);
        const ConeFit f = cone_fit(s.basis, s.W, 0.5, r, rad, 16, pmap);
        const ConeFit h = cone_fit(s.basis, s.W, 0.5, r, rad / 2, 16, pmap);
        CHECK_FALSE(f.ambiguous);
        CHECK(std::abs(f.slope - r.v_d_magnitude) < 0.01 * r.v_d_magnitude);
        CHECK(std::abs(h.slope - r.v_d_magnitude) < 0.01 * r.v_d_magnitude);
        CHECK(f.residual / h.residual >= 1.8);
        const ConeFit serial = cone_fit(s.basis, s.W, 0.5, r, rad, 16);
        CHECK(serial.slope == f.slope);
        CHECK(serial.residual == f.residual);
    }
}

TEST_CASE("cutoff convergence") {
    const Setup a = make(twisted(2, 1), 8);
    const Setup b = make(twisted(2, 1), 9);
    const DiracReport ra = find_dirac(a.basis, a.W, 0.5);
    const DiracReport rb = find_dirac(b.basis, b.W, 0.5);
    REQUIRE(ra.valid());
    REQUIRE(rb.valid());
    CHECK(b.basis.size() > a.basis.size());
    CHECK(std::abs(ra.E0 - rb.E0) < 1e-6);
}

TEST_CASE("Weyl bound in lambda") {
    const Setup s = make(twisted(2, 1), 5);
    const Vec2 k = s.K + Vec2(0.05, 0.02);
    const double bound = s.W.l1_norm();
    for (double lam : {0.0, 0.3, 1.0}) {
        const double dl = 0.01;
        const Eigen::VectorXd e0 = eigenvalues_only(assemble(s.basis, k, lam, s.W));
        const Eigen::VectorXd e1 = eigenvalues_only(assemble(s.basis, k, lam + dl, s.W));
        CHECK((e1 - e0).cwiseAbs().maxCoeff() <= dl * bound * (1 + 1e-9));
    }
}

TEST_CASE("band path") {
    const Setup s = make(twisted(2, 1), 5);
    const auto one = band_path(s.basis, s.W, 0.4, {s.K}, 6);
    const Eigen::VectorXd full = eigensolve(assemble(s.basis, s.K, 0.4, s.W)).eigenvalues;
    for (int i = 0; i < 6; ++i) CHECK(one.energies[0][i] == doctest::Approx(full[i]).epsilon(1e-12));

    const auto path = sample_path({Vec2::Zero(), s.K}, 40);
    CHECK(path.size() == 41);
    const auto free = band_path(s.basis, s.W, 0, path, 5);
    for (std::size_t i = 0; i < path.size(); ++i) {
        std::vector<double> e;
        for (std::size_t m = 0; m < s.basis.size(); ++m)
            e.push_back((path[i] + s.basis.dual * Vec2(s.basis.mx[m], s.basis.my[m])).squaredNorm());
        std::sort(e.begin(), e.end());
        for (int j = 0; j < 5; ++j) CHECK(free.energies[i][j] == doctest::Approx(e[j]).epsilon(1e-12));
    }

    const auto low = band_path(s.basis, s.W, 0.05, path, 1, ParallelMap(3));
    const double h = (path[1] - path[0]).norm();
    const double slope_bound = 2 * (s.basis.shell_cutoff + s.K.norm());
    for (std::size_t i = 1; i < path.size(); ++i)
        CHECK(std::abs(low.energies[i][0] - low.energies[i - 1][0]) < 10 * h * slope_bound);

    CHECK_THROWS_AS(band_path(s.basis, s.W, 0, {}, 3), InvalidInput);
}
