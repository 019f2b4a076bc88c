#include "tbg/bloch.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "tbg/error.hpp"
#include "tbg/kernels.hpp"

extern "C" void openblas_set_num_threads(int);

namespace tbg {

namespace {

const cplx kTau{-0.5, kSqrt3 / 2};

void single_threaded_blas() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

void check_dimension(std::size_t n) {
    if (n > kMaxDimension) {
        std::ostringstream os;
        os << "matrix dimension " << n << " exceeds the limit " << kMaxDimension;
        throw ComputeGuard(os.str());
    }
}

}  // namespace

PlaneWaveBasis build_basis(const SymmetryData& sym, const Mat2& dual, const Vec2& K_star,
                           double shell_cutoff) {
    const Vec2 c(static_cast<double>(sym.k_coeff.x), static_cast<double>(sym.k_coeff.y));
    if ((dual * c / 3.0 - K_star).norm() > 1e-9 * std::max(1.0, K_star.norm()))
        throw InvalidInput("basis anchor does not match the symmetry data");
    if (!(shell_cutoff > K_star.norm())) {
        std::ostringstream os;
        os << "shell cutoff " << shell_cutoff << " must exceed |K*| = " << K_star.norm();
        throw InvalidInput(os.str());
    }
    const double unit = dual.col(0).squaredNorm() / 9.0;
    const double key_cut = shell_cutoff * shell_cutoff / unit * (1 + 1e-12);
    const std::int64_t n =
        static_cast<std::int64_t>(std::ceil(dual.inverse().operatorNorm() *
                                            (shell_cutoff + K_star.norm()))) + 1;
    std::set<IVec2> set;
    for (std::int64_t i = -n; i <= n; ++i)
        for (std::int64_t j = -n; j <= n; ++j)
            if (static_cast<double>(sym.norm_key({i, j})) <= key_cut) set.insert({i, j});
    std::vector<IVec2> todo(set.begin(), set.end());
    for (const IVec2& m : todo)
        for (const IVec2& o : sym.orbit(m)) set.insert(o);

    PlaneWaveBasis b;
    b.indices.assign(set.begin(), set.end());
    std::stable_sort(b.indices.begin(), b.indices.end(), [&](IVec2 u, IVec2 v) {
        return sym.norm_key(u) < sym.norm_key(v);
    });
    b.k_anchor = K_star;
    b.dual = dual;
    b.sym = sym;
    b.shell_cutoff = shell_cutoff;
    for (std::size_t i = 0; i < b.indices.size(); ++i) {
        b.position[b.indices[i]] = static_cast<int>(i);
        b.mx.push_back(static_cast<double>(b.indices[i].x));
        b.my.push_back(static_cast<double>(b.indices[i].y));
    }
    b.rotation_perm.resize(b.indices.size());
    for (std::size_t i = 0; i < b.indices.size(); ++i) {
        const int j = b.find(sym.rotate(b.indices[i]));
        if (j < 0) throw InternalError("plane-wave basis is not closed under rotation");
        b.rotation_perm[i] = j;
    }
    return b;
}

HMatrix assemble(const PlaneWaveBasis& basis, const Vec2& k, double lambda,
                 const FourierPotential& W) {
    const double scale = std::max(1.0, basis.dual.norm());
    if ((W.lattice.dual - basis.dual).norm() > 1e-9 * scale)
        throw InvalidInput("potential and plane-wave basis live on different lattices");
    const std::size_t n = basis.size();
    check_dimension(n);
    std::vector<double> kin(n);
    kernels::kinetic_diag(basis.mx.data(), basis.my.data(), n, k.x(), k.y(), basis.dual.data(),
                          kin.data());
    HMatrix H = HMatrix::Zero(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        H(j, j) = kin[j];
        if (lambda == 0) continue;
        for (const auto& [q, c] : W.coefficients) {
            const int i = basis.find(basis.indices[j] + q);
            if (i < 0 || static_cast<std::size_t>(i) < j) continue;
            if (static_cast<std::size_t>(i) == j)
                H(j, j) += lambda * c.real();
            else
                H(i, j) += lambda * c;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i) H(j, i) = std::conj(H(i, j));
    return H;
}

const char* sector_name(Sector s) {
    switch (s) {
        case Sector::One: return "1";
        case Sector::Tau: return "tau";
        case Sector::TauBar: return "taubar";
        case Sector::Mixed: return "mixed";
        default: return "unlabeled";
    }
}

cplx sector_value(Sector s) {
    if (s == Sector::Tau) return kTau;
    if (s == Sector::TauBar) return std::conj(kTau);
    return 1.0;
}

BlochSpectrum eigensolve(const HMatrix& H) {
    const std::size_t n = static_cast<std::size_t>(H.rows());
    check_dimension(n);
    single_threaded_blas();
    BlochSpectrum s;
    s.eigenvectors = H;
    s.eigenvalues.resize(static_cast<Eigen::Index>(n));
    if (n == 0) return s;
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                    reinterpret_cast<lapack_complex_double*>(s.eigenvectors.data()),
                                    static_cast<lapack_int>(n), s.eigenvalues.data());
    if (info != 0) throw InternalError("zheevd failed with info " + std::to_string(info));
    s.labels.assign(n, Sector::Unlabeled);
    return s;
}

Eigen::VectorXd eigenvalues_only(const HMatrix& H) {
    const std::size_t n = static_cast<std::size_t>(H.rows());
    check_dimension(n);
    single_threaded_blas();
    HMatrix A = H;
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    if (n == 0) return w;
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                                    reinterpret_cast<lapack_complex_double*>(A.data()),
                                    static_cast<lapack_int>(n), w.data());
    if (info != 0) throw InternalError("zheevd failed with info " + std::to_string(info));
    return w;
}

std::vector<std::pair<int, int>> clusters(const Eigen::VectorXd& e, double tol) {
    std::vector<std::pair<int, int>> out;
    const int n = static_cast<int>(e.size());
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || e[i] - e[i - 1] > tol * std::max(1.0, std::abs(e[i - 1]))) {
            out.emplace_back(start, i);
            start = i;
        }
    }
    return out;
}

CVec apply_rotation(const PlaneWaveBasis& basis, const CVec& v) {
    CVec out(v.size());
    for (std::size_t i = 0; i < basis.size(); ++i) out[basis.rotation_perm[i]] = v[i];
    return out;
}

CVec sector_project(const PlaneWaveBasis& basis, const CVec& v, Sector s) {
    const cplx w = std::conj(sector_value(s));
    const CVec r1 = apply_rotation(basis, v);
    const CVec r2 = apply_rotation(basis, r1);
    return (v + w * r1 + w * w * r2) / 3.0;
}

double sector_defect(const PlaneWaveBasis& basis, const CVec& v, Sector s) {
    return (apply_rotation(basis, v) - sector_value(s) * v).norm();
}

BlochSpectrum sector_decompose(BlochSpectrum spec, const PlaneWaveBasis& basis,
                               double degeneracy_tol) {
    if (basis.rotation_perm.size() != basis.size())
        throw InvalidInput("sector decomposition needs a basis anchored at K* or K'");
    spec.labels.assign(static_cast<std::size_t>(spec.eigenvalues.size()), Sector::Unlabeled);
    for (auto [b, e] : clusters(spec.eigenvalues, degeneracy_tol)) {
        const int k = e - b;
        const Eigen::MatrixXcd V = spec.eigenvectors.middleCols(b, k);
        Eigen::MatrixXcd fresh(V.rows(), k);
        std::vector<Sector> labels;
        for (Sector s : kSectors) {
            Eigen::MatrixXcd PV(V.rows(), k);
            for (int c = 0; c < k; ++c) PV.col(c) = sector_project(basis, V.col(c), s);
            const Eigen::MatrixXcd G = V.adjoint() * PV;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (G + G.adjoint()));
            for (int c = 0; c < k; ++c) {
                if (es.eigenvalues()[c] < 0.5) continue;
                if (static_cast<int>(labels.size()) == k) {
                    labels.push_back(Sector::Mixed);
                    break;
                }
                CVec x = V * es.eigenvectors().col(c);
                x.normalize();
                fresh.col(static_cast<Eigen::Index>(labels.size())) = x;
                labels.push_back(s);
            }
        }
        if (static_cast<int>(labels.size()) != k) {
            for (int c = b; c < e; ++c) spec.labels[c] = Sector::Mixed;
            continue;
        }
        for (int c = 0; c < k; ++c) {
            const CVec x = fresh.col(c);
            spec.eigenvectors.col(b + c) = x;
            spec.labels[b + c] = sector_defect(basis, x, labels[c]) < 1e-6 ? labels[c] : Sector::Mixed;
        }
    }
    return spec;
}

const char* dirac_status_name(DiracStatus s) {
    switch (s) {
        case DiracStatus::Ok: return "ok";
        case DiracStatus::Triple: return "multiplicity3";
        case DiracStatus::Mixed: return "mixed_sectors";
        default: return "no_dirac";
    }
}

cplx dirac_velocity(const PlaneWaveBasis& basis, const CVec& phi1, const CVec& phi2) {
    const std::size_t n = basis.size();
    std::vector<double> kx(n);
    for (std::size_t i = 0; i < n; ++i)
        kx[i] = basis.k_anchor.x() + basis.dual(0, 0) * basis.mx[i] + basis.dual(0, 1) * basis.my[i];
    return 2.0 * kernels::cdot_weighted(phi1.data(), kx.data(), phi2.data(), n);
}

namespace {

double eigen_residual(const HMatrix& H, const CVec& v, double E) {
    CVec Hv(v.size());
    kernels::matvec(H.data(), static_cast<std::size_t>(H.rows()), v.data(), Hv.data());
    return (Hv - E * v).norm();
}

}  // namespace

DiracReport find_dirac(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                       double degeneracy_tol) {
    DiracReport r;
    r.lambda = lambda;
    r.K_star = basis.k_anchor;
    r.basis_size = basis.size();
    r.shell_cutoff = basis.shell_cutoff;
    const HMatrix H = assemble(basis, basis.k_anchor, lambda, W);
    const BlochSpectrum spec = sector_decompose(eigensolve(H), basis, degeneracy_tol);

    int tau = -1, taubar = -1;
    for (auto [b, e] : clusters(spec.eigenvalues, degeneracy_tol)) {
        int t = -1, tb = -1;
        bool mixed = false;
        for (int c = b; c < e; ++c) {
            if (spec.labels[c] == Sector::Tau) t = c;
            if (spec.labels[c] == Sector::TauBar) tb = c;
            if (spec.labels[c] == Sector::Mixed) mixed = true;
        }
        if (mixed) {
            r.status = DiracStatus::Mixed;
            r.message = "mixed sector labels; degeneracy tolerance too coarse";
            return r;
        }
        if (t >= 0 && tb >= 0) {
            tau = t;
            taubar = tb;
            r.multiplicity = e - b;
            break;
        }
    }
    if (tau < 0) {
        r.message = "no two-fold tau/taubar cluster found";
        return r;
    }
    r.status = r.multiplicity == 2 ? DiracStatus::Ok : DiracStatus::Triple;
    r.E0 = 0.5 * (spec.eigenvalues[tau] + spec.eigenvalues[taubar]);
    r.phi1 = spec.eigenvectors.col(tau);
    r.phi2 = r.phi1.conjugate();
    const double tol = 1e-8 * std::max(1.0, std::abs(r.E0));
    if (eigen_residual(H, r.phi2, r.E0) > tol || sector_defect(basis, r.phi2, Sector::TauBar) > 1e-6) {
        r.phi2 = spec.eigenvectors.col(taubar);
        r.phi2_by_conjugation = false;
    }
    r.v_d_formula = dirac_velocity(basis, r.phi1, r.phi2);
    r.v_d_magnitude = std::abs(r.v_d_formula);
    for (Eigen::Index c = 0; c < spec.eigenvalues.size(); ++c)
        if (spec.labels[c] == Sector::One)
            r.separation_from_sector1 =
                std::min(r.separation_from_sector1, std::abs(spec.eigenvalues[c] - r.E0));
    return r;
}

double default_ring_radius(const PlaneWaveBasis& basis, const DiracReport& rep) {
    const double cap = basis.dual.col(0).norm() / 20;
    if (!(rep.v_d_magnitude > 0) || !std::isfinite(rep.separation_from_sector1)) return cap;
    const double r = 0.05 * rep.separation_from_sector1 / rep.v_d_magnitude;
    return std::clamp(r, 1e-6 * basis.dual.col(0).norm(), cap);
}

ConeFit cone_fit(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                 const DiracReport& rep, double ring_radius, int n_angles,
                 const ParallelMap& pmap) {
    if (n_angles < 8) throw InvalidInput("cone fit needs at least 8 angles");
    if (!(ring_radius > 0)) throw InvalidInput("ring radius must be positive");
    if (rep.phi1.size() != static_cast<Eigen::Index>(basis.size()))
        throw InvalidInput("cone fit needs the Dirac eigenvectors of this basis");

    struct Sample {
        double rho;
        std::array<double, 2> d;
        std::array<double, 2> overlap;
    };
    const std::size_t total = 2 * static_cast<std::size_t>(n_angles);
    const std::size_t n = basis.size();
    const auto samples = pmap(total, [&](std::size_t idx) {
        const double rho = idx < static_cast<std::size_t>(n_angles) ? ring_radius : ring_radius / 2;
        const double phi = 2 * kPi * static_cast<double>(idx % n_angles) / n_angles;
        const Vec2 k = basis.k_anchor + rho * Vec2(std::cos(phi), std::sin(phi));
        const BlochSpectrum s = eigensolve(assemble(basis, k, lambda, W));
        // candidates: the bands nearest E0
        std::vector<int> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(s.eigenvalues[a] - rep.E0) < std::abs(s.eigenvalues[b] - rep.E0);
        });
        order.resize(std::min<std::size_t>(8, n));
        std::vector<std::pair<double, int>> ov;
        for (int i : order) {
            const CVec v = s.eigenvectors.col(i);
            const double o = std::norm(kernels::cdot(rep.phi1.data(), v.data(), n)) +
                             std::norm(kernels::cdot(rep.phi2.data(), v.data(), n));
            ov.emplace_back(o, i);
        }
        std::stable_sort(ov.begin(), ov.end(), [](auto& a, auto& b) { return a.first > b.first; });
        Sample out{rho, {}, {}};
        for (int j = 0; j < 2; ++j) {
            out.d[j] = std::abs(s.eigenvalues[ov[j].second] - rep.E0);
            out.overlap[j] = ov[j].first;
        }
        return out;
    });

    // least squares for d = s rho + c rho^2
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d y = Eigen::Vector2d::Zero();
    ConeFit f;
    f.ring_radius = ring_radius;
    f.n_angles = n_angles;
    f.min_overlap = 1;
    for (const Sample& s : samples) {
        for (int j = 0; j < 2; ++j) {
            const Eigen::Vector2d row(s.rho, s.rho * s.rho);
            A += row * row.transpose();
            y += row * s.d[j];
            f.min_overlap = std::min(f.min_overlap, s.overlap[j]);
        }
    }
    const Eigen::Vector2d sol = A.ldlt().solve(y);
    f.slope = sol[0];
    f.quadratic = sol[1];
    for (const Sample& s : samples)
        for (int j = 0; j < 2; ++j)
            f.residual = std::max(f.residual, std::abs(s.d[j] - f.slope * s.rho - f.quadratic * s.rho * s.rho) /
                                                  (std::abs(f.slope) * s.rho));
    f.ambiguous = f.min_overlap <= 0.9;
    return f;
}

BandTable band_path(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                    const std::vector<Vec2>& ks, std::size_t n_bands, const ParallelMap& pmap) {
    if (ks.empty()) throw InvalidInput("band path needs at least one k point");
    n_bands = std::min(n_bands, basis.size());
    BandTable t;
    t.ks = ks;
    t.energies = pmap(ks.size(), [&](std::size_t i) {
        const Eigen::VectorXd e = eigenvalues_only(assemble(basis, ks[i], lambda, W));
        return std::vector<double>(e.data(), e.data() + n_bands);
    });
    return t;
}

std::vector<Vec2> sample_path(const std::vector<Vec2>& corners, int per_segment) {
    if (corners.empty() || per_segment < 1) throw InvalidInput("empty k path");
    std::vector<Vec2> out{corners.front()};
    for (std::size_t c = 1; c < corners.size(); ++c)
        for (int s = 1; s <= per_segment; ++s)
            out.push_back(corners[c - 1] + (corners[c] - corners[c - 1]) * (double(s) / per_segment));
    return out;
}

}  // namespace tbg
