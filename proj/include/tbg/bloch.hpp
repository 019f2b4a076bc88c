#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tbg/parallel.hpp"
#include "tbg/potential.hpp"

namespace tbg {

struct PlaneWaveBasis {
    std::vector<IVec2> indices;
    Vec2 k_anchor = Vec2::Zero();
    Mat2 dual = Mat2::Identity();
    std::optional<SymmetryData> sym;
    std::vector<int> rotation_perm;  // i -> position of B m_i + rho_1
    double shell_cutoff = 0;
    std::map<IVec2, int> position;
    std::vector<double> mx, my;  // indices as doubles for the kernels

    std::size_t size() const { return indices.size(); }
    int find(IVec2 m) const {
        auto it = position.find(m);
        return it == position.end() ? -1 : it->second;
    }
};

// every m with |K + dual m| <= shell_cutoff, closed under m -> B m + rho_1,
// sorted by exact |K*(m)| then lexicographically
PlaneWaveBasis build_basis(const SymmetryData& sym, const Mat2& dual, const Vec2& K_star,
                           double shell_cutoff);

using HMatrix = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

HMatrix assemble(const PlaneWaveBasis& basis, const Vec2& k, double lambda,
                 const FourierPotential& W);

enum class Sector { One, Tau, TauBar, Mixed, Unlabeled };

const char* sector_name(Sector s);
cplx sector_value(Sector s);  // 1, tau, conj(tau)
inline constexpr std::array<Sector, 3> kSectors{Sector::One, Sector::Tau, Sector::TauBar};

struct BlochSpectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    std::vector<Sector> labels;
};

inline constexpr std::size_t kMaxDimension = 4096;

BlochSpectrum eigensolve(const HMatrix& H);
Eigen::VectorXd eigenvalues_only(const HMatrix& H);

// [begin, end) ranges of eigenvalues whose neighbour gaps are below tol * max(1, |E|)
std::vector<std::pair<int, int>> clusters(const Eigen::VectorXd& e, double tol);

CVec apply_rotation(const PlaneWaveBasis& basis, const CVec& v);
CVec sector_project(const PlaneWaveBasis& basis, const CVec& v, Sector s);
double sector_defect(const PlaneWaveBasis& basis, const CVec& v, Sector s);

BlochSpectrum sector_decompose(BlochSpectrum spec, const PlaneWaveBasis& basis,
                               double degeneracy_tol = 1e-8);

enum class DiracStatus { Ok, Triple, NotFound, Mixed };
const char* dirac_status_name(DiracStatus s);

struct DiracReport {
    DiracStatus status = DiracStatus::NotFound;
    double E0 = 0;
    int multiplicity = 0;
    cplx v_d_formula;
    double v_d_magnitude = 0;
    double cone_fit_slope = std::numeric_limits<double>::quiet_NaN();
    double cone_fit_residual = std::numeric_limits<double>::quiet_NaN();
    double lambda = 0;
    Vec2 K_star = Vec2::Zero();
    double separation_from_sector1 = std::numeric_limits<double>::infinity();
    bool phi2_by_conjugation = true;
    std::size_t basis_size = 0;
    double shell_cutoff = 0;
    std::string message;
    CVec phi1, phi2;

    bool valid() const { return status == DiracStatus::Ok; }
};

DiracReport find_dirac(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                       double degeneracy_tol = 1e-8);

// v_d = 2 sum conj(phi1[m]) (K + dual m)_x phi2[m]
cplx dirac_velocity(const PlaneWaveBasis& basis, const CVec& phi1, const CVec& phi2);

struct ConeFit {
    double slope = 0;
    double quadratic = 0;
    double residual = 0;
    double min_overlap = 0;
    bool ambiguous = false;
    double ring_radius = 0;
    int n_angles = 0;
};

double default_ring_radius(const PlaneWaveBasis& basis, const DiracReport& rep);

ConeFit cone_fit(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                 const DiracReport& rep, double ring_radius, int n_angles,
                 const ParallelMap& pmap = ParallelMap{});

struct BandTable {
    std::vector<Vec2> ks;
    std::vector<std::vector<double>> energies;
};

BandTable band_path(const PlaneWaveBasis& basis, const FourierPotential& W, double lambda,
                    const std::vector<Vec2>& ks, std::size_t n_bands,
                    const ParallelMap& pmap = ParallelMap{});

// straight segments between corners, per_segment samples each, corners included once
std::vector<Vec2> sample_path(const std::vector<Vec2>& corners, int per_segment);

}  // namespace tbg
