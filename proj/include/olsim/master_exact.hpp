// master_exact.hpp - brute-force density-matrix evolution for small lattices
//
// drho/dt = sum_jl Gamma_jl (a_l rho a_j^+ - a_j^+ a_l rho) + H.c.
// The dissipator only lowers the atom number, so a state of fixed N stays
// block diagonal in N and each block rho_N is fed by rho_{N+1}:
//   drho_N/dt = -(K rho_N + rho_N K^+) + sum_jl 2 D_jl a_l rho_{N+1} a_j^+,
// with K = sum_jl Gamma_jl a_j^+ a_l and D = (Gamma + Gamma^+)/2. Since a_l
// maps each Fock state to at most one state, the jump term is a short loop
// over raised states for each matrix element.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "olsim/collective.hpp"
#include "olsim/errors.hpp"
#include "olsim/ode.hpp"

namespace olsim {

struct ExactOptions {
    int max_spin_sites{12};
    int max_excitations{8};   // bosons
    long max_block_dim{4096};
    bool include_dispersive{true};
    ode::Options ode{1e-10, 1e-13};
    bool keep_coherences{false};
};

/// Initial pure state of fixed atom number. Either a Fock configuration or
/// the symmetric state proportional to (sum_j x_j^+)^N |0>.
struct ExactInitial {
    enum class Type { fock, symmetric } type{Type::fock};
    std::vector<int> occupations; // fock
    int atoms{0};                 // symmetric

    static ExactInitial mott(int sites, int filling = 1) {
        return {Type::fock, std::vector<int>(static_cast<std::size_t>(sites), filling), sites * filling};
    }
    static ExactInitial symmetric(int atoms) { return {Type::symmetric, {}, atoms}; }
};

struct ExactResult {
    EmissionRecord trace;
    std::vector<double> trace_norm;     // tr rho
    std::vector<double> min_eigenvalue; // smallest eigenvalue over blocks
    std::vector<Eigen::MatrixXcd> coherences;
    ode::Stats stats;
};

namespace detail {

class FockSectors {
public:
    FockSectors(int sites, int site_cap, int max_atoms) : sites_(sites), cap_(site_cap) {
        for (int n = 0; n <= max_atoms; ++n) {
            std::vector<std::vector<int>> states;
            std::vector<int> occ(static_cast<std::size_t>(sites), 0);
            enumerate(0, n, occ, states);
            std::map<std::vector<int>, int> index;
            for (std::size_t i = 0; i < states.size(); ++i)
                index[states[i]] = static_cast<int>(i);
            basis_.push_back(std::move(states));
            index_.push_back(std::move(index));
        }
    }

    int max_atoms() const { return static_cast<int>(basis_.size()) - 1; }
    long dim(int n) const { return static_cast<long>(basis_[n].size()); }
    const std::vector<std::vector<int>>& basis(int n) const { return basis_[n]; }
    int find(int n, const std::vector<int>& occ) const { return index_[n].at(occ); }

    /// a_l restricted to sector n -> n-1.
    Eigen::SparseMatrix<cplx> lowering(int l, int n) const {
        Eigen::SparseMatrix<cplx> a(dim(n - 1), dim(n));
        std::vector<Eigen::Triplet<cplx>> trip;
        for (std::size_t i = 0; i < basis_[n].size(); ++i) {
            auto occ = basis_[n][i];
            if (occ[l] == 0)
                continue;
            const double amp = std::sqrt(static_cast<double>(occ[l]));
            --occ[l];
            trip.emplace_back(find(n - 1, occ), static_cast<int>(i), amp);
        }
        a.setFromTriplets(trip.begin(), trip.end());
        return a;
    }

private:
    void enumerate(int site, int left, std::vector<int>& occ, std::vector<std::vector<int>>& out) {
        if (site == sites_) {
            if (left == 0)
                out.push_back(occ);
            return;
        }
        for (int k = 0; k <= std::min(cap_, left); ++k) {
            occ[site] = k;
            enumerate(site + 1, left - k, occ, out);
        }
        occ[site] = 0;
    }

    int sites_;
    int cap_;
    std::vector<std::vector<std::vector<int>>> basis_;
    std::vector<std::map<std::vector<int>, int>> index_;
};

} // namespace detail

inline ExactResult evolve_master_exact(const CouplingMatrix& m, EmitterKind kind, const ExactInitial& init,
                                       const std::vector<double>& times, const ExactOptions& opt = {}) {
    const int n_sites = m.size();
    int n_atoms = init.type == ExactInitial::Type::fock
                      ? std::accumulate(init.occupations.begin(), init.occupations.end(), 0)
                      : init.atoms;
    if (init.type == ExactInitial::Type::fock && static_cast<int>(init.occupations.size()) != n_sites)
        throw InvalidParams("occupation vector length differs from the number of sites");
    if (kind == EmitterKind::spin && n_sites > opt.max_spin_sites)
        throw DimensionCap(std::to_string(n_sites) + " spins exceed the cap of " + std::to_string(opt.max_spin_sites));
    if (kind == EmitterKind::boson && n_atoms > opt.max_excitations)
        throw DimensionCap(std::to_string(n_atoms) + " bosons exceed the cap of " +
                           std::to_string(opt.max_excitations));
    const int site_cap = kind == EmitterKind::spin ? 1 : n_atoms;
    if (kind == EmitterKind::spin)
        for (int o : init.occupations)
            if (o > 1)
                throw InvalidParams("hard-core sites hold at most one atom");
    if (n_atoms > n_sites * site_cap)
        throw InvalidParams("more atoms than the lattice can hold");

    const detail::FockSectors sectors(n_sites, site_cap, n_atoms);
    for (int n = 0; n <= n_atoms; ++n)
        if (sectors.dim(n) > opt.max_block_dim)
            throw DimensionCap("sector N = " + std::to_string(n) + " has dimension " + std::to_string(sectors.dim(n)));

    const Eigen::MatrixXcd g = opt.include_dispersive ? m.gamma_full : m.gamma;
    const Eigen::MatrixXcd d = 0.5 * (g + g.adjoint());

    // per-sector operators
    std::vector<std::vector<Eigen::SparseMatrix<cplx>>> lower(n_atoms + 1); // a_l : n -> n-1
    std::vector<Eigen::SparseMatrix<cplx>> kmat(n_atoms + 1);
    for (int n = 1; n <= n_atoms; ++n)
        for (int l = 0; l < n_sites; ++l)
            lower[n].push_back(sectors.lowering(l, n));
    // for every state x of sector n: the sites l that can take one more atom,
    // the index of x + e_l in sector n+1 and the amplitude sqrt(x_l + 1)
    struct Raise {
        int site;
        int target;
        double amp;
    };
    std::vector<std::vector<std::vector<Raise>>> raise(n_atoms);
    for (int n = 0; n < n_atoms; ++n) {
        raise[n].resize(static_cast<std::size_t>(sectors.dim(n)));
        for (long x = 0; x < sectors.dim(n); ++x)
            for (int l = 0; l < n_sites; ++l) {
                auto occ = sectors.basis(n)[static_cast<std::size_t>(x)];
                if (occ[l] >= site_cap)
                    continue;
                ++occ[l];
                raise[n][x].push_back({l, sectors.find(n + 1, occ), std::sqrt(static_cast<double>(occ[l]))});
            }
    }
    for (int n = 1; n <= n_atoms; ++n) {
        Eigen::SparseMatrix<cplx> k(sectors.dim(n), sectors.dim(n));
        for (int j = 0; j < n_sites; ++j)
            for (int l = 0; l < n_sites; ++l)
                if (g(j, l) != 0.0)
                    k += g(j, l) * Eigen::SparseMatrix<cplx>(Eigen::SparseMatrix<cplx>(lower[n][j].adjoint()) * lower[n][l]);
        k.prune(cplx(0.0));
        kmat[n] = k;
    }
    Eigen::MatrixXcd d2 = 2.0 * d;

    std::vector<long> offset(n_atoms + 2, 0);
    for (int n = 0; n <= n_atoms; ++n)
        offset[n + 1] = offset[n] + sectors.dim(n) * sectors.dim(n);
    auto block = [&](const ode::State& y, int n) {
        return Eigen::Map<const Eigen::MatrixXcd>(y.data() + offset[n], sectors.dim(n), sectors.dim(n));
    };

    // initial pure state in the top sector
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sectors.dim(n_atoms));
    if (init.type == ExactInitial::Type::fock) {
        psi(sectors.find(n_atoms, init.occupations)) = 1.0;
    } else {
        for (long i = 0; i < sectors.dim(n_atoms); ++i) {
            double w = 1.0;
            for (int o : sectors.basis(n_atoms)[static_cast<std::size_t>(i)])
                w /= std::sqrt(std::tgamma(o + 1.0));
            psi(i) = w;
        }
        psi.normalize();
    }
    ode::State y = ode::State::Zero(offset[n_atoms + 1]);
    Eigen::Map<Eigen::MatrixXcd>(y.data() + offset[n_atoms], sectors.dim(n_atoms), sectors.dim(n_atoms)) =
        psi * psi.adjoint();

    ode::Rhs rhs = [&](double, const ode::State& yy, ode::State& dy) {
        dy.resize(yy.size());
        for (int n = 0; n <= n_atoms; ++n) {
            const auto r = block(yy, n);
            Eigen::Map<Eigen::MatrixXcd> out(dy.data() + offset[n], sectors.dim(n), sectors.dim(n));
            if (n == 0) {
                out.setZero();
            } else {
                const Eigen::MatrixXcd kr = kmat[n] * r;
                out = -kr - kr.adjoint();
            }
            if (n == n_atoms)
                continue;
            // sum_jl 2 D_jl a_l rho_{n+1} a_j^+
            const auto up = block(yy, n + 1);
            const long dn = sectors.dim(n);
            for (long c = 0; c < dn; ++c)
                for (long x = 0; x < dn; ++x) {
                    cplx acc(0.0);
                    for (const auto& rx : raise[n][x])
                        for (const auto& rc : raise[n][c])
                            acc += d2(rc.site, rx.site) * (rx.amp * rc.amp) * up(rx.target, rc.target);
                    out(x, c) += acc;
                }
        }
    };

    ExactResult res;
    const auto states = ode::integrate(rhs, y, 0.0, times, opt.ode, &res.stats);

    res.trace.n_initial = n_atoms;
    res.trace.num_sites = n_sites;
    res.trace.gamma0 = m.diagonal_rate;
    ode::State dy;
    for (std::size_t i = 0; i < times.size(); ++i) {
        rhs(times[i], states[i], dy);
        double tr = 0.0, num = 0.0, dnum = 0.0, min_ev = 1.0;
        Eigen::MatrixXcd coh = Eigen::MatrixXcd::Zero(n_sites, n_sites);
        for (int n = 0; n <= n_atoms; ++n) {
            const Eigen::MatrixXcd r = block(states[i], n);
            const double t_n = r.trace().real();
            tr += t_n;
            num += n * t_n;
            dnum += n * Eigen::Map<const Eigen::MatrixXcd>(dy.data() + offset[n], sectors.dim(n), sectors.dim(n))
                            .trace()
                            .real();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> bes(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
            min_ev = std::min(min_ev, bes.eigenvalues().minCoeff());
            if (opt.keep_coherences && n > 0)
                for (int j = 0; j < n_sites; ++j)
                    for (int l = 0; l < n_sites; ++l)
                        coh(j, l) += (lower[n][l] * r * Eigen::MatrixXcd(lower[n][j].adjoint())).trace();
        }
        res.trace.times.push_back(times[i]);
        res.trace.n_total.push_back(num);
        res.trace.rate.push_back(-dnum);
        res.trace_norm.push_back(tr);
        res.min_eigenvalue.push_back(min_ev);
        if (opt.keep_coherences)
            res.coherences.push_back(coh);
    }
    return res;
}

} // namespace olsim
