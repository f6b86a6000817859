// Randomized invariants, 100 seeded instances each.
#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "qdent/evolve.hpp"
#include "qdent/gates.hpp"
#include "qdent/protocol.hpp"

using namespace qdent;

namespace {

constexpr int kInstances = 100;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t size(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    ChainSpec chain(std::size_t n) {
        std::vector<DotSpec> dots(n);
        for (auto& d : dots) d.exciton_energy_mev = uniform(-0.5, 0.5);
        std::vector<double> couplings(n - 1);
        for (auto& v : couplings) v = uniform(0.05, 0.4);
        return ChainSpec(dots, couplings);
    }

    Sector sector(std::size_t n) {
        switch (size(0, 2)) {
            case 0: return n <= 8 ? Sector::all() : Sector::at_most(2);
            case 1: return Sector::exactly(static_cast<unsigned>(size(1, std::min<std::size_t>(n, 3))));
            default: return Sector::at_most(static_cast<unsigned>(size(1, 2)));
        }
    }

    StateVector state(const BasisPtr& basis) {
        std::normal_distribution<double> normal;
        Eigen::VectorXcd v(static_cast<Eigen::Index>(basis->dimension()));
        for (auto& a : v) a = Complex(normal(rng_), normal(rng_));
        return StateVector(basis, v.normalized());
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

std::vector<double> sector_populations(const StateVector& psi) {
    std::vector<double> out(psi.basis().n_dots() + 1);
    for (unsigned k = 0; k < out.size(); ++k) out[k] = psi.sector_population(k);
    return out;
}

}  // namespace

TEST(Properties, GeneratorsAreHermitian) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(1000 + i);
        const std::size_t n = g.size(1, 7);
        const auto basis = build_basis(n, Sector::all());
        const auto h = chain_hamiltonian(g.chain(n), *basis);
        EXPECT_LE(hermiticity_error(h.entries()), 1e-12);
        const auto blocked = apply_block(h, *basis, interior_block(n, g.uniform(-5, 5)));
        EXPECT_LE(hermiticity_error(blocked.entries()), 1e-12);
        DriveSpec drive;
        drive.target_sites = {g.size(0, n - 1)};
        drive.rabi_coupling_mev = g.uniform(0.0, 3.0);
        drive.detuning_mev = {g.uniform(-1, 1)};
        drive.phase_rad = g.uniform(0, 6.3);
        drive.duration_ps = 1.0;
        EXPECT_LE(hermiticity_error(drive_hamiltonian(drive, *basis, 0.5).entries()), 1e-12);
    }
}

TEST(Properties, StaticNormConservation) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(2000 + i);
        const std::size_t n = g.size(2, 10);
        const auto basis = build_basis(n, g.sector(n));
        const auto psi = g.state(basis);
        const auto out = propagate_static(chain_hamiltonian(g.chain(n), *basis), psi, g.uniform(0, 50));
        EXPECT_LT(std::abs(out.norm() - 1.0), 1e-9) << "seed " << 2000 + i;
    }
}

TEST(Properties, DrivenNormConservation) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(3000 + i);
        const std::size_t n = g.size(1, 4);
        const auto basis = build_basis(n, Sector::all());
        const auto h = chain_hamiltonian(g.chain(n), *basis);
        DriveSpec drive;
        for (std::size_t s = 0; s < n; ++s)
            if (g.uniform(0, 1) < 0.6 || s == 0) drive.target_sites.push_back(s);
        drive.rabi_coupling_mev = g.uniform(0.1, 3.0);
        drive.detuning_mev = {g.uniform(-0.5, 0.5)};
        drive.start_ps = g.uniform(0.0, 0.2);
        drive.duration_ps = g.uniform(0.1, 0.6);
        if (g.uniform(0, 1) < 0.5) drive.envelope = Envelope::gaussian(g.uniform(0.05, 0.2));
        const auto generator = make_driven_generator(h, {drive}, *basis);
        DrivenOptions options;
        options.keep_states = false;
        const std::array obs{norm_observable()};
        const auto traj = propagate_driven(generator, g.state(basis), uniform_grid(0.0, 1.0, 0.1), obs, options);
        for (double norm : traj.series("norm")) EXPECT_LT(std::abs(norm - 1.0), 1e-7) << "seed " << 3000 + i;
    }
}

TEST(Properties, ExcitationSectorConservation) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(4000 + i);
        const std::size_t n = g.size(2, 8);
        const auto basis = build_basis(n, Sector::all());
        const auto h = apply_block(chain_hamiltonian(g.chain(n), *basis), *basis, interior_block(n, g.uniform(0, 4)));
        const auto psi = g.state(basis);
        const auto before = sector_populations(psi);
        const auto after = sector_populations(propagate_static(h, psi, g.uniform(0, 40)));
        for (std::size_t k = 0; k < before.size(); ++k) EXPECT_NEAR(before[k], after[k], 1e-9);
    }
}

TEST(Properties, PropagatorComposition) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(5000 + i);
        const std::size_t n = g.size(2, 9);
        const auto basis = build_basis(n, g.sector(n));
        const auto h = chain_hamiltonian(g.chain(n), *basis);
        const auto psi = g.state(basis);
        const double t1 = g.uniform(0, 20), t2 = g.uniform(0, 20);
        const auto direct = propagate_static(h, psi, t1 + t2);
        const auto stepped = propagate_static(h, propagate_static(h, psi, t1), t2);
        EXPECT_LT((direct.amplitudes() - stepped.amplitudes()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Properties, MirrorSymmetry) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(6000 + i);
        const std::size_t n = g.size(2, 16);
        const double v = g.uniform(0.05, 0.5) * (g.uniform(0, 1) < 0.5 ? -1 : 1);
        const auto basis = build_basis(n, Sector::exactly(1));
        const auto h = chain_hamiltonian(ChainSpec::uniform(n, v, g.uniform(-1, 1)), *basis);
        const auto grid = uniform_grid(0.0, g.uniform(5, 30), 0.25);
        const std::array forward{site_population_observable("P", n - 1)};
        const std::array backward{site_population_observable("P", 0)};
        const std::array<std::size_t, 1> first{0}, last{n - 1};
        const auto a = static_trajectory(h, basis_state(basis, occupation_of(first)), grid, forward, false);
        const auto b = static_trajectory(h, basis_state(basis, occupation_of(last)), grid, backward, false);
        for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(a.series("P")[k], b.series("P")[k], 1e-9);
    }
}

TEST(Properties, DecayFactorization) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(7000 + i);
        const std::size_t n = g.size(1, 7);
        const unsigned k = static_cast<unsigned>(g.size(0, n));
        const auto basis = build_basis(n, Sector::exactly(k));
        const double gamma = g.uniform(0.0, 0.05);
        const std::vector<double> gammas(n, gamma);
        const double t = g.uniform(0, 60);
        const auto out = propagate_decaying(chain_hamiltonian(g.chain(n), *basis), gammas, g.state(basis), t);
        EXPECT_NEAR(out.norm() * out.norm(), std::exp(-gamma * t * k), 1e-9);
    }
}

TEST(Properties, BlockingMonotonicity) {
    const double ratios[] = {0, 2, 5, 10, 20, 40};
    for (int i = 0; i < kInstances; ++i) {
        Gen g(8000 + i);
        const std::size_t n = g.size(3, 9);
        const double v = g.uniform(0.1, 0.4);
        double previous = -1.0;
        for (double ratio : ratios) {
            const double overlap = confinement_overlap(n, v, ratio, 0.02 * 0.2 / v).minimum.value;
            EXPECT_GE(overlap, previous - 1e-9) << "n " << n << " ratio " << ratio;
            previous = overlap;
        }
    }
}

TEST(Properties, ReducedStateValidity) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(9000 + i);
        const auto a = build_basis(g.size(2, 8), Sector::at_most(1));
        const auto b = build_basis(g.size(2, 8), Sector::at_most(1));
        std::normal_distribution<double> normal;
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(a->dimension()), static_cast<Eigen::Index>(b->dimension()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = Complex(normal(g.rng()), normal(g.rng()));
        m /= m.norm();
        const TwoArmState joint{a, b, m};
        const auto rho = reduced_two_qubit_state(joint, a->n_dots() - 1, b->n_dots() - 1).entries();
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
        EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(rho);
        EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-10);
        const double c = concurrence(TwoQubitDensityMatrix(rho));
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0 + 1e-12);
    }
}

TEST(Properties, ConcurrenceOfRandomMixtures) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(10000 + i);
        std::normal_distribution<double> normal;
        Eigen::Matrix4cd a;
        for (auto& x : a.reshaped()) x = Complex(normal(g.rng()), normal(g.rng()));
        Eigen::Matrix4cd rho = a * a.adjoint();
        rho /= rho.trace();
        rho = 0.5 * (rho + rho.adjoint()).eval();
        const double c = concurrence(TwoQubitDensityMatrix(rho));
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        // Local unitaries leave concurrence unchanged.
        const Eigen::Matrix4cd u = (on_qubit(hadamard(), 0) * cnot(0, 1) * on_qubit(hadamard(), 0)).entries();
        const auto local = on_qubit(hadamard(), 1).entries();
        EXPECT_NEAR(concurrence(TwoQubitDensityMatrix(local * rho * local.adjoint())), c, 1e-9);
        EXPECT_LE(concurrence(TwoQubitDensityMatrix(u * rho * u.adjoint())), 1.0);
    }
}

TEST(Properties, SwapInRandomStates) {
    const auto s = swap_in_sequence();
    for (int i = 0; i < kInstances; ++i) {
        std::mt19937_64 rng(11000 + i);
        const auto q = random_qubit_state(rng);
        const Eigen::Vector4cd in(q(0), 0, q(1), 0);
        const Eigen::Vector4cd out(q(0), q(1), 0, 0);
        EXPECT_LT(phase_insensitive_distance(out, s * in), 1e-10);
    }
}

TEST(Properties, BudgetSymmetricAndMonotone) {
    for (int i = 0; i < kInstances; ++i) {
        Gen g(12000 + i);
        std::array<double, 4> f{};
        for (auto& x : f) x = g.uniform(0, 1);
        const double base = fidelity_budget(f[0], f[1], f[2], f[3]);
        auto perm = f;
        std::shuffle(perm.begin(), perm.end(), g.rng());
        EXPECT_NEAR(fidelity_budget(perm[0], perm[1], perm[2], perm[3]), base, 1e-15);
        const std::size_t which = g.size(0, 3);
        auto raised = f;
        raised[which] = g.uniform(f[which], 1.0);
        EXPECT_GE(fidelity_budget(raised[0], raised[1], raised[2], raised[3]), base);
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, 1.0);
    }
}
