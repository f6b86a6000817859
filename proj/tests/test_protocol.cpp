#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdent/errors.hpp"
#include "qdent/evolve.hpp"
#include "qdent/gates.hpp"
#include "qdent/protocol.hpp"

using namespace qdent;

namespace {

ArmSpec arm(std::size_t bus, double gamma = 0.0) { return ArmSpec{bus, 0.2, 4.0, gamma}; }

Eigen::Vector4cd ket(int index) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(index) = 1.0;
    return v;
}

}  // namespace

TEST(ArmSpec, Validation) {
    EXPECT_EQ(arm(3).n_sites(), 5u);
    EXPECT_THROW(arm(0).validate(), InvalidArgument);
    EXPECT_THROW(arm(2, -0.1).validate(), NegativeRate);
}

TEST(QubitTransferFidelity, Limits) {
    EXPECT_DOUBLE_EQ(qubit_transfer_fidelity(1.0), 1.0);
    EXPECT_DOUBLE_EQ(qubit_transfer_fidelity(0.0), 0.5);
}

TEST(ArmTransfer, ThreeSitesPerfect) {
    const auto r = arm_transfer(arm(1));
    EXPECT_NEAR(std::norm(r.amplitude), 1.0, 1e-10);
    EXPECT_NEAR(r.time_ps, 7.310897, 1e-5);
    EXPECT_NEAR(r.transfer_fidelity, 1.0, 1e-10);
}

TEST(ArmTransfer, SevenSites) {
    const auto r = arm_transfer(arm(5));
    EXPECT_GE(r.transfer_fidelity, 0.94);
    EXPECT_NEAR(r.transfer_fidelity, 0.96005546, 1e-6);
    EXPECT_NEAR(r.end_population, 0.88201726, 1e-6);
    EXPECT_NEAR(r.time_ps, 14.791610, 1e-4);
}

TEST(ArmTransfer, DecayFactorizes) {
    const double gamma = 0.001;
    const auto clean = arm_transfer(arm(1));
    const auto decayed = arm_transfer(arm(1, gamma));
    EXPECT_NEAR(decayed.time_ps, clean.time_ps, 1e-9);
    EXPECT_NEAR(std::norm(decayed.amplitude), std::norm(clean.amplitude) * std::exp(-gamma * clean.time_ps), 1e-9);
    EXPECT_NEAR(decayed.survival, std::exp(-gamma * clean.time_ps), 1e-9);
}

TEST(ArmTransfer, TrajectoryRecorded) {
    const auto r = arm_transfer(arm(2));
    EXPECT_TRUE(r.trajectory.has("P_QDA"));
    EXPECT_TRUE(r.trajectory.has("P_end"));
    ASSERT_TRUE(r.final_state.has_value());
    EXPECT_NEAR(r.final_state->site_population(3), r.end_population, 1e-12);
}

TEST(TransferScan, ResonanceOracles) {
    const double times[] = {5.169585, 7.310897, 9.247634, 11.130644, 12.974151,
                            14.791610, 16.589816, 18.373206, 20.144782, 21.906687};
    const double populations[] = {1.0, 1.0, 0.97275046, 0.94238834, 0.91158756,
                                  0.88201726, 0.85415631, 0.82811464, 0.80384042, 0.78121986};
    for (std::size_t n = 2; n <= 11; ++n) {
        const auto r = chain_first_resonance(n, 0.2);
        EXPECT_NEAR(r.time_ps, times[n - 2], 1e-4) << n;
        EXPECT_NEAR(r.value, populations[n - 2], 1e-6) << n;
    }
}

TEST(DensityMatrix, Validation) {
    EXPECT_THROW(TwoQubitDensityMatrix(Eigen::Matrix4cd::Identity()), InvalidDensityMatrix);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    EXPECT_THROW(TwoQubitDensityMatrix{m}, InvalidDensityMatrix);
    m = Eigen::Matrix4cd::Identity() / 4.0;
    m(0, 1) = 0.1;
    EXPECT_THROW(TwoQubitDensityMatrix{m}, InvalidDensityMatrix);
}

TEST(Concurrence, ReferenceStates) {
    EXPECT_NEAR(concurrence(TwoQubitDensityMatrix::from_pure(phi_plus())), 1.0, 1e-12);
    EXPECT_NEAR(concurrence(TwoQubitDensityMatrix::from_pure(ket(0))), 0.0, 1e-12);
    EXPECT_NEAR(concurrence(TwoQubitDensityMatrix(Eigen::Matrix4cd::Identity() / 4.0)), 0.0, 1e-12);
}

TEST(Concurrence, PureStateFormula) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Vector4cd psi;
        for (int i = 0; i < 4; ++i) psi(i) = Complex(normal(rng), normal(rng));
        psi.normalize();
        const double expected = 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
        EXPECT_NEAR(concurrence(TwoQubitDensityMatrix::from_pure(psi)), expected, 1e-9);
    }
}

TEST(Concurrence, WernerState) {
    for (double p : {0.2, 1.0 / 3.0, 0.5, 0.9}) {
        const Eigen::Matrix4cd rho =
            p * phi_plus() * phi_plus().adjoint() + (1 - p) * Eigen::Matrix4cd::Identity() / 4.0;
        EXPECT_NEAR(concurrence(TwoQubitDensityMatrix(rho)), std::max(0.0, (3 * p - 1) / 2), 1e-9);
    }
}

TEST(BellFidelity, PhaseCorrection) {
    const Eigen::Vector4cd twisted(1 / std::sqrt(2.0), 0, 0, Complex(0, 1) / std::sqrt(2.0));
    const auto rho = TwoQubitDensityMatrix::from_pure(twisted);
    EXPECT_NEAR(bell_fidelity(rho), 0.5, 1e-12);
    EXPECT_NEAR(phase_corrected_bell_fidelity(rho), 1.0, 1e-12);
}

TEST(ReducedState, PerfectDelivery) {
    const auto a = build_basis(3, Sector::at_most(1));
    const auto joint = TwoArmState::from_register(a, a, phi_plus(), 2);
    const auto rho = reduced_two_qubit_state(joint, 2, 2);
    EXPECT_LT((rho.entries() - phi_plus() * phi_plus().adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ReducedState, VacuumProduct) {
    const auto a = build_basis(4, Sector::at_most(1));
    const auto joint = TwoArmState::from_register(a, a, ket(0));
    const auto rho = reduced_two_qubit_state(joint, 3, 3);
    EXPECT_NEAR(rho.entries()(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(concurrence(rho), 0.0, 1e-12);
}

TEST(ReducedState, BusAmplitudeBecomesMixedness) {
    const auto a = build_basis(3, Sector::at_most(1));
    TwoArmState joint{a, a, Eigen::MatrixXcd::Zero(4, 4)};
    const auto vac = static_cast<Eigen::Index>(a->index_of(0));
    const auto bus = static_cast<Eigen::Index>(a->index_of(0b010));
    const auto end = static_cast<Eigen::Index>(a->index_of(0b100));
    joint.amplitudes(vac, vac) = 1 / std::sqrt(2.0);
    joint.amplitudes(end, end) = 0.5;
    joint.amplitudes(bus, end) = 0.5;
    const auto rho = reduced_two_qubit_state(joint, 2, 2).entries();
    EXPECT_NEAR(rho(1, 1).real(), 0.25, 1e-15);
    EXPECT_NEAR(rho(3, 3).real(), 0.25, 1e-15);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
}

TEST(ReducedState, RejectsWrongSector) {
    const auto a = build_basis(3, Sector::exactly(1));
    EXPECT_THROW(TwoArmState::from_register(a, a, phi_plus()), SectorViolation);
}

TEST(Budget, ReferenceProduct) {
    const double total = fidelity_budget(0.94, 0.99, 0.99, 0.99);
    EXPECT_NEAR(total, 0.9121, 1e-4);
    EXPECT_DOUBLE_EQ(fidelity_budget(1, 1, 1, 1), 1.0);
    EXPECT_NEAR(fidelity_budget(0.94, 0.99, 0.99, std::exp(-0.02)), 0.90305, 1e-5);
    EXPECT_THROW(fidelity_budget(1.1, 1, 1, 1), OutOfRange);
    EXPECT_THROW(fidelity_budget(0.9, -0.1, 1, 1), OutOfRange);
}

TEST(Budget, DecayConventions) {
    EXPECT_NEAR(amplitude_decay_factor(1.0 / reference_t1_ps, reference_elapsed_ps), 0.9900, 1e-4);
    EXPECT_NEAR(population_decay_factor(1.0 / reference_t1_ps, reference_elapsed_ps), 0.9802, 1e-4);
    EXPECT_THROW(amplitude_decay_factor(-1.0, 1.0), NegativeRate);
}

TEST(Timeline, Ordering) {
    ProtocolTimeline timeline;
    timeline.add({1, TimelineSegment::Kind::Driven, 0.2, "a"});
    timeline.add({4, TimelineSegment::Kind::Unblocked, 10.0, "b"});
    EXPECT_DOUBLE_EQ(timeline.total_ps(), 10.2);
    EXPECT_THROW(timeline.add({3, TimelineSegment::Kind::Driven, 0.2, "c"}), InvalidArgument);
    EXPECT_THROW(timeline.add({5, TimelineSegment::Kind::Driven, 0.0, "d"}), InvalidArgument);
}

TEST(Distribution, FiveSiteArms) {
    const auto report = run_distribution(arm(3), arm(3));
    EXPECT_GE(report.concurrence, 0.85);
    EXPECT_NEAR(report.concurrence, 0.88809578, 1e-6);
}

TEST(Distribution, ThreeSiteArmsArePerfect) {
    const auto report = run_distribution(arm(1), arm(1));
    EXPECT_NEAR(report.concurrence, 1.0, 1e-6);
    EXPECT_NEAR(report.bell_fidelity_phase_corrected, 1.0, 1e-6);
    EXPECT_NEAR(report.elapsed_ps, 7.310897, 1e-5);
}

TEST(Distribution, SevenSiteArms) {
    const auto report = run_distribution(arm(5), arm(5));
    EXPECT_NEAR(report.concurrence, 0.77795445, 1e-6);
    EXPECT_LE(report.elapsed_ps, 20.0);
}

TEST(Distribution, ArmWiseSeparability) {
    const auto a = arm(3);
    const auto b = arm(4);
    const auto report = run_distribution(a, b);
    const double t = report.elapsed_ps;
    const auto basis_a = build_basis(a.n_sites(), Sector::at_most(1));
    const auto basis_b = build_basis(b.n_sites(), Sector::at_most(1));
    const std::vector<double> none_a(a.n_sites(), 0.0), none_b(b.n_sites(), 0.0);
    const auto u_a = evolution_operator(chain_hamiltonian(a.chain(), *basis_a), none_a, *basis_a, t);
    const auto u_b = evolution_operator(chain_hamiltonian(b.chain(), *basis_b), none_b, *basis_b, t);
    const auto initial = TwoArmState::from_register(basis_a, basis_b, phi_plus());
    const Eigen::MatrixXcd expected = u_a * initial.amplitudes * u_b.transpose();
    EXPECT_LT((report.joint_no_jump.amplitudes - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Distribution, ConcurrenceBoundedByAmplitudes) {
    for (std::size_t bus : {1, 2, 3, 4, 5}) {
        const auto report = run_distribution(arm(bus), arm(bus));
        const double bound = std::sqrt(report.arm_a.end_population * report.arm_b.end_population);
        EXPECT_LE(report.concurrence, bound + 1e-6) << bus;
        EXPECT_GE(report.concurrence, 0.0);
    }
}

TEST(Distribution, DecayBudget) {
    const auto report = run_distribution(arm(5, 0.001), arm(5, 0.001));
    EXPECT_NEAR(report.budget.decay, std::exp(-0.001 * report.elapsed_ps / 2), 1e-12);
    EXPECT_NEAR(report.decay_factor_population, std::exp(-0.001 * report.elapsed_ps), 1e-12);
    EXPECT_NEAR(report.delivered.entries().trace().real(), 1.0, 1e-10);
    EXPECT_LT(report.concurrence, 0.77795445);
    const auto text = report.to_text();
    EXPECT_NE(text.find("reference_budget = 0.94 x 0.99 x 0.99 x 0.99 = 0.9121 (91%)"), std::string::npos);
    EXPECT_NE(text.find("0.9900"), std::string::npos);
    EXPECT_NE(text.find("0.9802"), std::string::npos);
}

TEST(Distribution, ExplicitBlockingLeaksLittle) {
    ProtocolOptions options;
    options.ideal_controls = false;
    options.explicit_blocking = true;
    const auto report = run_distribution(arm(3), arm(3), options);
    EXPECT_LT(report.arm_a.prep_leakage, 0.01);
    EXPECT_LT(report.arm_b.prep_leakage, 0.01);
    EXPECT_GT(report.control_switch_fidelity, 0.9);
    double sum = 0.0;
    int last_step = 0;
    for (const auto& segment : report.timeline.segments) {
        sum += segment.duration_ps;
        EXPECT_GE(segment.step, last_step);
        last_step = segment.step;
    }
    EXPECT_EQ(report.elapsed_ps, sum);
    EXPECT_EQ(report.timeline.segments.size(), 5u);
}

TEST(Distribution, StrictTiming) {
    ProtocolOptions options;
    options.strict_timing = true;
    EXPECT_THROW(run_distribution(arm(3), arm(5), options), ArmMismatch);
    options.reblock_tolerance_ps = 5.0;
    const auto report = run_distribution(arm(3), arm(5), options);
    EXPECT_NEAR(report.elapsed_ps, 14.791610, 1e-4);
    // The faster arm is parked at its resonance, so its end dot keeps the resonance population.
    const auto relaxed = run_distribution(arm(3), arm(5));
    EXPECT_GT(report.concurrence, relaxed.concurrence);
}

TEST(Distribution, CsvRow) {
    const auto report = run_distribution(arm(2), arm(2));
    EXPECT_EQ(DistributionReport::csv_header(),
              "arm_lengths,V_F_meV,shift_ratio,transfer_A,transfer_B,leakage,concurrence,elapsed_ps,budget_total");
    EXPECT_EQ(report.csv_row().rfind("2x2,", 0), 0u);
}
