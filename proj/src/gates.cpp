#include "qdent/gates.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qdent/evolve.hpp"
#include "qdent/hamiltonian.hpp"

namespace qdent {

double unitarity_error(const Eigen::MatrixXcd& u) {
    const auto n = u.rows();
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

TwoQubitUnitary::TwoQubitUnitary(const Eigen::Matrix4cd& entries) : entries_(entries) {
    const double err = unitarity_error(entries_);
    if (!(err <= tolerance)) throw InvalidArgument(fmt::format("matrix is not unitary (error {:.3e})", err));
}

Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd h;
    h << 1.0, 1.0, 1.0, -1.0;
    return h / std::numbers::sqrt2;
}

TwoQubitUnitary on_qubit(const Eigen::Matrix2cd& gate, int qubit) {
    if (qubit != 0 && qubit != 1) throw OutOfRange("qubit index must be 0 or 1");
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    // <ab| G |cd> with G acting on one factor only.
                    const Complex factor = (qubit == 0) ? (b == d ? gate(a, c) : Complex{0.0})
                                                        : (a == c ? gate(b, d) : Complex{0.0});
                    m(2 * a + b, 2 * c + d) = factor;
                }
    return TwoQubitUnitary(m);
}

TwoQubitUnitary controlled_phase() {
    Eigen::Matrix4cd p = Eigen::Matrix4cd::Identity();
    p(3, 3) = -1.0;
    return TwoQubitUnitary(p);
}

TwoQubitUnitary cnot(int control, int target) {
    if (control == target) throw InvalidArgument("control and target must differ");
    if ((control != 0 && control != 1) || (target != 0 && target != 1))
        throw OutOfRange("qubit index must be 0 or 1");
    const auto h_target = on_qubit(hadamard(), target);
    return h_target * controlled_phase() * h_target;
}

TwoQubitUnitary swap_in_sequence() {
    const auto h_i = on_qubit(hadamard(), 0);
    const auto h_j = on_qubit(hadamard(), 1);
    const auto p = controlled_phase();
    return h_i * p * h_i * h_j * p * h_j;
}

Eigen::Vector4cd phi_plus() {
    Eigen::Vector4cd psi(1.0, 0.0, 0.0, 1.0);
    return psi / std::numbers::sqrt2;
}

Eigen::Vector4cd bell_prepare_ideal(int control) {
    const int target = 1 - control;
    Eigen::Vector4cd vacuum = Eigen::Vector4cd::Zero();
    vacuum(0) = 1.0;
    return cnot(control, target) * (on_qubit(hadamard(), control) * vacuum);
}

double state_fidelity(const Eigen::Vector4cd& ideal, const Eigen::Vector4cd& actual) {
    return std::norm(ideal.dot(actual));
}

double phase_insensitive_distance(const Eigen::Vector4cd& expected, const Eigen::Vector4cd& actual) {
    const Complex overlap = expected.dot(actual);
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0};
    return (actual - phase * expected).norm();
}

Eigen::Vector2cd random_qubit_state(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Vector2cd psi;
    for (int k = 0; k < 2; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        psi(k) = Complex(re, im);
    }
    return psi.normalized();
}

double BellPrepSpec::pulse_a_ps() const {
    return duration_a_ps > 0.0 ? duration_a_ps : std::numbers::pi * units::hbar / (4.0 * omega_a_mev);
}

double BellPrepSpec::pulse_b_ps() const {
    return duration_b_ps > 0.0 ? duration_b_ps : std::numbers::pi * units::hbar / (2.0 * omega_b_mev);
}

void BellPrepSpec::validate() const {
    if (!(coulomb_shift_mev >= 0.0)) throw InvalidArgument("Coulomb shift must be >= 0");
    if (!(omega_a_mev > 0.0) || !(omega_b_mev > 0.0)) throw InvalidArgument("pulse couplings must be > 0");
    if (duration_a_ps < 0.0 || duration_b_ps < 0.0) throw InvalidArgument("pulse durations must be > 0");
    if (!(dt_max_ps > 0.0)) throw InvalidArgument("dt_max must be > 0");
}

BellPrepResult bell_prepare_pulsed(const BellPrepSpec& spec) {
    spec.validate();
    // Dot 0 = QDA, dot 1 = QDB. Each dot sits in the frame of its own laser colour;
    // B's colour is resonant with the conditional transition E_B + dE_AB, so with A
    // empty the B transition is detuned by -dE_AB.
    const auto basis = build_basis(2, Sector::all());
    Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(4, 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
        const auto s = basis->bitstring_of(static_cast<std::size_t>(j));
        const bool a = s & 1U;
        const bool b = s & 2U;
        frame(j, j) = (b ? -spec.coulomb_shift_mev : 0.0) + (a && b ? spec.coulomb_shift_mev : 0.0);
    }
    const HermitianMatrix static_part(frame);

    const double t_a = spec.pulse_a_ps();
    const double t_b = spec.pulse_b_ps();
    DriveSpec pulse_a;
    pulse_a.target_sites = {0};
    pulse_a.rabi_coupling_mev = spec.omega_a_mev;
    pulse_a.start_ps = 0.0;
    pulse_a.duration_ps = t_a;
    pulse_a.phase_rad = 0.5 * std::numbers::pi;
    DriveSpec pulse_b = pulse_a;
    pulse_b.target_sites = {1};
    pulse_b.rabi_coupling_mev = spec.omega_b_mev;
    pulse_b.start_ps = t_a;
    pulse_b.duration_ps = t_b;

    const auto generator = make_driven_generator(static_part, {pulse_a, pulse_b}, *basis);
    const std::vector<double> grid{0.0, t_a, t_a + t_b};
    DrivenOptions options;
    options.dt_max_ps = spec.dt_max_ps;
    options.keep_states = true;
    const auto trajectory = propagate_driven(generator, basis_state(basis, 0), grid, {}, options);
    const auto& final_state = trajectory.states().back();

    // Chain ordering (A = LSB) to register ordering |A B> = 2 A + B.
    BellPrepResult result;
    for (Occupation s = 0; s < 4; ++s) {
        const int a = static_cast<int>(s & 1U);
        const int b = static_cast<int>((s >> 1) & 1U);
        result.state(2 * a + b) = final_state.amplitude(s);
    }
    result.fidelity = state_fidelity(phi_plus(), result.state);
    result.duration_ps = t_a + t_b;
    return result;
}

bool GateCheckReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed()) return false;
    return true;
}

std::string GateCheckReport::to_text() const {
    std::string text;
    for (const auto& c : checks)
        text += fmt::format("{} {:<36} error = {:.3e}  tol = {:.1e}\n", c.passed() ? "PASS" : "FAIL",
                            c.name, c.error, c.tolerance);
    text += fmt::format("{}\n", passed() ? "all gate checks passed" : "gate checks FAILED");
    return text;
}

GateCheckReport run_gate_checks(std::uint64_t seed, double tolerance, std::size_t random_states) {
    GateCheckReport report;
    auto add = [&](std::string name, double error) {
        report.checks.push_back({std::move(name), error, tolerance});
    };
    const Eigen::Matrix2cd h = hadamard();
    const Eigen::Vector2cd zero(1.0, 0.0);
    const Eigen::Vector2cd one(0.0, 1.0);
    add("H unitary", unitarity_error(h));
    add("H|0> = (|0>+|1>)/sqrt2", (h * zero - Eigen::Vector2cd(1.0, 1.0) / std::numbers::sqrt2).norm());
    add("H|1> = (|0>-|1>)/sqrt2", (h * one - Eigen::Vector2cd(1.0, -1.0) / std::numbers::sqrt2).norm());
    add("H H = I", (h * h - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());

    const auto p = controlled_phase();
    Eigen::Vector4cd e11 = Eigen::Vector4cd::Zero();
    e11(3) = 1.0;
    Eigen::Vector4cd e00 = Eigen::Vector4cd::Zero();
    e00(0) = 1.0;
    Eigen::Vector4cd e10 = Eigen::Vector4cd::Zero();
    e10(2) = 1.0;
    add("P|11> = -|11>", (p * e11 + e11).norm());
    add("P|00> = |00>", (p * e00 - e00).norm());
    add("P P = I", ((p * p).entries() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff());

    Eigen::Matrix4cd cnot_table = Eigen::Matrix4cd::Zero();
    cnot_table(0, 0) = cnot_table(1, 1) = cnot_table(2, 3) = cnot_table(3, 2) = 1.0;
    add("CNOT(0->1) = H_t P H_t", (cnot(0, 1).entries() - cnot_table).cwiseAbs().maxCoeff());
    add("CNOT|10> = |11>", (cnot(0, 1) * e10 - e11).norm());
    add("CNOT|00> = |00>", (cnot(0, 1) * e00 - e00).norm());

    const auto s = swap_in_sequence();
    add("SWAP-in unitary", unitarity_error(s.entries()));
    add("SWAP-in |00> = |00>", phase_insensitive_distance(e00, s * e00));
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < random_states; ++k) {
        const Eigen::Vector2cd psi = random_qubit_state(rng);
        Eigen::Vector4cd input = Eigen::Vector4cd::Zero();
        input(0) = psi(0);  // |psi>|0>
        input(2) = psi(1);
        Eigen::Vector4cd expected = Eigen::Vector4cd::Zero();
        expected(0) = psi(0);  // |0>|psi>
        expected(1) = psi(1);
        worst = std::max(worst, phase_insensitive_distance(expected, s * input));
    }
    add(fmt::format("SWAP-in |psi>|0> ({} states)", random_states), worst);

    add("Bell ideal = Phi+", (bell_prepare_ideal(0) - phi_plus()).norm());
    add("Bell roles interchanged", (bell_prepare_ideal(1) - bell_prepare_ideal(0)).norm());
    return report;
}

}  // namespace qdent
