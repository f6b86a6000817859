#pragma once

// Ideal one- and two-qubit gate algebra, pulsed Bell-pair preparation on the
// stacked (QDA, QDB) pair, and checks of the SWAP-in decomposition.
//
// Two-qubit registers are ordered |q0 q1> with index 2*q0 + q1 (q0 is the
// most significant qubit).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdent/model.hpp"

namespace qdent {

class TwoQubitUnitary {
public:
    static constexpr double tolerance = 1e-12;

    /// Throws InvalidArgument when U^dagger U differs from identity by more than the tolerance.
    explicit TwoQubitUnitary(const Eigen::Matrix4cd& entries);

    const Eigen::Matrix4cd& entries() const { return entries_; }
    Eigen::Vector4cd operator*(const Eigen::Vector4cd& psi) const { return entries_ * psi; }
    TwoQubitUnitary operator*(const TwoQubitUnitary& other) const {
        return TwoQubitUnitary(entries_ * other.entries_);
    }

private:
    Eigen::Matrix4cd entries_;
};

/// Largest entry of |U^dagger U - I|.
double unitarity_error(const Eigen::MatrixXcd& u);

Eigen::Matrix2cd hadamard();
/// Single-qubit gate acting on qubit 0 or 1 of the register.
TwoQubitUnitary on_qubit(const Eigen::Matrix2cd& gate, int qubit);
/// diag(1, 1, 1, -1)
TwoQubitUnitary controlled_phase();
/// Built as H_target P H_target.
TwoQubitUnitary cnot(int control, int target);
/// Exact matrix of H_i P H_i H_j P H_j with i = qubit 0 (exciton) and j = qubit 1 (spin).
TwoQubitUnitary swap_in_sequence();

/// CNOT_{control -> other} (H on control) |00>.
Eigen::Vector4cd bell_prepare_ideal(int control = 0);
/// (|00> + |11>) / sqrt 2
Eigen::Vector4cd phi_plus();

/// |<ideal|actual>|^2; insensitive to global phase.
double state_fidelity(const Eigen::Vector4cd& ideal, const Eigen::Vector4cd& actual);
/// min over global phase of |actual - e^{i phi} expected|.
double phase_insensitive_distance(const Eigen::Vector4cd& expected, const Eigen::Vector4cd& actual);

/// Haar-random single-qubit state.
Eigen::Vector2cd random_qubit_state(std::mt19937_64& rng);

/// Two-colour pulse sequence on the stacked pair: a pi/2 pulse resonant on QDA,
/// then a pi pulse resonant on QDB's transition shifted by an exciton in QDA.
struct BellPrepSpec {
    double coulomb_shift_mev = 4.0;
    double omega_a_mev = 1.0;
    double omega_b_mev = 0.1;
    /// Zero selects the pulse-area default (pi/2 for A, pi for B).
    double duration_a_ps = 0.0;
    double duration_b_ps = 0.0;
    double dt_max_ps = 0.005;

    double pulse_a_ps() const;
    double pulse_b_ps() const;
    double total_ps() const { return pulse_a_ps() + pulse_b_ps(); }
    void validate() const;
};

struct BellPrepResult {
    Eigen::Vector4cd state;
    double fidelity = 0.0;
    double duration_ps = 0.0;
};

BellPrepResult bell_prepare_pulsed(const BellPrepSpec& spec);

struct GateCheck {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool passed() const { return error <= tolerance; }
};

struct GateCheckReport {
    std::vector<GateCheck> checks;
    bool passed() const;
    std::string to_text() const;
};

/// Every gate identity plus the randomized SWAP-in test over `random_states` seeded states.
GateCheckReport run_gate_checks(std::uint64_t seed, double tolerance = 1e-10,
                                std::size_t random_states = 1000);

}  // namespace qdent
