#pragma once

// The six-step entanglement distributor: block both buses, prepare a Bell pair
// on (QDA, QDB), unblock, let both arms transfer, re-block, and report the
// delivered (QDC, QDD) state together with the fidelity budget.

#include <optional>
#include <string>
#include <vector>

#include "qdent/evolve.hpp"
#include "qdent/gates.hpp"
#include "qdent/hamiltonian.hpp"
#include "qdent/model.hpp"

namespace qdent {

/// One arm: QDA (site 0), `bus_length` bus dots, QDC (site bus_length + 1).
struct ArmSpec {
    std::size_t bus_length = 5;
    double v_f_mev = 0.2;
    double shift_mev = 4.0;
    double gamma_per_ps = 0.0;

    std::size_t n_sites() const { return bus_length + 2; }
    ChainSpec chain() const { return ChainSpec::uniform(n_sites(), v_f_mev, 0.0, gamma_per_ps); }
    BlockSpec block() const { return interior_block(n_sites(), shift_mev); }
    void validate() const;
};

/// Average fidelity of sending a qubit through a channel whose excitation
/// amplitude has modulus |f| (phase correctable): 1/2 + |f|/3 + |f|^2/6.
double qubit_transfer_fidelity(double amplitude_modulus);

struct TransferOptions {
    double dt_ps = 0.02;
    /// Zero picks a window long enough for the first resonance.
    double t_max_ps = 0.0;
    bool keep_states = false;
};

struct ArmTransfer {
    /// QDC amplitude at the first resonance, including the decay envelope.
    Complex amplitude;
    double time_ps = 0.0;
    /// |amplitude|^2 without decay.
    double end_population = 0.0;
    /// qubit_transfer_fidelity of the decay-free amplitude.
    double transfer_fidelity = 0.0;
    /// Probability that no recombination occurred by time_ps.
    double survival = 1.0;
    Trajectory trajectory;
    /// Single-excitation state at time_ps (decay included).
    std::optional<StateVector> final_state;
};

/// Single-excitation transfer QDA -> QDC on the unblocked arm, stopped at the
/// first resonance of the QDC population ("P_end").
ArmTransfer arm_transfer(const ArmSpec& arm, const TransferOptions& options = {});

/// First-resonance time and population of a uniform n-site chain from site 0 to site n-1.
ResonancePoint chain_first_resonance(std::size_t n_sites, double v_f_mev, double dt_ps = 0.02);

struct ConfinementResult {
    ResonancePoint minimum;
    Trajectory trajectory;
};

/// Overlap |<QDA|psi(t)>|^2 of an exciton starting on site 0 of an n-site chain
/// whose interior sites are shifted by ratio * V_F; returns the first minimum.
ConfinementResult confinement_overlap(std::size_t n_sites, double v_f_mev, double ratio,
                                      double dt_ps = 0.005, double t_max_ps = 0.0);

/// Driven control-array flop from |0...0> (or |X...X>) with every dot driven at Omega.
/// Records "P_ground" and "P_all_excited".
Trajectory control_array_flop(std::size_t n_dots, double v_f_mev, double omega_mev,
                              std::span<const double> t_grid, bool start_excited = false,
                              double detuning_mev = 0.0, const Envelope& envelope = Envelope::rect(),
                              double dt_max_ps = 0.005);

class TwoQubitDensityMatrix {
public:
    static constexpr double tolerance = 1e-10;

    /// Throws InvalidDensityMatrix unless Hermitian, unit trace and positive.
    explicit TwoQubitDensityMatrix(const Eigen::Matrix4cd& entries);
    static TwoQubitDensityMatrix from_pure(const Eigen::Vector4cd& psi);

    const Eigen::Matrix4cd& entries() const { return entries_; }

private:
    Eigen::Matrix4cd entries_;
};

/// Wootters concurrence.
double concurrence(const TwoQubitDensityMatrix& rho);
/// <Phi+| rho |Phi+>
double bell_fidelity(const TwoQubitDensityMatrix& rho);
/// Bell fidelity maximised over a local phase on one qubit.
double phase_corrected_bell_fidelity(const TwoQubitDensityMatrix& rho);

/// Joint state of two arms, each in the AT_MOST(1) sector, stored as an
/// amplitude matrix M(a, b) over the product basis.
struct TwoArmState {
    BasisPtr arm_a;
    BasisPtr arm_b;
    Eigen::MatrixXcd amplitudes;

    /// Places a register state |qa qb> on site `site` of each arm, buses empty.
    static TwoArmState from_register(BasisPtr arm_a, BasisPtr arm_b, const Eigen::Vector4cd& state,
                                     std::size_t site = 0);
    double norm_squared() const { return amplitudes.squaredNorm(); }
    void validate() const;
};

/// Unnormalised partial trace onto the occupations of (site_a of arm A, site_b of arm B).
Eigen::Matrix4cd reduce_onto_sites(const TwoArmState& joint, std::size_t site_a, std::size_t site_b);

/// Partial trace over everything except the occupations of QDC and QDD. Amplitude left
/// on bus sites becomes mixedness of the reduced state.
TwoQubitDensityMatrix reduced_two_qubit_state(const TwoArmState& joint, std::size_t site_a,
                                              std::size_t site_b);

struct FidelityBudget {
    double chain_transfer = 1.0;
    double blocking = 1.0;
    double swap_gate = 1.0;
    double decay = 1.0;

    double total() const { return chain_transfer * blocking * swap_gate * decay; }
};

/// Plain product of the four factors; throws OutOfRange for a factor outside [0, 1].
double fidelity_budget(double chain_transfer, double blocking, double swap_gate, double decay);

/// exp(-gamma t / 2): survival of an excitation amplitude.
double amplitude_decay_factor(double gamma_per_ps, double t_ps);
/// exp(-gamma t): survival probability.
double population_decay_factor(double gamma_per_ps, double t_ps);

struct ProtocolOptions {
    /// Ideal Bell gates (instantaneous); otherwise the two-colour pulse sequence.
    bool ideal_controls = true;
    /// Simulate the control-array switching of steps 1, 3 and 5.
    bool explicit_blocking = false;
    /// Re-block the faster arm at its own resonance; ArmMismatch beyond the tolerance.
    bool strict_timing = false;
    double reblock_tolerance_ps = 1.0;
    BellPrepSpec bell;
    /// Control-array Rabi coupling in units of V_F.
    double control_omega_ratio = 25.0;
    double swap_fidelity = 0.99;
    double transfer_dt_ps = 0.02;
    double blocking_dt_ps = 0.005;
    bool keep_trajectories = false;
};

struct TimelineSegment {
    enum class Kind { Blocked, Unblocked, Driven };
    int step = 0;
    Kind kind = Kind::Blocked;
    double duration_ps = 0.0;
    std::string label;
};

std::string to_string(TimelineSegment::Kind kind);

struct ProtocolTimeline {
    std::vector<TimelineSegment> segments;
    double total_ps() const;
    void add(TimelineSegment segment);
};

struct ArmReport {
    std::size_t bus_length = 0;
    double resonance_time_ps = 0.0;
    double transfer_fidelity = 0.0;
    double end_population = 0.0;
    /// First-minimum overlap of an exciton held on QDA with the bus blocked.
    double confinement = 1.0;
    /// Bus population after the blocked Bell-preparation interval, given an exciton on QDA.
    double prep_leakage = 0.0;
    /// Bus population at delivery, given an exciton started on QDA.
    double delivery_leakage = 0.0;
    /// Probability that the arm's exciton did not recombine.
    double survival = 1.0;
    Trajectory transfer_trajectory;
};

struct DistributionReport {
    ArmReport arm_a;
    ArmReport arm_b;
    double v_f_mev = 0.0;
    double shift_ratio = 0.0;
    ProtocolTimeline timeline;
    double elapsed_ps = 0.0;
    double bell_prep_fidelity = 1.0;
    double control_switch_fidelity = 1.0;
    TwoArmState joint_no_jump;
    TwoQubitDensityMatrix delivered{Eigen::Matrix4cd::Identity() / 4.0};
    double concurrence = 0.0;
    double bell_fidelity = 0.0;
    double bell_fidelity_phase_corrected = 0.0;
    FidelityBudget budget;
    double decay_factor_population = 1.0;

    double leakage() const;
    /// Line-oriented key = value block.
    std::string to_text() const;
    static std::string csv_header();
    std::string csv_row() const;
};

DistributionReport run_distribution(const ArmSpec& arm_a, const ArmSpec& arm_b,
                                    const ProtocolOptions& options = {});

/// Reference factors of the distribution budget: transfer, blocking, SWAP, decay.
inline constexpr FidelityBudget reference_budget{0.94, 0.99, 0.99, 0.99};
inline constexpr double reference_elapsed_ps = 20.0;
inline constexpr double reference_t1_ps = 1000.0;

}  // namespace qdent
