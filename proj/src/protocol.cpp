#include "qdent/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

namespace qdent {

namespace {

// Golden-section search for the maximum of f on [a, b].
template <typename F>
double golden_maximum(F f, double a, double b, double tol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

ArmTransfer resonance_on_chain(std::size_t n_sites, double v_f_mev, double gamma_per_ps,
                               const TransferOptions& options) {
    if (n_sites < 2) throw InvalidArgument("a transfer needs at least two sites");
    if (!(std::abs(v_f_mev) > 0.0)) throw NoResonanceFound("uncoupled chain has no transfer resonance");
    const auto chain = ChainSpec::uniform(n_sites, v_f_mev, 0.0, gamma_per_ps);
    const auto basis = build_basis(n_sites, Sector::exactly(1));
    const auto h = chain_hamiltonian(chain, *basis);
    const std::size_t end = n_sites - 1;
    const Occupation end_occupation = Occupation{1} << end;
    const auto psi0 = basis_state(basis, 1);

    const double t_max = options.t_max_ps > 0.0
                             ? options.t_max_ps
                             : (2.0 * static_cast<double>(n_sites) + 8.0) * units::hbar / (2.0 * std::abs(v_f_mev));
    const auto grid = uniform_grid(0.0, t_max, options.dt_ps);
    const std::vector<Observable> observables{site_population_observable("P_QDA", 0),
                                              site_population_observable("P_end", end)};
    ArmTransfer result;
    result.trajectory = static_trajectory(h, psi0, grid, observables, options.keep_states);
    const auto coarse = first_resonance(result.trajectory, "P_end");

    const SpectralPropagator propagator(h);
    auto end_population = [&](double t) {
        return std::norm(propagator.evolve(psi0, t).amplitude(end_occupation));
    };
    const double lo = std::max(0.0, coarse.time_ps - options.dt_ps);
    const double t_star = golden_maximum(end_population, lo, coarse.time_ps + options.dt_ps);

    const auto clean = propagator.evolve(psi0, t_star);
    result.time_ps = t_star;
    result.end_population = std::norm(clean.amplitude(end_occupation));
    result.transfer_fidelity = qubit_transfer_fidelity(std::abs(clean.amplitude(end_occupation)));
    const auto gammas = chain.decay_rates();
    auto decayed = propagate_decaying(h, gammas, psi0, t_star);
    result.amplitude = decayed.amplitude(end_occupation);
    result.survival = decayed.norm() * decayed.norm();
    result.final_state = std::move(decayed);
    return result;
}

}  // namespace

void ArmSpec::validate() const {
    if (bus_length < 1) throw InvalidArgument("bus_length must be >= 1");
    if (!std::isfinite(v_f_mev) || v_f_mev == 0.0) throw InvalidArgument("V_F must be finite and non-zero");
    if (!std::isfinite(shift_mev)) throw InvalidArgument("blocking shift must be finite");
    if (!(gamma_per_ps >= 0.0)) throw NegativeRate("decay rate must be >= 0");
}

double qubit_transfer_fidelity(double amplitude_modulus) {
    const double f = std::clamp(amplitude_modulus, 0.0, 1.0);
    return 0.5 + f / 3.0 + f * f / 6.0;
}

ArmTransfer arm_transfer(const ArmSpec& arm, const TransferOptions& options) {
    arm.validate();
    return resonance_on_chain(arm.n_sites(), arm.v_f_mev, arm.gamma_per_ps, options);
}

ResonancePoint chain_first_resonance(std::size_t n_sites, double v_f_mev, double dt_ps) {
    TransferOptions options;
    options.dt_ps = dt_ps;
    const auto transfer = resonance_on_chain(n_sites, v_f_mev, 0.0, options);
    return {transfer.time_ps, transfer.end_population};
}

ConfinementResult confinement_overlap(std::size_t n_sites, double v_f_mev, double ratio, double dt_ps,
                                      double t_max_ps) {
    if (n_sites < 2) throw InvalidArgument("confinement needs at least two sites");
    const auto chain = ChainSpec::uniform(n_sites, v_f_mev);
    const auto basis = build_basis(n_sites, Sector::exactly(1));
    const double shift = ratio * v_f_mev;
    const auto h = apply_block(chain_hamiltonian(chain, *basis), *basis, interior_block(n_sites, shift));
    const auto psi0 = basis_state(basis, 1);
    if (!(t_max_ps > 0.0)) {
        const double rabi = std::sqrt(shift * shift + 4.0 * v_f_mev * v_f_mev);
        t_max_ps = 3.0 * std::numbers::pi * units::hbar / rabi;
    }
    const auto grid = uniform_grid(0.0, t_max_ps, dt_ps);
    const std::vector<Observable> observables{overlap_observable("overlap", psi0)};
    ConfinementResult result;
    result.trajectory = static_trajectory(h, psi0, grid, observables, false);
    result.minimum = first_overlap_minimum(result.trajectory, "overlap");
    return result;
}

Trajectory control_array_flop(std::size_t n_dots, double v_f_mev, double omega_mev,
                              std::span<const double> t_grid, bool start_excited, double detuning_mev,
                              const Envelope& envelope, double dt_max_ps) {
    if (t_grid.empty()) throw InvalidArgument("time grid is empty");
    const auto basis = build_basis(n_dots, Sector::all());
    const auto h0 = chain_hamiltonian(ChainSpec::uniform(n_dots, v_f_mev), *basis);
    DriveSpec drive;
    for (std::size_t i = 0; i < n_dots; ++i) drive.target_sites.push_back(i);
    drive.rabi_coupling_mev = omega_mev;
    drive.detuning_mev = {detuning_mev};
    drive.envelope = envelope;
    drive.start_ps = t_grid.front();
    // The window extends past the last sample so the pulse stays on throughout.
    drive.duration_ps = (t_grid.back() - t_grid.front()) + 1e-9;
    const auto generator = make_driven_generator(h0, {drive}, *basis);

    const Occupation all = (n_dots == 64) ? ~Occupation{0} : ((Occupation{1} << n_dots) - 1);
    const std::vector<Observable> observables{population_observable("P_ground", 0),
                                              population_observable("P_all_excited", all)};
    DrivenOptions options;
    options.dt_max_ps = dt_max_ps;
    options.keep_states = false;
    return propagate_driven(generator, basis_state(basis, start_excited ? all : 0), t_grid, observables,
                            options);
}

TwoQubitDensityMatrix::TwoQubitDensityMatrix(const Eigen::Matrix4cd& entries) : entries_(entries) {
    const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= tolerance))
        throw InvalidDensityMatrix(fmt::format("density matrix not Hermitian (error {:.3e})", herm));
    const Complex trace = entries_.trace();
    if (!(std::abs(trace - 1.0) <= tolerance))
        throw InvalidDensityMatrix(fmt::format("density matrix trace {:.12f} != 1", trace.real()));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(entries_, Eigen::EigenvaluesOnly);
    if (!(solver.eigenvalues().minCoeff() >= -tolerance))
        throw InvalidDensityMatrix(
            fmt::format("density matrix has eigenvalue {:.3e}", solver.eigenvalues().minCoeff()));
}

TwoQubitDensityMatrix TwoQubitDensityMatrix::from_pure(const Eigen::Vector4cd& psi) {
    return TwoQubitDensityMatrix(psi * psi.adjoint());
}

double concurrence(const TwoQubitDensityMatrix& rho) {
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = yy(3, 0) = -1.0;
    yy(1, 2) = yy(2, 1) = 1.0;
    // With rho = W W^dagger, the square roots of the eigenvalues of rho (Y x Y) rho^* (Y x Y)
    // are the singular values of W^T (Y x Y) W; no square root of a near-zero eigenvalue is taken.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> rho_solver(rho.entries());
    const Eigen::Vector4d roots = rho_solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix4cd w = rho_solver.eigenvectors() * roots.cast<Complex>().asDiagonal();
    const Eigen::Matrix4cd tau = w.transpose() * yy * w;
    const Eigen::Vector4d singular = Eigen::JacobiSVD<Eigen::Matrix4cd>(tau).singularValues();
    std::array<double, 4> lambda{};
    for (int k = 0; k < 4; ++k) lambda[static_cast<std::size_t>(k)] = singular(k);
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    return std::clamp(lambda[0] - lambda[1] - lambda[2] - lambda[3], 0.0, 1.0);
}

double bell_fidelity(const TwoQubitDensityMatrix& rho) {
    const Eigen::Vector4cd phi = phi_plus();
    return std::clamp(phi.dot(rho.entries() * phi).real(), 0.0, 1.0);
}

double phase_corrected_bell_fidelity(const TwoQubitDensityMatrix& rho) {
    const auto& r = rho.entries();
    return std::clamp(0.5 * (r(0, 0).real() + r(3, 3).real()) + std::abs(r(0, 3)), 0.0, 1.0);
}

TwoArmState TwoArmState::from_register(BasisPtr arm_a, BasisPtr arm_b, const Eigen::Vector4cd& state,
                                       std::size_t site) {
    TwoArmState joint{std::move(arm_a), std::move(arm_b), {}};
    joint.validate();
    joint.amplitudes = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(joint.arm_a->dimension()),
                                              static_cast<Eigen::Index>(joint.arm_b->dimension()));
    const Occupation excited = Occupation{1} << site;
    for (int qa = 0; qa < 2; ++qa)
        for (int qb = 0; qb < 2; ++qb) {
            const auto ia = static_cast<Eigen::Index>(joint.arm_a->index_of(qa ? excited : 0));
            const auto ib = static_cast<Eigen::Index>(joint.arm_b->index_of(qb ? excited : 0));
            joint.amplitudes(ia, ib) = state(2 * qa + qb);
        }
    return joint;
}

void TwoArmState::validate() const {
    if (!arm_a || !arm_b) throw InvalidArgument("two-arm state needs both arm bases");
    for (const auto* basis : {arm_a.get(), arm_b.get()})
        if (basis->sector().kind != Sector::Kind::AtMost || basis->sector().k != 1)
            throw SectorViolation("each arm must use the AT_MOST(1) sector");
}

Eigen::Matrix4cd reduce_onto_sites(const TwoArmState& joint, std::size_t site_a, std::size_t site_b) {
    joint.validate();
    if (static_cast<std::size_t>(joint.amplitudes.rows()) != joint.arm_a->dimension() ||
        static_cast<std::size_t>(joint.amplitudes.cols()) != joint.arm_b->dimension())
        throw DimensionMismatch("amplitude matrix does not match the arm bases");
    if (site_a >= joint.arm_a->n_dots() || site_b >= joint.arm_b->n_dots())
        throw OutOfRange("reduced site outside its arm");

    // Each environment configuration (the rest of both arms) contributes one pure
    // component over the two kept occupations.
    std::map<std::pair<Occupation, Occupation>, Eigen::Vector4cd> components;
    const Occupation bit_a = Occupation{1} << site_a;
    const Occupation bit_b = Occupation{1} << site_b;
    for (Eigen::Index i = 0; i < joint.amplitudes.rows(); ++i) {
        const Occupation sa = joint.arm_a->bitstring_of(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < joint.amplitudes.cols(); ++j) {
            const Complex amp = joint.amplitudes(i, j);
            if (amp == Complex{0.0}) continue;
            const Occupation sb = joint.arm_b->bitstring_of(static_cast<std::size_t>(j));
            const int c = (sa & bit_a) ? 1 : 0;
            const int d = (sb & bit_b) ? 1 : 0;
            auto [it, inserted] = components.try_emplace({sa & ~bit_a, sb & ~bit_b}, Eigen::Vector4cd::Zero());
            it->second(2 * c + d) += amp;
        }
    }
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (const auto& [env, v] : components) rho += v * v.adjoint();
    return rho;
}

TwoQubitDensityMatrix reduced_two_qubit_state(const TwoArmState& joint, std::size_t site_a,
                                              std::size_t site_b) {
    return TwoQubitDensityMatrix(reduce_onto_sites(joint, site_a, site_b));
}

double fidelity_budget(double chain_transfer, double blocking, double swap_gate, double decay) {
    for (double f : {chain_transfer, blocking, swap_gate, decay})
        if (!(f >= 0.0 && f <= 1.0)) throw OutOfRange(fmt::format("budget factor {} outside [0, 1]", f));
    return FidelityBudget{chain_transfer, blocking, swap_gate, decay}.total();
}

double amplitude_decay_factor(double gamma_per_ps, double t_ps) {
    if (!(gamma_per_ps >= 0.0)) throw NegativeRate("decay rate must be >= 0");
    return std::exp(-0.5 * gamma_per_ps * t_ps);
}

double population_decay_factor(double gamma_per_ps, double t_ps) {
    if (!(gamma_per_ps >= 0.0)) throw NegativeRate("decay rate must be >= 0");
    return std::exp(-gamma_per_ps * t_ps);
}

std::string to_string(TimelineSegment::Kind kind) {
    switch (kind) {
        case TimelineSegment::Kind::Blocked: return "blocked";
        case TimelineSegment::Kind::Unblocked: return "unblocked";
        case TimelineSegment::Kind::Driven: return "driven";
    }
    return "?";
}

double ProtocolTimeline::total_ps() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.duration_ps;
    return total;
}

void ProtocolTimeline::add(TimelineSegment segment) {
    if (!(segment.duration_ps > 0.0)) throw InvalidArgument("timeline segments need a positive duration");
    if (!segments.empty() && segment.step < segments.back().step)
        throw InvalidArgument("timeline steps must appear in order");
    segments.push_back(std::move(segment));
}

double DistributionReport::leakage() const {
    return std::max(arm_a.delivery_leakage, arm_b.delivery_leakage);
}

namespace {

std::string percent(double value) { return fmt::format("{:.0f}%", 100.0 * value); }

}  // namespace

std::string DistributionReport::to_text() const {
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    auto num = [](double v) { return fmt::format("{:.6f}", v); };
    line("arm_lengths", fmt::format("{}x{}", arm_a.bus_length, arm_b.bus_length));
    line("v_f_mev", num(v_f_mev));
    line("shift_ratio", num(shift_ratio));
    for (std::size_t k = 0; k < timeline.segments.size(); ++k) {
        const auto& s = timeline.segments[k];
        line(fmt::format("segment_{}", k + 1),
             fmt::format("step {} {} {:.6f} ps {}", s.step, to_string(s.kind), s.duration_ps, s.label));
    }
    for (const auto* arm : {&arm_a, &arm_b}) {
        const char tag = (arm == &arm_a) ? 'a' : 'b';
        line(fmt::format("resonance_time_{}_ps", tag), num(arm->resonance_time_ps));
        line(fmt::format("transfer_fidelity_{}", tag), num(arm->transfer_fidelity));
        line(fmt::format("end_population_{}", tag), num(arm->end_population));
        line(fmt::format("confinement_{}", tag), num(arm->confinement));
        line(fmt::format("prep_leakage_{}", tag), num(arm->prep_leakage));
        line(fmt::format("delivery_leakage_{}", tag), num(arm->delivery_leakage));
        line(fmt::format("survival_{}", tag), num(arm->survival));
    }
    line("bell_prep_fidelity", num(bell_prep_fidelity));
    line("control_switch_fidelity", num(control_switch_fidelity));
    line("elapsed_ps", num(elapsed_ps));
    line("concurrence", num(concurrence));
    line("bell_fidelity", num(bell_fidelity));
    line("bell_fidelity_phase_corrected", num(bell_fidelity_phase_corrected));
    line("budget_chain_transfer", num(budget.chain_transfer));
    line("budget_blocking", num(budget.blocking));
    line("budget_swap_gate", num(budget.swap_gate));
    line("budget_decay_amplitude", num(budget.decay));
    line("budget_decay_population", num(decay_factor_population));
    line("budget_total", fmt::format("{:.4f} ({})", budget.total(), percent(budget.total())));
    const double total_population = budget.chain_transfer * budget.blocking * budget.swap_gate * decay_factor_population;
    line("budget_total_population_convention", fmt::format("{:.4f} ({})", total_population, percent(total_population)));

    const auto& ref = reference_budget;
    line("reference_budget", fmt::format("{:.2f} x {:.2f} x {:.2f} x {:.2f} = {:.4f} ({})", ref.chain_transfer,
                                         ref.blocking, ref.swap_gate, ref.decay, ref.total(), percent(ref.total())));
    const double rate = 1.0 / reference_t1_ps;
    const double amp = amplitude_decay_factor(rate, reference_elapsed_ps);
    const double pop = population_decay_factor(rate, reference_elapsed_ps);
    line("reference_decay_amplitude_convention",
         fmt::format("exp(-t/2T1) = {:.4f} (t = {:.0f} ps, T1 = {:.0f} ps)", amp, reference_elapsed_ps, reference_t1_ps));
    line("reference_decay_population_convention",
         fmt::format("exp(-t/T1) = {:.4f} (t = {:.0f} ps, T1 = {:.0f} ps)", pop, reference_elapsed_ps, reference_t1_ps));
    const double ref_pop = fidelity_budget(ref.chain_transfer, ref.blocking, ref.swap_gate, pop);
    line("reference_budget_population_convention",
         fmt::format("{:.2f} x {:.2f} x {:.2f} x {:.4f} = {:.4f} ({})", ref.chain_transfer, ref.blocking,
                     ref.swap_gate, pop, ref_pop, percent(ref_pop)));
    return out;
}

std::string DistributionReport::csv_header() {
    return "arm_lengths,V_F_meV,shift_ratio,transfer_A,transfer_B,leakage,concurrence,elapsed_ps,budget_total";
}

std::string DistributionReport::csv_row() const {
    return fmt::format("{}x{},{:.6f},{:.6f},{:.8f},{:.8f},{:.8f},{:.8f},{:.6f},{:.8f}", arm_a.bus_length,
                       arm_b.bus_length, v_f_mev, shift_ratio, arm_a.transfer_fidelity, arm_b.transfer_fidelity,
                       leakage(), concurrence, elapsed_ps, budget.total());
}

namespace {

struct ArmModel {
    ArmSpec spec;
    BasisPtr basis;
    HermitianMatrix free;
    HermitianMatrix blocked;
    std::vector<double> gammas;
    Eigen::MatrixXcd evolution;  // accumulated since the Bell pair was placed

    explicit ArmModel(const ArmSpec& arm)
        : spec(arm),
          basis(build_basis(arm.n_sites(), Sector::at_most(1))),
          free(chain_hamiltonian(arm.chain(), *basis)),
          blocked(apply_block(free, *basis, arm.block())),
          gammas(arm.n_sites(), arm.gamma_per_ps),
          evolution(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(basis->dimension()),
                                               static_cast<Eigen::Index>(basis->dimension()))) {}

    void hold(double t_ps, bool is_blocked) {
        if (t_ps <= 0.0) return;
        evolution = evolution_operator(is_blocked ? blocked : free, gammas, *basis, t_ps) * evolution;
    }

    Eigen::Index excited_index() const { return static_cast<Eigen::Index>(basis->index_of(1)); }
    Eigen::Index vacuum_index() const { return static_cast<Eigen::Index>(basis->index_of(0)); }

    /// Evolved single-excitation vector started on QDA.
    Eigen::VectorXcd excitation() const { return evolution.col(excited_index()); }

    double bus_population() const {
        const Eigen::VectorXcd phi = excitation();
        double total = 0.0;
        for (std::size_t site = 1; site + 1 < spec.n_sites(); ++site)
            total += std::norm(phi(static_cast<Eigen::Index>(basis->index_of(Occupation{1} << site))));
        return total;
    }
};

double control_switch(std::size_t n_dots, double v_f, double omega, double t_switch, bool start_excited) {
    if (n_dots > 10) throw DimensionOverflow("explicit control-array switching supports at most 10 dots");
    const std::vector<double> grid{0.0, t_switch};
    const auto flop = control_array_flop(n_dots, v_f, omega, grid, start_excited);
    return start_excited ? flop.series("P_ground").back() : flop.series("P_all_excited").back();
}

}  // namespace

DistributionReport run_distribution(const ArmSpec& arm_a, const ArmSpec& arm_b, const ProtocolOptions& options) {
    arm_a.validate();
    arm_b.validate();
    if (!(options.swap_fidelity >= 0.0 && options.swap_fidelity <= 1.0))
        throw OutOfRange("SWAP fidelity outside [0, 1]");

    DistributionReport report;
    report.v_f_mev = arm_a.v_f_mev;
    report.shift_ratio = arm_a.shift_mev / arm_a.v_f_mev;
    ArmModel model_a(arm_a);
    ArmModel model_b(arm_b);

    // Control-array switching: all dots driven at Omega for one single-dot pi time.
    double t_switch = 0.0;
    double block_fidelity = 1.0;
    double unblock_fidelity = 1.0;
    if (options.explicit_blocking) {
        const double omega_a = options.control_omega_ratio * std::abs(arm_a.v_f_mev);
        const double omega_b = options.control_omega_ratio * std::abs(arm_b.v_f_mev);
        const double t_a = std::numbers::pi * units::hbar / (2.0 * omega_a);
        const double t_b = std::numbers::pi * units::hbar / (2.0 * omega_b);
        t_switch = std::max(t_a, t_b);
        block_fidelity = control_switch(arm_a.bus_length, arm_a.v_f_mev, omega_a, t_a, false) *
                         control_switch(arm_b.bus_length, arm_b.v_f_mev, omega_b, t_b, false);
        unblock_fidelity = control_switch(arm_a.bus_length, arm_a.v_f_mev, omega_a, t_a, true) *
                           control_switch(arm_b.bus_length, arm_b.v_f_mev, omega_b, t_b, true);
        report.control_switch_fidelity = block_fidelity * unblock_fidelity * block_fidelity;
    }

    // (1) Block both buses.
    if (options.explicit_blocking)
        report.timeline.add({1, TimelineSegment::Kind::Driven, t_switch, "block buses (excite control arrays)"});

    // (2) Bell pair on (QDA, QDB) while the buses are blocked.
    Eigen::Vector4cd bell_state;
    if (options.ideal_controls) {
        bell_state = bell_prepare_ideal();
        report.bell_prep_fidelity = 1.0;
    } else {
        const auto prepared = bell_prepare_pulsed(options.bell);
        bell_state = prepared.state.normalized();
        report.bell_prep_fidelity = prepared.fidelity;
        report.timeline.add({2, TimelineSegment::Kind::Driven, prepared.duration_ps,
                             "prepare Bell pair on (QDA, QDB), buses blocked"});
        model_a.hold(prepared.duration_ps, true);
        model_b.hold(prepared.duration_ps, true);
    }
    report.arm_a.prep_leakage = model_a.bus_population();
    report.arm_b.prep_leakage = model_b.bus_population();

    // (3) Unblock.
    if (options.explicit_blocking) {
        report.timeline.add({3, TimelineSegment::Kind::Driven, t_switch, "unblock buses (de-excite control arrays)"});
        model_a.hold(t_switch, true);
        model_b.hold(t_switch, true);
    }

    // (4) Transfer for the slower arm's first-resonance time.
    TransferOptions transfer_options;
    transfer_options.dt_ps = options.transfer_dt_ps;
    const auto transfer_a = arm_transfer(arm_a, transfer_options);
    const auto transfer_b = arm_transfer(arm_b, transfer_options);
    const double t_slow = std::max(transfer_a.time_ps, transfer_b.time_ps);
    const double mismatch = std::abs(transfer_a.time_ps - transfer_b.time_ps);
    if (options.strict_timing && mismatch > options.reblock_tolerance_ps)
        throw ArmMismatch(fmt::format("arm resonance times differ by {:.3f} ps (tolerance {:.3f} ps)", mismatch,
                                      options.reblock_tolerance_ps));
    report.timeline.add({4, TimelineSegment::Kind::Unblocked, t_slow, "transfer along buses"});
    for (auto* pair : {&model_a, &model_b}) {
        const double own = (pair == &model_a) ? transfer_a.time_ps : transfer_b.time_ps;
        if (options.strict_timing) {
            pair->hold(own, false);
            pair->hold(t_slow - own, true);
        } else {
            pair->hold(t_slow, false);
        }
    }

    // (5) Re-block.
    if (options.explicit_blocking) {
        report.timeline.add({5, TimelineSegment::Kind::Driven, t_switch, "re-block buses (excite control arrays)"});
        model_a.hold(t_switch, true);
        model_b.hold(t_switch, true);
    }

    // (6) Deliver: assemble the (QDC, QDD) state.
    const auto initial = TwoArmState::from_register(model_a.basis, model_b.basis, bell_state);
    TwoArmState joint = initial;
    joint.amplitudes = model_a.evolution * initial.amplitudes * model_b.evolution.transpose();
    const std::size_t site_c = arm_a.n_sites() - 1;
    const std::size_t site_d = arm_b.n_sites() - 1;

    // Recombination returns an arm to its vacuum; each jump branch is added as an
    // incoherent component so the delivered state keeps unit trace.
    const double survival_a = model_a.excitation().squaredNorm();
    const double survival_b = model_b.excitation().squaredNorm();
    const double loss_a = std::max(0.0, 1.0 - survival_a);
    const double loss_b = std::max(0.0, 1.0 - survival_b);
    Eigen::Matrix4cd rho = reduce_onto_sites(joint, site_c, site_d);
    const Eigen::Index ea = model_a.excited_index();
    const Eigen::Index eb = model_b.excited_index();
    if (loss_a > 0.0) {
        TwoArmState branch = initial;
        branch.amplitudes.setZero();
        const Eigen::VectorXcd w = model_b.evolution * initial.amplitudes.row(ea).transpose();
        branch.amplitudes.row(model_a.vacuum_index()) = w.transpose();
        rho += loss_a * reduce_onto_sites(branch, site_c, site_d);
    }
    if (loss_b > 0.0) {
        TwoArmState branch = initial;
        branch.amplitudes.setZero();
        branch.amplitudes.col(model_b.vacuum_index()) = model_a.evolution * initial.amplitudes.col(eb);
        rho += loss_b * reduce_onto_sites(branch, site_c, site_d);
    }
    rho(0, 0) += std::norm(initial.amplitudes(ea, eb)) * loss_a * loss_b;

    report.joint_no_jump = std::move(joint);
    report.delivered = TwoQubitDensityMatrix(rho);
    report.concurrence = concurrence(report.delivered);
    report.bell_fidelity = bell_fidelity(report.delivered);
    report.bell_fidelity_phase_corrected = phase_corrected_bell_fidelity(report.delivered);
    report.elapsed_ps = report.timeline.total_ps();

    auto fill_arm = [&](ArmReport& out, const ArmSpec& spec, const ArmTransfer& transfer, const ArmModel& model,
                        double survival) {
        out.bus_length = spec.bus_length;
        out.resonance_time_ps = transfer.time_ps;
        out.transfer_fidelity = transfer.transfer_fidelity;
        out.end_population = transfer.end_population;
        out.delivery_leakage = model.bus_population();
        out.survival = survival;
        out.confinement =
            confinement_overlap(spec.n_sites(), spec.v_f_mev, spec.shift_mev / spec.v_f_mev, options.blocking_dt_ps)
                .minimum.value;
        if (options.keep_trajectories) out.transfer_trajectory = transfer.trajectory;
    };
    fill_arm(report.arm_a, arm_a, transfer_a, model_a, survival_a);
    fill_arm(report.arm_b, arm_b, transfer_b, model_b, survival_b);

    const double gamma = std::max(arm_a.gamma_per_ps, arm_b.gamma_per_ps);
    report.budget.chain_transfer = std::sqrt(report.arm_a.transfer_fidelity * report.arm_b.transfer_fidelity);
    report.budget.blocking =
        std::min(report.arm_a.confinement, report.arm_b.confinement) * report.control_switch_fidelity;
    report.budget.swap_gate = options.swap_fidelity;
    report.budget.decay = amplitude_decay_factor(gamma, report.elapsed_ps);
    report.decay_factor_population = population_decay_factor(gamma, report.elapsed_ps);
    return report;
}

}  // namespace qdent
