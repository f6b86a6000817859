#pragma once

// Time evolution of state vectors: exact spectral propagation for static
// generators, classical RK4 for driven segments, and no-jump evolution under
// exciton recombination.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qdent/hamiltonian.hpp"
#include "qdent/model.hpp"

namespace qdent {

/// exp(-i h t / hbar) through a cached eigendecomposition.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const HermitianMatrix& h);

    std::size_t dimension() const { return static_cast<std::size_t>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t_ps) const;
    StateVector evolve(const StateVector& psi, double t_ps) const;
    /// The full propagator matrix at time t.
    Eigen::MatrixXcd unitary(double t_ps) const;

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
};

StateVector propagate_static(const HermitianMatrix& h, const StateVector& psi0, double t_ps);

/// A scalar function of the state recorded along a trajectory.
struct Observable {
    std::string name;
    std::function<double(const StateVector&)> evaluate;
};

Observable population_observable(std::string name, Occupation occupation);
Observable site_population_observable(std::string name, std::size_t site);
/// |<reference|psi>|^2
Observable overlap_observable(std::string name, StateVector reference);
Observable norm_observable(std::string name = "norm");

class Trajectory {
public:
    Trajectory() = default;

    const std::vector<double>& time_grid() const { return time_grid_; }
    const std::vector<StateVector>& states() const { return states_; }
    const std::vector<std::string>& observable_names() const { return names_; }
    bool has(const std::string& name) const;
    /// Throws InvalidArgument for an unknown observable.
    const std::vector<double>& series(const std::string& name) const;
    std::size_t size() const { return time_grid_.size(); }

    /// Header `t_ps` then one column per observable, in recording order.
    void write_csv(std::ostream& out) const;

    void reserve(std::size_t n);
    void set_observables(std::span<const Observable> observables);
    void append(double t_ps, StateVector state, std::span<const Observable> observables,
                bool keep_state = true);

private:
    std::vector<double> time_grid_;
    std::vector<StateVector> states_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> series_;
};

/// Samples propagate_static on a strictly increasing grid; psi0 is the state at grid.front().
Trajectory static_trajectory(const HermitianMatrix& h, const StateVector& psi0,
                             std::span<const double> t_grid, std::span<const Observable> observables,
                             bool keep_states = true);

/// Time-dependent generator for driven evolution.
///
/// `matrix(t, probe)` returns H(t); `probe` is a time strictly inside the
/// smooth piece currently being integrated, so pulse edges at breakpoints are
/// resolved consistently by every RK4 stage.
struct TimeDependentGenerator {
    std::size_t dimension = 0;
    std::function<Eigen::MatrixXcd(double t_ps, double probe_ps)> matrix;
    std::vector<double> breakpoints;
    /// Upper bound on max_row_norm over all t.
    double norm_bound = 0.0;
};

/// Static part plus a set of pulses over the same basis.
TimeDependentGenerator make_driven_generator(const HermitianMatrix& static_part,
                                             std::vector<DriveSpec> drives, const BasisIndex& basis);

struct DrivenOptions {
    double dt_max_ps = 0.005;
    double max_norm_drift = 1e-7;
    bool keep_states = true;
};

/// Classical RK4 with substep dt <= min(dt_max, 0.05 hbar / norm_bound).
/// No renormalization; throws NormDriftExceeded when |norm - norm0| exceeds the gate.
Trajectory propagate_driven(const TimeDependentGenerator& generator, const StateVector& psi0,
                            std::span<const double> t_grid, std::span<const Observable> observables,
                            const DrivenOptions& options = {});

/// No-jump evolution under h - (i hbar / 2) sum_i gamma_i n_i. The squared norm of the
/// result is the probability that no recombination occurred.
StateVector propagate_decaying(const HermitianMatrix& h, std::span<const double> gammas_per_ps,
                               const StateVector& psi0, double t_ps);

/// Matrix of exp(-i G t / hbar), G = h - (i hbar / 2) sum_i gamma_i n_i; unitary when all rates vanish.
Eigen::MatrixXcd evolution_operator(const HermitianMatrix& h, std::span<const double> gammas_per_ps,
                                    const BasisIndex& basis, double t_ps);

struct ResonancePoint {
    double time_ps = 0.0;
    double value = 0.0;
};

/// First local maximum above `noise_floor`, refined by a three-point parabola.
ResonancePoint first_resonance(const Trajectory& trajectory, const std::string& observable,
                               double noise_floor = 1e-9);

/// First local minimum of the overlap-with-initial-state series, parabola refined.
ResonancePoint first_overlap_minimum(const Trajectory& trajectory,
                                     const std::string& observable = "overlap");

/// Vertex of the parabola through three points (t, y); falls back to the middle point.
ResonancePoint parabolic_vertex(double t0, double y0, double t1, double y1, double t2, double y2);

/// n evenly spaced samples t_start, t_start + dt, ... up to and including t_end.
std::vector<double> uniform_grid(double t_start_ps, double t_end_ps, double dt_ps);

}  // namespace qdent
