#include "qdent/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace qdent {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_same_dimension(std::size_t a, std::size_t b) {
    if (a != b) throw DimensionMismatch(fmt::format("generator dimension {} vs state dimension {}", a, b));
}

void require_increasing(std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("time grid is empty");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw InvalidArgument("time grid must be strictly increasing");
}

}  // namespace

SpectralPropagator::SpectralPropagator(const HermitianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.entries());
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Eigen::VectorXcd SpectralPropagator::apply(const Eigen::VectorXcd& psi, double t_ps) const {
    require_same_dimension(dimension(), static_cast<std::size_t>(psi.size()));
    if (t_ps == 0.0) return psi;
    Eigen::VectorXcd coefficients = eigenvectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < coefficients.size(); ++k)
        coefficients(k) *= std::exp(-kI * eigenvalues_(k) * t_ps / units::hbar);
    return eigenvectors_ * coefficients;
}

StateVector SpectralPropagator::evolve(const StateVector& psi, double t_ps) const {
    return StateVector(psi.basis_ptr(), apply(psi.amplitudes(), t_ps));
}

Eigen::MatrixXcd SpectralPropagator::unitary(double t_ps) const {
    Eigen::VectorXcd phases(eigenvalues_.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(-kI * eigenvalues_(k) * t_ps / units::hbar);
    return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

StateVector propagate_static(const HermitianMatrix& h, const StateVector& psi0, double t_ps) {
    require_same_dimension(h.dimension(), psi0.dimension());
    if (!(t_ps >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
    if (t_ps == 0.0) return psi0;
    return SpectralPropagator(h).evolve(psi0, t_ps);
}

Observable population_observable(std::string name, Occupation occupation) {
    return {std::move(name), [occupation](const StateVector& s) { return s.probability(occupation); }};
}

Observable site_population_observable(std::string name, std::size_t site) {
    return {std::move(name), [site](const StateVector& s) { return s.site_population(site); }};
}

Observable overlap_observable(std::string name, StateVector reference) {
    return {std::move(name),
            [ref = std::move(reference)](const StateVector& s) { return std::norm(ref.inner(s)); }};
}

Observable norm_observable(std::string name) {
    return {std::move(name), [](const StateVector& s) { return s.norm(); }};
}

bool Trajectory::has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InvalidArgument(fmt::format("observable '{}' was not recorded", name));
    return series_[static_cast<std::size_t>(it - names_.begin())];
}

void Trajectory::reserve(std::size_t n) {
    time_grid_.reserve(n);
    for (auto& s : series_) s.reserve(n);
}

void Trajectory::set_observables(std::span<const Observable> observables) {
    names_.clear();
    series_.assign(observables.size(), {});
    for (const auto& o : observables) names_.push_back(o.name);
}

void Trajectory::append(double t_ps, StateVector state, std::span<const Observable> observables,
                        bool keep_state) {
    if (!time_grid_.empty() && !(t_ps > time_grid_.back()))
        throw InvalidArgument("trajectory times must be strictly increasing");
    if (observables.size() != series_.size()) throw DimensionMismatch("observable set changed");
    time_grid_.push_back(t_ps);
    for (std::size_t k = 0; k < observables.size(); ++k)
        series_[k].push_back(observables[k].evaluate(state));
    if (keep_state) states_.push_back(std::move(state));
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "t_ps";
    for (const auto& name : names_) out << ',' << name;
    out << '\n';
    for (std::size_t j = 0; j < time_grid_.size(); ++j) {
        out << fmt::format("{:.6f}", time_grid_[j]);
        for (const auto& s : series_) out << fmt::format(",{:.12g}", s[j]);
        out << '\n';
    }
}

Trajectory static_trajectory(const HermitianMatrix& h, const StateVector& psi0,
                             std::span<const double> t_grid, std::span<const Observable> observables,
                             bool keep_states) {
    require_same_dimension(h.dimension(), psi0.dimension());
    require_increasing(t_grid);
    const SpectralPropagator propagator(h);
    Trajectory trajectory;
    trajectory.set_observables(observables);
    trajectory.reserve(t_grid.size());
    const double t0 = t_grid.front();
    for (double t : t_grid)
        trajectory.append(t, propagator.evolve(psi0, t - t0), observables, keep_states);
    return trajectory;
}

TimeDependentGenerator make_driven_generator(const HermitianMatrix& static_part,
                                             std::vector<DriveSpec> drives, const BasisIndex& basis) {
    require_same_dimension(static_part.dimension(), basis.dimension());
    struct Pulse {
        DriveSpec spec;
        Eigen::MatrixXcd coupling;   // envelope = 1, no detuning
        Eigen::MatrixXcd detuning;   // diagonal detuning only
    };
    std::vector<Pulse> pulses;
    std::vector<double> breakpoints;
    double bound = static_part.max_row_norm();
    for (auto& drive : drives) {
        drive.validate(basis.n_dots());
        DriveSpec unit = drive;
        unit.envelope = Envelope::rect();
        unit.detuning_mev.clear();
        Eigen::MatrixXcd coupling = drive_hamiltonian(unit, basis, drive.start_ps).entries();
        DriveSpec detuned = drive;
        detuned.envelope = Envelope::rect();
        detuned.rabi_coupling_mev = 0.0;
        Eigen::MatrixXcd detuning = drive_hamiltonian(detuned, basis, drive.start_ps).entries();
        bound += (coupling + detuning).cwiseAbs().rowwise().sum().maxCoeff();
        breakpoints.push_back(drive.start_ps);
        breakpoints.push_back(drive.end_ps());
        pulses.push_back({std::move(drive), std::move(coupling), std::move(detuning)});
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    TimeDependentGenerator generator;
    generator.dimension = basis.dimension();
    generator.breakpoints = std::move(breakpoints);
    generator.norm_bound = bound;
    generator.matrix = [h0 = static_part.entries(), pulses = std::move(pulses)](double t, double probe) {
        Eigen::MatrixXcd h = h0;
        for (const auto& p : pulses) {
            if (probe < p.spec.start_ps || probe >= p.spec.end_ps()) continue;
            // The envelope is evaluated at t but window membership follows the probe.
            double env = 1.0;
            if (p.spec.envelope.shape == Envelope::Shape::Gaussian) {
                const double centre = p.spec.start_ps + 0.5 * p.spec.duration_ps;
                const double x = (t - centre) / p.spec.envelope.sigma_ps;
                env = std::exp(-0.5 * x * x);
            }
            h += p.detuning + env * p.coupling;
        }
        return h;
    };
    return generator;
}

Trajectory propagate_driven(const TimeDependentGenerator& generator, const StateVector& psi0,
                            std::span<const double> t_grid, std::span<const Observable> observables,
                            const DrivenOptions& options) {
    require_same_dimension(generator.dimension, psi0.dimension());
    require_increasing(t_grid);
    if (!(options.dt_max_ps > 0.0)) throw InvalidArgument("dt_max must be > 0");
    if (!generator.matrix) throw InvalidArgument("generator has no matrix function");

    double dt_cap = options.dt_max_ps;
    if (generator.norm_bound > 0.0) dt_cap = std::min(dt_cap, 0.05 * units::hbar / generator.norm_bound);

    const double norm0 = psi0.norm();
    const Complex factor = -kI / units::hbar;
    Eigen::VectorXcd psi = psi0.amplitudes();

    Trajectory trajectory;
    trajectory.set_observables(observables);
    trajectory.reserve(t_grid.size());
    trajectory.append(t_grid.front(), psi0, observables, options.keep_states);

    auto rk4_piece = [&](double a, double b) {
        const double length = b - a;
        const auto steps = static_cast<std::size_t>(std::ceil(length / dt_cap - 1e-12));
        const double dt = length / static_cast<double>(std::max<std::size_t>(steps, 1));
        const double probe = 0.5 * (a + b);
        for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
            const double t = a + static_cast<double>(s) * dt;
            const Eigen::MatrixXcd h_start = generator.matrix(t, probe);
            const Eigen::MatrixXcd h_mid = generator.matrix(t + 0.5 * dt, probe);
            const Eigen::MatrixXcd h_end = generator.matrix(t + dt, probe);
            const Eigen::VectorXcd k1 = factor * (h_start * psi);
            const Eigen::VectorXcd k2 = factor * (h_mid * (psi + 0.5 * dt * k1));
            const Eigen::VectorXcd k3 = factor * (h_mid * (psi + 0.5 * dt * k2));
            const Eigen::VectorXcd k4 = factor * (h_end * (psi + dt * k3));
            psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    };

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        double a = t_grid[k - 1];
        const double b = t_grid[k];
        for (double bp : generator.breakpoints) {
            if (bp > a && bp < b) {
                rk4_piece(a, bp);
                a = bp;
            }
        }
        rk4_piece(a, b);
        const double drift = std::abs(psi.norm() - norm0);
        if (drift > options.max_norm_drift)
            throw NormDriftExceeded(
                fmt::format("norm drift {:.3e} at t = {} ps exceeds {:.1e}", drift, b, options.max_norm_drift));
        trajectory.append(b, StateVector(psi0.basis_ptr(), psi), observables, options.keep_states);
    }
    return trajectory;
}

namespace {

bool validate_rates(std::span<const double> gammas_per_ps, std::size_t n_dots) {
    if (gammas_per_ps.size() != n_dots)
        throw DimensionMismatch(fmt::format("{} decay rates for {} dots", gammas_per_ps.size(), n_dots));
    bool any_decay = false;
    for (double g : gammas_per_ps) {
        if (!(g >= 0.0)) throw NegativeRate(fmt::format("decay rate {} is negative", g));
        any_decay = any_decay || g > 0.0;
    }
    return any_decay;
}

}  // namespace

Eigen::MatrixXcd evolution_operator(const HermitianMatrix& h, std::span<const double> gammas_per_ps,
                                    const BasisIndex& basis, double t_ps) {
    require_same_dimension(h.dimension(), basis.dimension());
    const bool any_decay = validate_rates(gammas_per_ps, basis.n_dots());
    if (!(t_ps >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
    if (!any_decay) return SpectralPropagator(h).unitary(t_ps);

    Eigen::MatrixXcd exponent = (-kI * t_ps / units::hbar) * h.entries();
    const auto& states = basis.states();
    for (std::size_t j = 0; j < states.size(); ++j) {
        double rate = 0.0;
        for (std::size_t i = 0; i < gammas_per_ps.size(); ++i)
            if ((states[j] >> i) & 1U) rate += gammas_per_ps[i];
        const auto idx = static_cast<Eigen::Index>(j);
        exponent(idx, idx) -= 0.5 * rate * t_ps;
    }
    return exponent.exp();
}

StateVector propagate_decaying(const HermitianMatrix& h, std::span<const double> gammas_per_ps,
                               const StateVector& psi0, double t_ps) {
    require_same_dimension(h.dimension(), psi0.dimension());
    const bool any_decay = validate_rates(gammas_per_ps, psi0.basis().n_dots());
    if (!(t_ps >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
    if (!any_decay) return propagate_static(h, psi0, t_ps);
    if (t_ps == 0.0) return psi0;
    return StateVector(psi0.basis_ptr(),
                       evolution_operator(h, gammas_per_ps, psi0.basis(), t_ps) * psi0.amplitudes());
}

ResonancePoint parabolic_vertex(double t0, double y0, double t1, double y1, double t2, double y2) {
    const double d0 = t1 - t0;
    const double d2 = t1 - t2;
    const double denom = d0 * (y1 - y2) - d2 * (y1 - y0);
    if (denom == 0.0) return {t1, y1};
    double t = t1 - 0.5 * (d0 * d0 * (y1 - y2) - d2 * d2 * (y1 - y0)) / denom;
    t = std::clamp(t, t0, t2);
    // Lagrange form of the interpolating parabola.
    const double value = y0 * (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2)) +
                         y1 * (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2)) +
                         y2 * (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    return {t, value};
}

ResonancePoint first_resonance(const Trajectory& trajectory, const std::string& observable,
                               double noise_floor) {
    const auto& y = trajectory.series(observable);
    const auto& t = trajectory.time_grid();
    for (std::size_t j = 1; j + 1 < y.size(); ++j) {
        if (y[j] > noise_floor && y[j] > y[j - 1] && y[j] >= y[j + 1]) {
            auto point = parabolic_vertex(t[j - 1], y[j - 1], t[j], y[j], t[j + 1], y[j + 1]);
            point.value = std::clamp(point.value, 0.0, 1.0);
            return point;
        }
    }
    throw NoResonanceFound(fmt::format("series '{}' has no local maximum", observable));
}

ResonancePoint first_overlap_minimum(const Trajectory& trajectory, const std::string& observable) {
    const auto& y = trajectory.series(observable);
    const auto& t = trajectory.time_grid();
    for (std::size_t j = 1; j + 1 < y.size(); ++j) {
        if (y[j] < y[j - 1] && y[j] <= y[j + 1]) {
            auto point = parabolic_vertex(t[j - 1], y[j - 1], t[j], y[j], t[j + 1], y[j + 1]);
            point.value = std::clamp(point.value, 0.0, 1.0);
            return point;
        }
    }
    throw NoMinimumFound(fmt::format("series '{}' has no local minimum", observable));
}

std::vector<double> uniform_grid(double t_start_ps, double t_end_ps, double dt_ps) {
    if (!(dt_ps > 0.0) || !(t_end_ps >= t_start_ps)) throw InvalidArgument("bad grid specification");
    const auto n = static_cast<std::size_t>(std::floor((t_end_ps - t_start_ps) / dt_ps + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) grid[k] = t_start_ps + static_cast<double>(k) * dt_ps;
    return grid;
}

}  // namespace qdent
