#pragma once

// Hermitian generators: Förster chains, rotating-frame laser drives and
// biexcitonic blocking shifts. All matrices are dense over a BasisIndex.

#include <optional>
#include <vector>

#include "qdent/model.hpp"

namespace qdent {

class HermitianMatrix {
public:
    static constexpr double tolerance = 1e-12;

    /// Throws NonHermitianInput when |H - H^dagger| exceeds the tolerance.
    explicit HermitianMatrix(Eigen::MatrixXcd entries);
    static HermitianMatrix zero(std::size_t dimension);

    std::size_t dimension() const { return static_cast<std::size_t>(entries_.rows()); }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    /// Maximum absolute row sum; bounds the spectral radius.
    double max_row_norm() const;

    HermitianMatrix operator+(const HermitianMatrix& other) const;
    HermitianMatrix scaled(double factor) const;

private:
    Eigen::MatrixXcd entries_;
};

/// Largest deviation from conjugate symmetry.
double hermiticity_error(const Eigen::MatrixXcd& m);

struct Envelope {
    enum class Shape { Rect, Gaussian };
    Shape shape = Shape::Rect;
    double sigma_ps = 0.0;

    static Envelope rect() { return {Shape::Rect, 0.0}; }
    static Envelope gaussian(double sigma_ps) { return {Shape::Gaussian, sigma_ps}; }
};

/// A laser pulse in the rotating frame of the addressed transition.
struct DriveSpec {
    std::vector<std::size_t> target_sites;
    double rabi_coupling_mev = 0.0;
    /// Either empty (all zero), a single value for every target, or one per target.
    std::vector<double> detuning_mev;
    Envelope envelope = Envelope::rect();
    double start_ps = 0.0;
    double duration_ps = 0.0;
    /// Laser phase: the raising term carries e^{i phase}.
    double phase_rad = 0.0;

    double end_ps() const { return start_ps + duration_ps; }
    /// Envelope value at t; zero outside [start, start + duration).
    double envelope_at(double t_ps) const;
    void validate(std::size_t n_dots) const;
};

struct BlockSpec {
    std::vector<std::size_t> blocked_sites;
    double shift_mev = 0.0;
};

/// Eq.-1 chain Hamiltonian: site energies on the diagonal plus nearest-neighbour hops.
HermitianMatrix chain_hamiltonian(const ChainSpec& chain, const BasisIndex& basis);

/// Adds the biexcitonic shift for every occupied blocked site.
HermitianMatrix apply_block(const HermitianMatrix& h, const BasisIndex& basis, const BlockSpec& block);

/// Rotating-frame drive generator at time t; the zero matrix outside the pulse window.
/// Requires a basis that can hold raised states (ALL or AT_MOST); transitions leaving an
/// AT_MOST(k) truncation are dropped.
HermitianMatrix drive_hamiltonian(const DriveSpec& drive, const BasisIndex& basis, double t_ps);

/// Total excitation number as a diagonal matrix.
Eigen::MatrixXcd excitation_number_operator(const BasisIndex& basis);

/// Block of every site strictly between the ends of an n-site chain.
BlockSpec interior_block(std::size_t n_sites, double shift_mev);

}  // namespace qdent
