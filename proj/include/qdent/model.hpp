#pragma once

// Units, domain types and the occupation basis shared by every other module.
//
// Energies are in meV, times in ps, rates in 1/ps. Occupation bitstrings use
// dot 0 as the least significant bit.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdent/errors.hpp"

namespace qdent {

using Complex = std::complex<double>;
using Occupation = std::uint64_t;

namespace units {
/// Reduced Planck constant in meV * ps.
inline constexpr double hbar = 0.6582119569;
}  // namespace units

struct DotSpec {
    double exciton_energy_mev = 0.0;
    double decay_rate_per_ps = 0.0;
};

/// A linear chain of dots with nearest-neighbour Förster couplings.
class ChainSpec {
public:
    ChainSpec(std::vector<DotSpec> dots, std::vector<double> couplings_mev);

    static ChainSpec uniform(std::size_t n_dots, double v_f_mev, double energy_mev = 0.0,
                             double decay_rate_per_ps = 0.0);

    std::size_t size() const { return dots_.size(); }
    const std::vector<DotSpec>& dots() const { return dots_; }
    const std::vector<double>& couplings() const { return couplings_; }
    std::vector<double> decay_rates() const;

    /// True when every site energy and every coupling are equal.
    bool is_uniform() const;

private:
    std::vector<DotSpec> dots_;
    std::vector<double> couplings_;
};

/// Excitation-number restriction of a basis.
struct Sector {
    enum class Kind { All, Exactly, AtMost };
    Kind kind = Kind::All;
    unsigned k = 0;

    static Sector all() { return {Kind::All, 0}; }
    static Sector exactly(unsigned k) { return {Kind::Exactly, k}; }
    static Sector at_most(unsigned k) { return {Kind::AtMost, k}; }

    bool contains(unsigned excitations) const;
    std::string to_string() const;
};

/// Bijection between occupation bitstrings of a sector and vector indices.
/// States are ordered by the integer value of their bitstring.
class BasisIndex {
public:
    static constexpr std::size_t max_dimension = std::size_t{1} << 20;

    BasisIndex(std::size_t n_dots, Sector sector);

    std::size_t n_dots() const { return n_dots_; }
    const Sector& sector() const { return sector_; }
    std::size_t dimension() const { return states_.size(); }

    Occupation bitstring_of(std::size_t index) const { return states_.at(index); }
    bool contains(Occupation occupation) const;
    /// Throws SectorViolation when the occupation lies outside the sector.
    std::size_t index_of(Occupation occupation) const;
    const std::vector<Occupation>& states() const { return states_; }

    bool operator==(const BasisIndex& other) const {
        return n_dots_ == other.n_dots_ && sector_.kind == other.sector_.kind &&
               sector_.k == other.sector_.k;
    }

private:
    std::size_t n_dots_;
    Sector sector_;
    std::vector<Occupation> states_;
};

using BasisPtr = std::shared_ptr<const BasisIndex>;

/// Builds a basis; throws DimensionOverflow above 2^20 states.
BasisPtr build_basis(std::size_t n_dots, Sector sector);

/// Number of excitations in an occupation bitstring.
inline unsigned excitation_count(Occupation occupation) {
    return static_cast<unsigned>(__builtin_popcountll(occupation));
}

/// Occupation bitstring with the given sites occupied.
Occupation occupation_of(std::span<const std::size_t> sites);

/// Parses a string such as "10010" where the first character is dot 0.
Occupation parse_occupation(const std::string& text);

class StateVector {
public:
    StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

    const BasisIndex& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }

    double norm() const { return amplitudes_.norm(); }
    Complex amplitude(Occupation occupation) const;
    double probability(Occupation occupation) const { return std::norm(amplitude(occupation)); }
    /// Probability that dot `site` carries an exciton.
    double site_population(std::size_t site) const;
    /// Total weight in the k-excitation sector.
    double sector_population(unsigned excitations) const;
    /// <this|other>.
    Complex inner(const StateVector& other) const;

private:
    BasisPtr basis_;
    Eigen::VectorXcd amplitudes_;
};

/// Unit vector on the given occupation; throws SectorViolation outside the sector.
StateVector basis_state(const BasisPtr& basis, Occupation occupation);

}  // namespace qdent
