#include "qdent/hamiltonian.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qdent {

double hermiticity_error(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
        throw DimensionMismatch(fmt::format("generator must be square, got {}x{}",
                                            entries_.rows(), entries_.cols()));
    const double err = hermiticity_error(entries_);
    if (!(err <= tolerance))
        throw NonHermitianInput(fmt::format("generator deviates from Hermitian by {:.3e}", err));
}

HermitianMatrix HermitianMatrix::zero(std::size_t dimension) {
    const auto n = static_cast<Eigen::Index>(dimension);
    return HermitianMatrix(Eigen::MatrixXcd::Zero(n, n));
}

double HermitianMatrix::max_row_norm() const {
    if (entries_.size() == 0) return 0.0;
    return entries_.cwiseAbs().rowwise().sum().maxCoeff();
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
    if (dimension() != other.dimension()) throw DimensionMismatch("generator dimensions differ");
    return HermitianMatrix(entries_ + other.entries_);
}

HermitianMatrix HermitianMatrix::scaled(double factor) const {
    return HermitianMatrix(entries_ * factor);
}

double DriveSpec::envelope_at(double t_ps) const {
    if (t_ps < start_ps || t_ps >= end_ps()) return 0.0;
    switch (envelope.shape) {
        case Envelope::Shape::Rect: return 1.0;
        case Envelope::Shape::Gaussian: {
            const double centre = start_ps + 0.5 * duration_ps;
            const double x = (t_ps - centre) / envelope.sigma_ps;
            return std::exp(-0.5 * x * x);
        }
    }
    return 0.0;
}

void DriveSpec::validate(std::size_t n_dots) const {
    if (!(rabi_coupling_mev >= 0.0)) throw InvalidArgument("Rabi coupling must be >= 0");
    if (!(duration_ps > 0.0)) throw InvalidArgument("pulse duration must be > 0");
    if (envelope.shape == Envelope::Shape::Gaussian && !(envelope.sigma_ps > 0.0))
        throw InvalidArgument("Gaussian envelope needs sigma > 0");
    for (std::size_t site : target_sites)
        if (site >= n_dots)
            throw OutOfRange(fmt::format("drive target {} outside a {}-dot basis", site, n_dots));
    if (detuning_mev.size() > 1 && detuning_mev.size() != target_sites.size())
        throw DimensionMismatch("detuning list must be empty, scalar or one per target");
}

HermitianMatrix chain_hamiltonian(const ChainSpec& chain, const BasisIndex& basis) {
    if (basis.n_dots() != chain.size())
        throw DimensionMismatch(fmt::format("basis has {} dots, chain has {}", basis.n_dots(),
                                            chain.size()));
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const auto& states = basis.states();
    const auto& dots = chain.dots();
    const auto& couplings = chain.couplings();
    for (Eigen::Index col = 0; col < dim; ++col) {
        const Occupation s = states[static_cast<std::size_t>(col)];
        double diag = 0.0;
        for (std::size_t i = 0; i < dots.size(); ++i)
            if ((s >> i) & 1U) diag += dots[i].exciton_energy_mev;
        h(col, col) = diag;
        for (std::size_t i = 0; i + 1 < dots.size(); ++i) {
            // A hop moves the exciton between i and i+1 when exactly one of them is occupied.
            if (((s >> i) & 1U) == ((s >> (i + 1)) & 1U)) continue;
            const Occupation hopped = s ^ (Occupation{3} << i);
            const auto row = static_cast<Eigen::Index>(basis.index_of(hopped));
            h(row, col) = couplings[i];
        }
    }
    return HermitianMatrix(std::move(h));
}

HermitianMatrix apply_block(const HermitianMatrix& h, const BasisIndex& basis, const BlockSpec& block) {
    if (h.dimension() != basis.dimension()) throw DimensionMismatch("generator/basis mismatch");
    for (std::size_t site : block.blocked_sites)
        if (site >= basis.n_dots())
            throw OutOfRange(fmt::format("blocked site {} outside a {}-dot basis", site, basis.n_dots()));
    Eigen::MatrixXcd entries = h.entries();
    if (block.shift_mev != 0.0) {
        const Occupation mask = occupation_of(block.blocked_sites);
        const auto& states = basis.states();
        for (std::size_t j = 0; j < states.size(); ++j) {
            const auto idx = static_cast<Eigen::Index>(j);
            entries(idx, idx) += block.shift_mev * excitation_count(states[j] & mask);
        }
    }
    return HermitianMatrix(std::move(entries));
}

HermitianMatrix drive_hamiltonian(const DriveSpec& drive, const BasisIndex& basis, double t_ps) {
    drive.validate(basis.n_dots());
    if (basis.sector().kind == Sector::Kind::Exactly)
        throw SectorViolation("a drive changes excitation number; use an ALL or AT_MOST basis");
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const double env = drive.envelope_at(t_ps);
    const bool inside = t_ps >= drive.start_ps && t_ps < drive.end_ps();
    if (!inside) return HermitianMatrix(std::move(h));

    const Complex raise = drive.rabi_coupling_mev * env * std::polar(1.0, drive.phase_rad);
    const auto& states = basis.states();
    for (std::size_t t = 0; t < drive.target_sites.size(); ++t) {
        const std::size_t site = drive.target_sites[t];
        double detuning = 0.0;
        if (drive.detuning_mev.size() == 1) detuning = drive.detuning_mev.front();
        else if (!drive.detuning_mev.empty()) detuning = drive.detuning_mev[t];
        const Occupation bit = Occupation{1} << site;
        for (std::size_t j = 0; j < states.size(); ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            if (states[j] & bit) {
                h(col, col) += detuning;
                continue;
            }
            const Occupation raised = states[j] | bit;
            if (!basis.contains(raised)) continue;
            const auto row = static_cast<Eigen::Index>(basis.index_of(raised));
            h(row, col) += raise;
            h(col, row) += std::conj(raise);
        }
    }
    return HermitianMatrix(std::move(h));
}

Eigen::MatrixXcd excitation_number_operator(const BasisIndex& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        n(j, j) = excitation_count(basis.bitstring_of(static_cast<std::size_t>(j)));
    return n;
}

BlockSpec interior_block(std::size_t n_sites, double shift_mev) {
    BlockSpec block;
    block.shift_mev = shift_mev;
    for (std::size_t i = 1; i + 1 < n_sites; ++i) block.blocked_sites.push_back(i);
    return block;
}

}  // namespace qdent
