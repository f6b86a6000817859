#include "qdent/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qdent {

ChainSpec::ChainSpec(std::vector<DotSpec> dots, std::vector<double> couplings_mev)
    : dots_(std::move(dots)), couplings_(std::move(couplings_mev)) {
    if (dots_.empty()) throw InvalidArgument("chain must contain at least one dot");
    if (couplings_.size() + 1 != dots_.size())
        throw DimensionMismatch(fmt::format("chain of {} dots needs {} couplings, got {}",
                                            dots_.size(), dots_.size() - 1, couplings_.size()));
    for (const auto& dot : dots_) {
        if (!(dot.decay_rate_per_ps >= 0.0)) throw NegativeRate("dot decay rate must be >= 0");
        if (!std::isfinite(dot.exciton_energy_mev)) throw InvalidArgument("non-finite exciton energy");
    }
    for (double v : couplings_)
        if (!std::isfinite(v)) throw InvalidArgument("non-finite Förster coupling");
}

ChainSpec ChainSpec::uniform(std::size_t n_dots, double v_f_mev, double energy_mev,
                             double decay_rate_per_ps) {
    if (n_dots == 0) throw InvalidArgument("chain must contain at least one dot");
    return ChainSpec(std::vector<DotSpec>(n_dots, DotSpec{energy_mev, decay_rate_per_ps}),
                     std::vector<double>(n_dots - 1, v_f_mev));
}

std::vector<double> ChainSpec::decay_rates() const {
    std::vector<double> rates;
    rates.reserve(dots_.size());
    for (const auto& dot : dots_) rates.push_back(dot.decay_rate_per_ps);
    return rates;
}

bool ChainSpec::is_uniform() const {
    const double e0 = dots_.front().exciton_energy_mev;
    bool uniform = std::all_of(dots_.begin(), dots_.end(),
                               [&](const DotSpec& d) { return d.exciton_energy_mev == e0; });
    if (!couplings_.empty())
        uniform = uniform && std::all_of(couplings_.begin(), couplings_.end(),
                                         [&](double v) { return v == couplings_.front(); });
    return uniform;
}

bool Sector::contains(unsigned excitations) const {
    switch (kind) {
        case Kind::All: return true;
        case Kind::Exactly: return excitations == k;
        case Kind::AtMost: return excitations <= k;
    }
    return false;
}

std::string Sector::to_string() const {
    switch (kind) {
        case Kind::All: return "ALL";
        case Kind::Exactly: return fmt::format("EXACTLY({})", k);
        case Kind::AtMost: return fmt::format("AT_MOST({})", k);
    }
    return "?";
}

namespace {

// C(n, k) saturated at limit + 1 so the overflow test never wraps.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t limit) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double value = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        value = value * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (value > static_cast<long double>(limit)) return limit + 1;
    }
    return static_cast<std::size_t>(std::llround(static_cast<double>(value)));
}

// Appends every n-bit word with exactly k bits set, in increasing order.
void append_fixed_popcount(std::size_t n, unsigned k, std::vector<Occupation>& out) {
    if (k == 0) {
        out.push_back(0);
        return;
    }
    if (k > n) return;
    Occupation word = (k == 64) ? ~Occupation{0} : ((Occupation{1} << k) - 1);
    const Occupation top = (n == 64) ? 0 : (Occupation{1} << n);
    while (true) {
        out.push_back(word);
        // Gosper's hack: next larger word with the same popcount.
        const Occupation c = word & (~word + 1);
        const Occupation r = word + c;
        if (r == 0) break;  // wrapped past 64 bits
        word = (((r ^ word) >> 2) / c) | r;
        if (n < 64 && word >= top) break;
    }
}

}  // namespace

BasisIndex::BasisIndex(std::size_t n_dots, Sector sector) : n_dots_(n_dots), sector_(sector) {
    if (n_dots == 0 || n_dots > 64)
        throw InvalidArgument(fmt::format("n_dots must be in [1, 64], got {}", n_dots));
    std::size_t dimension = 0;
    switch (sector.kind) {
        case Sector::Kind::All:
            if (n_dots > 20)
                throw DimensionOverflow(
                    fmt::format("full basis of {} dots exceeds 2^20 states", n_dots));
            dimension = std::size_t{1} << n_dots;
            break;
        case Sector::Kind::Exactly:
            dimension = binomial_capped(n_dots, sector.k, max_dimension);
            break;
        case Sector::Kind::AtMost:
            for (unsigned k = 0; k <= sector.k && k <= n_dots; ++k) {
                dimension += binomial_capped(n_dots, k, max_dimension);
                if (dimension > max_dimension) break;
            }
            break;
    }
    if (dimension > max_dimension)
        throw DimensionOverflow(fmt::format("sector {} of {} dots exceeds 2^20 states",
                                            sector.to_string(), n_dots));
    if (dimension == 0)
        throw SectorViolation(
            fmt::format("sector {} is empty for {} dots", sector.to_string(), n_dots));

    states_.reserve(dimension);
    switch (sector.kind) {
        case Sector::Kind::All:
            for (Occupation s = 0; s < dimension; ++s) states_.push_back(s);
            break;
        case Sector::Kind::Exactly:
            append_fixed_popcount(n_dots, sector.k, states_);
            break;
        case Sector::Kind::AtMost:
            for (unsigned k = 0; k <= sector.k && k <= n_dots; ++k)
                append_fixed_popcount(n_dots, k, states_);
            std::sort(states_.begin(), states_.end());
            break;
    }
}

bool BasisIndex::contains(Occupation occupation) const {
    if (n_dots_ < 64 && (occupation >> n_dots_) != 0) return false;
    if (!sector_.contains(excitation_count(occupation))) return false;
    return true;
}

std::size_t BasisIndex::index_of(Occupation occupation) const {
    if (!contains(occupation))
        throw SectorViolation(fmt::format("occupation {:#x} lies outside {} on {} dots",
                                          occupation, sector_.to_string(), n_dots_));
    if (sector_.kind == Sector::Kind::All) return static_cast<std::size_t>(occupation);
    const auto it = std::lower_bound(states_.begin(), states_.end(), occupation);
    return static_cast<std::size_t>(it - states_.begin());
}

BasisPtr build_basis(std::size_t n_dots, Sector sector) {
    return std::make_shared<const BasisIndex>(n_dots, sector);
}

Occupation occupation_of(std::span<const std::size_t> sites) {
    Occupation occupation = 0;
    for (std::size_t site : sites) {
        if (site >= 64) throw InvalidArgument("site index out of range");
        occupation |= Occupation{1} << site;
    }
    return occupation;
}

Occupation parse_occupation(const std::string& text) {
    if (text.empty() || text.size() > 64) throw InvalidArgument("bad occupation string");
    Occupation occupation = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1' || text[i] == 'X')
            occupation |= Occupation{1} << i;
        else if (text[i] != '0')
            throw InvalidArgument(fmt::format("bad occupation character '{}'", text[i]));
    }
    return occupation;
}

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (!basis_) throw InvalidArgument("state vector needs a basis");
    if (static_cast<std::size_t>(amplitudes_.size()) != basis_->dimension())
        throw DimensionMismatch(fmt::format("{} amplitudes for a basis of dimension {}",
                                            amplitudes_.size(), basis_->dimension()));
}

Complex StateVector::amplitude(Occupation occupation) const {
    return amplitudes_(static_cast<Eigen::Index>(basis_->index_of(occupation)));
}

double StateVector::site_population(std::size_t site) const {
    if (site >= basis_->n_dots()) throw OutOfRange("site index out of range");
    double total = 0.0;
    const auto& states = basis_->states();
    for (std::size_t j = 0; j < states.size(); ++j)
        if ((states[j] >> site) & 1U) total += std::norm(amplitudes_(static_cast<Eigen::Index>(j)));
    return total;
}

double StateVector::sector_population(unsigned excitations) const {
    double total = 0.0;
    const auto& states = basis_->states();
    for (std::size_t j = 0; j < states.size(); ++j)
        if (excitation_count(states[j]) == excitations)
            total += std::norm(amplitudes_(static_cast<Eigen::Index>(j)));
    return total;
}

Complex StateVector::inner(const StateVector& other) const {
    if (!(basis() == other.basis())) throw DimensionMismatch("states live in different bases");
    return amplitudes_.dot(other.amplitudes_);
}

StateVector basis_state(const BasisPtr& basis, Occupation occupation) {
    Eigen::VectorXcd amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()));
    amplitudes(static_cast<Eigen::Index>(basis->index_of(occupation))) = 1.0;
    return StateVector(basis, std::move(amplitudes));
}

}  // namespace qdent
