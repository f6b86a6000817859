#include <gtest/gtest.h>

#include <array>

#include "qdent/errors.hpp"
#include "qdent/model.hpp"

using namespace qdent;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST(Basis, Dimensions) {
    EXPECT_EQ(build_basis(5, Sector::all())->dimension(), 32u);
    EXPECT_EQ(build_basis(7, Sector::exactly(1))->dimension(), 7u);
    EXPECT_EQ(build_basis(5, Sector::at_most(1))->dimension(), 6u);
}

TEST(Basis, SectorDimensionsMatchBinomialSums) {
    for (std::size_t n = 1; n <= 12; ++n) {
        EXPECT_EQ(build_basis(n, Sector::all())->dimension(), std::size_t{1} << n);
        std::size_t at_most = 0;
        for (unsigned k = 0; k <= n; ++k) {
            at_most += binomial(n, k);
            EXPECT_EQ(build_basis(n, Sector::exactly(k))->dimension(), binomial(n, k)) << n << " " << k;
            EXPECT_EQ(build_basis(n, Sector::at_most(k))->dimension(), at_most) << n << " " << k;
        }
    }
}

TEST(Basis, RoundTrip) {
    for (auto sector : {Sector::all(), Sector::exactly(3), Sector::at_most(2)}) {
        const auto basis = build_basis(9, sector);
        for (std::size_t j = 0; j < basis->dimension(); ++j) {
            EXPECT_EQ(basis->index_of(basis->bitstring_of(j)), j);
            EXPECT_TRUE(sector.contains(excitation_count(basis->bitstring_of(j))));
        }
    }
}

TEST(Basis, LexicographicOrder) {
    const auto basis = build_basis(6, Sector::exactly(2));
    for (std::size_t j = 1; j < basis->dimension(); ++j)
        EXPECT_LT(basis->bitstring_of(j - 1), basis->bitstring_of(j));
}

TEST(Basis, Limits) {
    EXPECT_THROW(build_basis(21, Sector::all()), DimensionOverflow);
    EXPECT_NO_THROW(build_basis(64, Sector::exactly(1)));
    EXPECT_NO_THROW(build_basis(64, Sector::at_most(1)));
    EXPECT_THROW(build_basis(40, Sector::exactly(20)), DimensionOverflow);
    EXPECT_THROW(build_basis(0, Sector::all()), InvalidArgument);
}

TEST(Basis, IndexOfOutsideSector) {
    const auto basis = build_basis(7, Sector::exactly(1));
    EXPECT_THROW(basis->index_of(0b11), SectorViolation);
    EXPECT_THROW(basis->index_of(0), SectorViolation);
    EXPECT_FALSE(basis->contains(0b101));
}

TEST(BasisState, BitOrder) {
    const auto full = build_basis(5, Sector::all());
    EXPECT_EQ(basis_state(full, 0).amplitudes()(0), Complex(1.0));
    const auto all_up = basis_state(full, parse_occupation("11111"));
    EXPECT_EQ(all_up.amplitudes()(31), Complex(1.0));
    EXPECT_DOUBLE_EQ(all_up.norm(), 1.0);

    const auto single = build_basis(7, Sector::exactly(1));
    const std::array<std::size_t, 1> site{3};
    const auto psi = basis_state(single, occupation_of(site));
    EXPECT_EQ(psi.amplitudes()(3), Complex(1.0));
    EXPECT_DOUBLE_EQ(psi.site_population(3), 1.0);
    EXPECT_DOUBLE_EQ(psi.site_population(2), 0.0);
}

TEST(BasisState, ParseOccupationDotZeroIsFirstCharacter) {
    EXPECT_EQ(parse_occupation("10000"), Occupation{1});
    EXPECT_EQ(parse_occupation("00001"), Occupation{16});
    EXPECT_THROW(parse_occupation("10a"), InvalidArgument);
}

TEST(BasisState, SectorViolation) {
    const auto single = build_basis(7, Sector::exactly(1));
    EXPECT_THROW(basis_state(single, 0b11), SectorViolation);
}

TEST(StateVector, DimensionChecked) {
    const auto basis = build_basis(3, Sector::all());
    EXPECT_THROW(StateVector(basis, Eigen::VectorXcd::Zero(7)), DimensionMismatch);
}

TEST(StateVector, PopulationsAndInner) {
    const auto basis = build_basis(3, Sector::all());
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    v(basis->index_of(0b001)) = std::sqrt(0.25);
    v(basis->index_of(0b011)) = Complex(0.0, std::sqrt(0.75));
    const StateVector psi(basis, v);
    EXPECT_NEAR(psi.site_population(0), 1.0, 1e-15);
    EXPECT_NEAR(psi.site_population(1), 0.75, 1e-15);
    EXPECT_NEAR(psi.sector_population(1), 0.25, 1e-15);
    EXPECT_NEAR(psi.sector_population(2), 0.75, 1e-15);
    EXPECT_NEAR(std::abs(psi.inner(psi) - 1.0), 0.0, 1e-15);
}

TEST(ChainSpec, Validation) {
    EXPECT_THROW(ChainSpec({DotSpec{}, DotSpec{}}, {}), DimensionMismatch);
    EXPECT_THROW(ChainSpec({DotSpec{0.0, -1.0}}, {}), NegativeRate);
    const auto chain = ChainSpec::uniform(4, 0.2, 1.0, 0.001);
    EXPECT_TRUE(chain.is_uniform());
    EXPECT_EQ(chain.couplings().size(), 3u);
    EXPECT_EQ(chain.decay_rates(), std::vector<double>(4, 0.001));
    EXPECT_FALSE(ChainSpec({DotSpec{}, DotSpec{}, DotSpec{}}, {0.2, 0.3}).is_uniform());
}
