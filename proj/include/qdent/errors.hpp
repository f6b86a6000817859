#pragma once

#include <stdexcept>
#include <string>

namespace qdent {

/// Base of every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QDENT_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

QDENT_DEFINE_ERROR(DimensionOverflow);
QDENT_DEFINE_ERROR(SectorViolation);
QDENT_DEFINE_ERROR(DimensionMismatch);
QDENT_DEFINE_ERROR(NonHermitianInput);
QDENT_DEFINE_ERROR(NormDriftExceeded);
QDENT_DEFINE_ERROR(NegativeRate);
QDENT_DEFINE_ERROR(NoResonanceFound);
QDENT_DEFINE_ERROR(NoMinimumFound);
QDENT_DEFINE_ERROR(InvalidDensityMatrix);
QDENT_DEFINE_ERROR(OutOfRange);
QDENT_DEFINE_ERROR(ArmMismatch);
QDENT_DEFINE_ERROR(InvalidArgument);
QDENT_DEFINE_ERROR(ConfigError);

#undef QDENT_DEFINE_ERROR

}  // namespace qdent
