#pragma once

#include <stdexcept>
#include <string>

namespace ndtherm {

// Base class for every error thrown by this library. The name() of each
// subclass is stable and used verbatim by the CLI error reporting.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* name() const noexcept { return "Error"; }
};

#define NDTHERM_DEFINE_ERROR(ClassName)                                    \
    class ClassName : public Error {                                       \
    public:                                                                \
        explicit ClassName(const std::string& what) : Error(what) {}       \
        const char* name() const noexcept override { return #ClassName; }  \
    }

NDTHERM_DEFINE_ERROR(ValidationError);
NDTHERM_DEFINE_ERROR(IoError);
NDTHERM_DEFINE_ERROR(ConfigError);

// numerics
NDTHERM_DEFINE_ERROR(NotPositiveDefinite);
NDTHERM_DEFINE_ERROR(SingularNormalEquations);
NDTHERM_DEFINE_ERROR(NonFiniteResidual);
NDTHERM_DEFINE_ERROR(NonFiniteObjective);

// estimators
NDTHERM_DEFINE_ERROR(UnderDetermined);
NDTHERM_DEFINE_ERROR(FitDiverged);
NDTHERM_DEFINE_ERROR(DipDetectionFailed);
NDTHERM_DEFINE_ERROR(DegenerateRegression);
NDTHERM_DEFINE_ERROR(DegenerateTargets);
NDTHERM_DEFINE_ERROR(GridMismatch);
NDTHERM_DEFINE_ERROR(InternalError);

#undef NDTHERM_DEFINE_ERROR

} // namespace ndtherm
