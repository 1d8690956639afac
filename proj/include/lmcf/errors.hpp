#pragma once

#include <stdexcept>
#include <string>

namespace lmcf {

/// Coarse error category; the CLI maps each category to an exit code.
enum class ErrorCategory { Config, Numerical, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), category_(category), kind_(std::move(kind)) {}

    ErrorCategory category() const noexcept { return category_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

#define LMCF_DEFINE_ERROR(Name, Category)                                     \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what)                                \
            : Error(ErrorCategory::Category, #Name, what) {}                  \
    };

// complexgeom
LMCF_DEFINE_ERROR(NotClosed, Numerical)
// surfaces
LMCF_DEFINE_ERROR(ZeroParameter, Numerical)
LMCF_DEFINE_ERROR(BadBridge, Numerical)
LMCF_DEFINE_ERROR(DegeneratePoint, Numerical)
LMCF_DEFINE_ERROR(TruncationError, Numerical)
LMCF_DEFINE_ERROR(NotGraphical, Numerical)
// flow
LMCF_DEFINE_ERROR(OriginContact, Numerical)
LMCF_DEFINE_ERROR(StepCollapse, Numerical)
LMCF_DEFINE_ERROR(OutOfRange, Numerical)
LMCF_DEFINE_ERROR(ShootingFailed, Numerical)
// gaussian
LMCF_DEFINE_ERROR(ConstantField, Numerical)
LMCF_DEFINE_ERROR(DegreeTooLarge, Numerical)
LMCF_DEFINE_ERROR(IntegerRate, Numerical)
LMCF_DEFINE_ERROR(BranchAmbiguous, Numerical)
// teardrop
LMCF_DEFINE_ERROR(SingularGram, Numerical)
LMCF_DEFINE_ERROR(NonPositiveNorm, Numerical)
// detect
LMCF_DEFINE_ERROR(NoPinch, Numerical)
LMCF_DEFINE_ERROR(NoSignChange, Numerical)
// cli / io
LMCF_DEFINE_ERROR(ConfigInvalid, Config)
LMCF_DEFINE_ERROR(IoError, Io)
LMCF_DEFINE_ERROR(Mismatch, Numerical)

#undef LMCF_DEFINE_ERROR

} // namespace lmcf
