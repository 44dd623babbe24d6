// errors.hpp - exception hierarchy shared by all olsim modules

#pragma once

#include <stdexcept>
#include <string>

namespace olsim {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define OLSIM_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}  \
    }

OLSIM_DEFINE_ERROR(InvalidParams);
OLSIM_DEFINE_ERROR(CriticalDetuning);
OLSIM_DEFINE_ERROR(QuadratureFailure);
OLSIM_DEFINE_ERROR(StepTooLarge);
OLSIM_DEFINE_ERROR(RootSearchFailure);
OLSIM_DEFINE_ERROR(ExtrapolationUnstable);
OLSIM_DEFINE_ERROR(NotPSD);
OLSIM_DEFINE_ERROR(WrongRegime);
OLSIM_DEFINE_ERROR(UnsupportedState);
OLSIM_DEFINE_ERROR(StateOutOfRange);
OLSIM_DEFINE_ERROR(DimensionCap);
OLSIM_DEFINE_ERROR(GridTooCoarse);
OLSIM_DEFINE_ERROR(ConfigError);
OLSIM_DEFINE_ERROR(UnknownPreset);

#undef OLSIM_DEFINE_ERROR

} // namespace olsim
