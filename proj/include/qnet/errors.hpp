#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NotSingleRate : std::runtime_error {
    explicit NotSingleRate(const std::string& what) : std::runtime_error(what) {}
};

struct Infeasible : std::runtime_error {
    explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

struct BadSlack : std::runtime_error {
    explicit BadSlack(const std::string& what) : std::runtime_error(what) {}
};

struct CouplingBroken : std::runtime_error {
    explicit CouplingBroken(const std::string& what) : std::runtime_error(what) {}
};

struct StateSpaceTooLarge : std::runtime_error {
    explicit StateSpaceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qnet
