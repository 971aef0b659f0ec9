#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace fodesim {

// Base class for all library failures. The CLI maps these to exit codes:
// InvalidParameter -> 2, everything else -> 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class PoleError : public Error {
public:
    PoleError(const std::string& what, std::complex<double> s) : Error(what), s_(s) {}
    std::complex<double> s() const noexcept { return s_; }

private:
    std::complex<double> s_;
};

class IllPosedDiscretization : public Error {
public:
    using Error::Error;
};

class NoEquilibrium : public Error {
public:
    using Error::Error;
};

class Incommensurate : public Error {
public:
    using Error::Error;
};

class RootFindingFailure : public Error {
public:
    RootFindingFailure(const std::string& what, int iterations, double worst_residual)
        : Error(what), iterations_(iterations), worst_residual_(worst_residual) {}
    int iterations() const noexcept { return iterations_; }
    double worst_residual() const noexcept { return worst_residual_; }

private:
    int iterations_;
    double worst_residual_;
};

}  // namespace fodesim
