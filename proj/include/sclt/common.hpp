#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sclt {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    numerical_failure,
    branch_selection,
    singular_operator,
    quadrature_failure,
    unsupported_regime,
    degenerate_sample,
    retry_exhausted,
    io_error,
    schema_mismatch,
    config_error,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type so
// callers (CLI, harness) can map codes to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

}  // namespace sclt
