#ifndef COLPP_ERRORS_HPP
#define COLPP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace colpp {

// Error categories surfaced through the CLI exit codes (2 = config, 3 = numerical).
enum class errc {
    invalid_region,
    insufficient_points,
    out_of_range,
    invalid_config,
    degenerate_conditional,
    initialization_failure,
    numerical_failure,
    infeasible_model,
    io_failure,
};

class error : public std::runtime_error {
public:
    error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    errc kind() const noexcept { return kind_; }

private:
    errc kind_;
};

} // namespace colpp

#endif
