#ifndef MXMSE_CORE_ERRORS_HPP
#define MXMSE_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mxmse {

// Error categories; the C API maps these 1:1 onto status codes.
enum class errc {
    invalid_argument = 1,
    unknown_format = 2,
    parse_error = 3,
    truncated = 4,
    unknown_dtype = 5,
    io_error = 6,
    mismatch = 7,
    numeric_error = 8,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace mxmse

#endif
