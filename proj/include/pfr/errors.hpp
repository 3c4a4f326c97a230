#pragma once

#include <stdexcept>
#include <string>

namespace pfr {

// Error categories map onto the CLI exit-code contract:
// usage-class errors (bad input, bad flags) exit 1, model-class errors
// (reducible matrix, A1 failure, invalid certificate) exit 2.
enum class ErrorKind {
    parse,        // malformed matrix file
    domain,       // argument outside its domain
    reducible,    // matrix is not irreducible
    a1_fail,      // sup h < 1 on the finite domain
    certificate,  // minorization certificate invalid / not found
    a4_violation, // kernel coin probability outside [0,1]
    numeric,      // solver produced an inconsistent result
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

    bool is_usage() const {
        return kind_ == ErrorKind::parse || kind_ == ErrorKind::domain;
    }

  private:
    ErrorKind kind_;
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::domain: return "domain";
    case ErrorKind::reducible: return "reducible";
    case ErrorKind::a1_fail: return "a1_fail";
    case ErrorKind::certificate: return "certificate";
    case ErrorKind::a4_violation: return "a4_violation";
    case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

} // namespace pfr
