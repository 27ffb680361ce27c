#pragma once

#include <stdexcept>
#include <string>

namespace deflate {

enum class ErrorKind {
    structural,
    singular_pivot,
    domain,
    truncation_exhausted,
    rank_deficiency,
    extraction,
    non_termination,
    linear_solve,
    certificate_unavailable,
    parse
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::structural: return "structural";
        case ErrorKind::singular_pivot: return "singular_pivot";
        case ErrorKind::domain: return "domain";
        case ErrorKind::truncation_exhausted: return "truncation_exhausted";
        case ErrorKind::rank_deficiency: return "rank_deficiency";
        case ErrorKind::extraction: return "extraction";
        case ErrorKind::non_termination: return "non_termination";
        case ErrorKind::linear_solve: return "linear_solve";
        case ErrorKind::certificate_unavailable: return "certificate_unavailable";
        case ErrorKind::parse: return "parse";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define DEFLATE_ERROR_TYPE(Name, Kind)                                   \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

DEFLATE_ERROR_TYPE(StructuralError, structural)
DEFLATE_ERROR_TYPE(SingularPivotError, singular_pivot)
DEFLATE_ERROR_TYPE(DomainError, domain)
DEFLATE_ERROR_TYPE(TruncationExhaustedError, truncation_exhausted)
DEFLATE_ERROR_TYPE(RankDeficiencyError, rank_deficiency)
DEFLATE_ERROR_TYPE(ExtractionError, extraction)
DEFLATE_ERROR_TYPE(NonTerminationError, non_termination)
DEFLATE_ERROR_TYPE(LinearSolveError, linear_solve)
DEFLATE_ERROR_TYPE(CertificateUnavailableError, certificate_unavailable)
DEFLATE_ERROR_TYPE(ParseError, parse)

#undef DEFLATE_ERROR_TYPE

}  // namespace deflate
