#pragma once

#include <stdexcept>
#include <string>

namespace cbp {

/// Base class for all cbp exceptions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad argument, bad range).
struct InvalidInput : Error {
    using Error::Error;
};

/// No shift in the allowed range made the Cholesky factorization succeed.
struct NotFactorizable : Error {
    using Error::Error;
};

/// The Jacobi eigensolver exceeded its sweep cap.
struct NoConvergence : Error {
    using Error::Error;
};

/// The conic solver failed where a definite answer was required.
struct SolverFailure : Error {
    using Error::Error;
};

/// A matrix was not in the requested cone during a decomposition.
struct NotInCone : Error {
    using Error::Error;
};

/// The first iterate of a pursuit sequence is infeasible and no
/// fallback was requested.
struct InfeasibleStart : Error {
    using Error::Error;
};

/// Polynomial degree does not match the Gram basis.
struct DegreeMismatch : Error {
    using Error::Error;
};

/// Problem instance exceeds the exhaustive-search scale.
struct TooLarge : Error {
    using Error::Error;
};

/// Clique inequalities are only enumerated up to triangles.
struct UnsupportedK : Error {
    using Error::Error;
};

/// A cone index did not address a block of the expected kind.
struct InvalidIndex : Error {
    using Error::Error;
};

/// A file could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

} // namespace cbp
