from typing import Any, List, Optional


class EigenWKBError(Exception):
    """Base class for every failure raised by the library."""


class NonConvergence(EigenWKBError):
    def __init__(self, iterations: int, residual: Any = None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"root finder did not converge after {iterations} iterations")


class ArgsTooShort(EigenWKBError):
    def __init__(self, needed: int, given: int):
        self.needed = needed
        self.given = given
        super().__init__(f"need {needed} Bell arguments, got {given}")


class Resonance(EigenWKBError):
    def __init__(self, j: int, n: int):
        self.j = j
        self.n = n
        super().__init__(f"resonant degree: lambda_{j} == lambda_{n}")


class ZeroShiftedEigenvalue(EigenWKBError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"lambda_{n} equals rho_00, epsilon_{n} is undefined")


class InsideHull(EigenWKBError):
    def __init__(self, z: Any):
        self.z = z
        super().__init__(f"point {z} lies inside the convex hull of the roots of rho_M")


class BranchAmbiguity(EigenWKBError):
    def __init__(self, z: Any):
        self.z = z
        super().__init__(f"branch of w_1 is ambiguous near {z}; path runs too close to the hull")


class QuadratureFailure(EigenWKBError):
    def __init__(self, depth: int, error: Any):
        self.depth = depth
        self.error = error
        super().__init__(f"quadrature tolerance not met at bisection depth {depth} (error {error})")


class OrderTooSmall(EigenWKBError):
    def __init__(self, M: int):
        self.M = M
        super().__init__(f"companion matrix needs M >= 3, got M = {M}")


class PoleOfCoefficient(EigenWKBError):
    def __init__(self, z: Any):
        self.z = z
        super().__init__(f"rho_M vanishes at {z}")


class NotMonic(EigenWKBError):
    pass


class DegreeTooSmall(EigenWKBError):
    pass


class InvalidOperator(EigenWKBError):
    def __init__(self, violations: List[Any]):
        self.violations = violations
        details = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid exactly solvable operator: {details}")


class PathError(EigenWKBError):
    pass


class TableRangeError(EigenWKBError):
    def __init__(self, what: str, index: Any, order: int):
        super().__init__(f"{what}[{index}] is outside the table of order {order}")


class ConfigError(EigenWKBError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
