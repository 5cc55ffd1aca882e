"""Problem parameters and closed-form constants of the half-space theory.

All constants are plain Gamma-function expressions evaluated in double
precision (the stdlib Lanczos implementation is accurate to ~1 ulp, well
beyond the 12 significant digits required downstream).
"""

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "hardy_constant",
    "gagliardo_constant",
    "regional_split_constant",
    "halfspace_tail_constant",
    "critical_exponent",
    "derive_exponents",
    "sphere_area",
    "Params",
    "ConstantsTable",
]


def _check_s(s):
    if not (0.0 < s < 1.0):
        raise DomainError(f"order s must lie in (0, 1), got {s}")


def hardy_constant(s):
    """Sharp constant of the boundary-distance Hardy inequality on a half-space.

    Equals Gamma(s + 1/2)^2 / pi; tends to 1/4 as s -> 1 (the classical value)
    and equals 1/pi at s = 1/2.
    """
    _check_s(s)
    g = math.gamma(s + 0.5)
    return g * g / math.pi


def gagliardo_constant(n, s):
    """Normalizing constant of the singular-kernel double-integral form.

    The quadratic form of the operator with Fourier symbol |xi|^(2s) equals
    this constant times one half of the Gagliardo double integral with kernel
    |x - y|^(-n-2s).
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"dimension n must be a positive integer, got {n}")
    _check_s(s)
    return s * 2.0 ** (2 * s) * math.gamma(n / 2 + s) / (
        math.pi ** (n / 2) * math.gamma(1.0 - s)
    )


def regional_split_constant(s):
    """Coefficient of the Hardy-type boundary term in the half-space splitting.

    The full-space form of a field vanishing outside the half-space equals the
    half-space-restricted double integral plus this constant times the
    x_1^(-2s)-weighted squared L2 norm.  Strictly below hardy_constant except
    at s = 1/2, where both equal 1/pi.
    """
    _check_s(s)
    return 2.0 ** (2 * s - 1) * math.gamma(s + 0.5) / (
        math.sqrt(math.pi) * math.gamma(1.0 - s)
    )


def halfspace_tail_constant(n, s):
    """Constant c such that int_{y_1 < x_1 - d} |x-y|^(-n-2s) dy = c d^(-2s) / (2s)."""
    if n < 1:
        raise DomainError(f"dimension n must be >= 1, got {n}")
    _check_s(s)
    return math.pi ** ((n - 1) / 2) * math.gamma(s + 0.5) / math.gamma(n / 2 + s)


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def critical_exponent(n, s):
    """Largest admissible Lebesgue exponent 2n/(n - 2s)."""
    _check_s(s)
    if n <= 2 * s:
        raise DomainError(f"need n > 2s, got n={n}, s={s}")
    return 2.0 * n / (n - 2.0 * s)


def derive_exponents(n, s, p):
    """Return (two_star, b) with b = n (1/p - 1/two_star).

    b vanishes exactly at p = two_star and increases to s as p decreases
    to 2.
    """
    two_star = critical_exponent(n, s)
    if not (2.0 < p <= two_star + 1e-12):
        raise DomainError(f"exponent p must lie in (2, {two_star}], got {p}")
    b = n * (1.0 / p - 1.0 / two_star)
    return two_star, max(b, 0.0)


@dataclass(frozen=True)
class Params:
    """Validated problem data (n, s, p, lam) with derived exponents."""

    n: int
    s: float
    p: float
    lam: float
    two_star: float
    b: float

    @classmethod
    def create(cls, n, s, p, lam):
        if n not in (1, 2, 3):
            raise DomainError(f"dimension n must be 1, 2 or 3, got {n}")
        two_star, b = derive_exponents(n, s, p)
        if not lam < hardy_constant(s):
            raise DomainError(
                f"coupling lam={lam} must be below the Hardy constant "
                f"{hardy_constant(s):.12g}"
            )
        return cls(n=n, s=s, p=p, lam=float(lam), two_star=two_star, b=b)

    @property
    def hardy(self):
        return hardy_constant(self.s)

    def to_dict(self):
        return {
            "n": self.n,
            "s": self.s,
            "p": self.p,
            "lambda": self.lam,
            "two_star": self.two_star,
            "b": self.b,
        }


@dataclass(frozen=True)
class ConstantsTable:
    """Closed-form constants at one (n, s), plus a numerical Sobolev estimate.

    sobolev_estimate has no closed form here; it is produced by evaluating the
    Rayleigh quotient of the sampled whole-space extremal at two resolutions
    and carries half their spread as an uncertainty.
    """

    n: int
    s: float
    hardy: float
    gagliardo: float
    gamma: float
    sobolev_estimate: float
    sobolev_uncertainty: float

    def __post_init__(self):
        for name in ("hardy", "gagliardo", "gamma", "sobolev_estimate"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"constant {name} must be positive")

    def to_dict(self):
        return {
            "n": self.n,
            "s": self.s,
            "hardy": self.hardy,
            "gagliardo": self.gagliardo,
            "gamma": self.gamma,
            "sobolev_estimate": self.sobolev_estimate,
            "sobolev_uncertainty": self.sobolev_uncertainty,
        }
