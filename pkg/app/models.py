"""
Hamiltonian models.

Exact builders for the parametric Hamiltonians H(nu) analysed by the tool:
coupled two-site and three-site resonators, the SSH chain with a corner
link, the Hatano-Nelson chain with disorder and generic companion matrices.
All parameters are exact rationals; irrational physical values are supplied
through the 12-digit presets below.
"""

import logging
from fractions import Fraction
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple, Type

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, field_validator, model_validator

from app.errors import InputError
from app.tools.charpoly import ParametricMatrix
from app.tools.poly import IMAG_UNIT, NU, UniPoly, parse_rational, parse_unipoly

# Set up logging
logger = logging.getLogger(__name__)

Rational = Annotated[Fraction, BeforeValidator(parse_rational), PlainSerializer(str, return_type=str)]

# 12 significant digits
SQRT2 = Fraction("1.41421356237")
INV_SQRT3 = Fraction("0.577350269190")
COS_PI_4 = Fraction("0.707106781187")
SIN_PI_4 = Fraction("0.707106781187")


class ModelParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)


class TwoSiteParams(ModelParams):
    """Two coupled sites with gain/loss; the onsite detuning is the perturbation."""

    kappa: Rational = Field(default=Fraction(1), description="Coupling between the sites")
    gamma: Rational = Field(default=Fraction(1), description="Gain/loss coefficient")

    @field_validator("kappa")
    @classmethod
    def _coupled(cls, value: Fraction) -> Fraction:
        if value == 0:
            raise ValueError("kappa must be non-zero (decoupled sites)")
        return value


class TrimerParams(ModelParams):
    """
    Three coupled sites; the outer detunings are nu and nu*tan_phi.

    With ``kappa_squared`` set, the couplings are written as 1 above and
    kappa^2 below the diagonal, a similarity transform of the symmetric
    form that keeps kappa^2 exact.
    """

    kappa: Rational = Field(default=Fraction(1), description="Nearest-neighbour coupling")
    gamma: Rational = Field(default=Fraction(1), description="Gain/loss coefficient")
    tan_phi: Rational = Field(default=Fraction(0), description="Ratio of the two detunings")
    kappa_squared: Optional[Rational] = Field(default=None, description="Exact kappa^2 (gauged form)")

    @field_validator("kappa", "kappa_squared")
    @classmethod
    def _coupled(cls, value: Optional[Fraction]) -> Optional[Fraction]:
        if value is not None and value == 0:
            raise ValueError("coupling must be non-zero")
        return value


class SSHParams(ModelParams):
    """SSH chain with non-reciprocal intra-cell hopping and a corner link nu."""

    n_sites: int = Field(default=5, ge=2, description="Number of sites N")
    t1: Rational = Field(default=Fraction(1), description="Intra-cell hopping")
    t2: Rational = Field(default=Fraction(1), description="Inter-cell hopping (sub-diagonal)")
    gamma: Rational = Field(default=Fraction(1), description="Non-reciprocity of the intra-cell hopping")
    t2_back: Optional[Rational] = Field(default=None, description="Inter-cell hopping above the diagonal; defaults to t2")
    corner_scale: Rational = Field(default=Fraction(1), description="Scale sigma of the corner entry sigma*nu")

    @property
    def t2_upper(self) -> Fraction:
        return self.t2 if self.t2_back is None else self.t2_back


class HNParams(ModelParams):
    """
    Hatano-Nelson chain perturbed along a direction of (delta, Delta, eta).

    delta = nu*cos_theta*cos_phi scales the hopping, Delta = nu*cos_theta*sin_phi
    sits in the corner (1, N) and eta = nu*sin_theta at (1, N-1). The six
    disorder factors a, b, m (above the diagonal) and c, d, n (below) apply
    to the four-site chain; longer chains take ``upper_scales`` and
    ``lower_scales``.
    """

    n_sites: int = Field(default=4, ge=4, description="Number of sites N; eta at (1, N-1) must not sit on a hopping bond")
    cos_theta: Rational = Field(default=Fraction(1))
    sin_theta: Rational = Field(default=Fraction(0))
    cos_phi: Rational = Field(default=COS_PI_4)
    sin_phi: Rational = Field(default=SIN_PI_4)
    a: Rational = Fraction(1)
    b: Rational = Fraction(1)
    c: Rational = Fraction(1)
    d: Rational = Fraction(1)
    m: Rational = Fraction(1)
    n: Rational = Fraction(1)
    upper_scales: Optional[List[Rational]] = None
    lower_scales: Optional[List[Rational]] = None

    @model_validator(mode="after")
    def _check(self) -> "HNParams":
        factors = [self.a, self.b, self.c, self.d, self.m, self.n]
        factors += list(self.upper_scales or []) + list(self.lower_scales or [])
        if any(f == 0 for f in factors):
            raise ValueError("disorder factors must be non-zero")
        for name in ("upper_scales", "lower_scales"):
            scales = getattr(self, name)
            if scales is not None and len(scales) != self.n_sites - 1:
                raise ValueError(f"{name} needs {self.n_sites - 1} entries")
        if not (self.cos_theta * self.cos_phi or self.cos_theta * self.sin_phi or self.sin_theta):
            raise ValueError("no perturbation dependence: delta, Delta and eta all vanish")
        for cos, sin, label in ((self.cos_theta, self.sin_theta, "theta"), (self.cos_phi, self.sin_phi, "phi")):
            if abs(float(cos * cos + sin * sin) - 1.0) > 1e-6:
                logger.warning(f"cos^2 + sin^2 of {label} differs from 1 by more than 1e-6")
        return self

    def scales(self) -> Tuple[List[Fraction], List[Fraction]]:
        """Hopping scale factors (above, below) the diagonal, one per bond."""
        bonds = self.n_sites - 1
        if self.n_sites == 4:
            upper, lower = [self.a, self.b, self.m], [self.c, self.d, self.n]
        else:
            upper, lower = [Fraction(1)] * bonds, [Fraction(1)] * bonds
        if self.upper_scales is not None:
            upper = list(self.upper_scales)
        if self.lower_scales is not None:
            lower = list(self.lower_scales)
        return upper, lower


class CompanionParams(ModelParams):
    """Coefficients c_0 .. c_{d-1} of lambda^d + c_{d-1} lambda^{d-1} + ... + c_0."""

    coeffs: List[str] = Field(..., min_length=1, description="UniPoly strings in nu")

    def polynomials(self) -> List[UniPoly]:
        return [parse_unipoly(text) for text in self.coeffs]


def _rows(entries: List[List[UniPoly]]) -> ParametricMatrix:
    return ParametricMatrix(tuple(tuple(row) for row in entries))


def _zeros(n: int) -> List[List[UniPoly]]:
    return [[UniPoly() for _ in range(n)] for _ in range(n)]


def two_site(params: TwoSiteParams) -> ParametricMatrix:
    """[[nu + i*gamma, kappa], [kappa, -nu - i*gamma]]."""
    onsite = NU + IMAG_UNIT * params.gamma
    return _rows([[onsite, UniPoly.constant(params.kappa)], [UniPoly.constant(params.kappa), -onsite]])


def three_site(params: TrimerParams) -> ParametricMatrix:
    """[[nu + i*gamma, k, 0], [k, 0, k], [0, k, nu*tan_phi - i*gamma]], or its gauged form."""
    if params.kappa_squared is None:
        above = below = UniPoly.constant(params.kappa)
    else:
        above, below = UniPoly.constant(1), UniPoly.constant(params.kappa_squared)
    zero = UniPoly()
    return _rows([
        [NU + IMAG_UNIT * params.gamma, above, zero],
        [below, zero, above],
        [zero, below, NU * params.tan_phi - IMAG_UNIT * params.gamma],
    ])


def ssh_chain(params: SSHParams) -> ParametricMatrix:
    """
    N-site SSH chain with zero diagonal and corner entry (1, N) = sigma*nu.

    Intra-cell bonds carry t1 - gamma above and t1 + gamma below the
    diagonal; inter-cell bonds carry t2_back above and t2 below.
    """
    n = params.n_sites
    entries = _zeros(n)
    for k in range(n - 1):
        if k % 2 == 0:
            above, below = params.t1 - params.gamma, params.t1 + params.gamma
        else:
            above, below = params.t2_upper, params.t2
        entries[k][k + 1] = UniPoly.constant(above)
        entries[k + 1][k] = UniPoly.constant(below)
    entries[0][n - 1] = entries[0][n - 1] + NU * params.corner_scale
    return _rows(entries)


def hatano_nelson(params: HNParams) -> ParametricMatrix:
    """
    Hatano-Nelson chain: (delta * scale) above and ((2 + delta) * scale) below
    the diagonal, Delta at (1, N) and eta at (1, N-1).
    """
    n = params.n_sites
    delta = NU * (params.cos_theta * params.cos_phi)
    corner = NU * (params.cos_theta * params.sin_phi)
    eta = NU * params.sin_theta
    upper, lower = params.scales()
    entries = _zeros(n)
    for k in range(n - 1):
        entries[k][k + 1] = delta * upper[k]
        entries[k + 1][k] = (delta + 2) * lower[k]
    entries[0][n - 1] = entries[0][n - 1] + corner
    entries[0][n - 2] = entries[0][n - 2] + eta
    return _rows(entries)


def companion(coeffs: List[UniPoly]) -> ParametricMatrix:
    """Companion matrix whose characteristic polynomial is lambda^d + sum c_j lambda^j."""
    d = len(coeffs)
    if d < 1:
        raise InputError("a companion matrix needs at least one coefficient")
    entries = _zeros(d)
    for row in range(d):
        entries[row][d - 1] = -coeffs[row]
        if row + 1 < d:
            entries[row + 1][row] = UniPoly.constant(1)
    return _rows(entries)


def _companion_from_params(params: CompanionParams) -> ParametricMatrix:
    return companion(params.polynomials())


MODEL_REGISTRY: Dict[str, Tuple[Type[ModelParams], Callable[[Any], ParametricMatrix]]] = {
    "two_site": (TwoSiteParams, two_site),
    "three_site": (TrimerParams, three_site),
    "ssh_chain": (SSHParams, ssh_chain),
    "hatano_nelson": (HNParams, hatano_nelson),
    "companion": (CompanionParams, _companion_from_params),
}

MODEL_ALIASES = {"trimer": "three_site", "ssh": "ssh_chain", "hn": "hatano_nelson"}

# Named configurations: (model, parameters)
PRESETS: Dict[str, Tuple[str, Dict[str, Any]]] = {
    "two_site_ep2": ("two_site", {"kappa": 1, "gamma": 1}),
    "trimer_ep3": ("three_site", {"gamma": 1, "kappa_squared": "1/2", "tan_phi": -INV_SQRT3}),
    "trimer_ep2": ("three_site", {"gamma": 1, "kappa_squared": "1/2", "tan_phi": -1}),
    "ssh_collapsed": ("ssh_chain", {"n_sites": 5, "t1": 1, "gamma": 1, "t2": 1, "t2_back": 0}),
    "ssh_symmetric": ("ssh_chain", {"n_sites": 5, "t1": 2, "gamma": 1, "t2": 1}),
    "hn_ep4": ("hatano_nelson", {"cos_theta": 1, "sin_theta": 0, "cos_phi": COS_PI_4, "sin_phi": SIN_PI_4}),
    "hn_ep2": ("hatano_nelson", {"cos_theta": 1, "sin_theta": 0, "cos_phi": 1, "sin_phi": 0}),
    "hn_ep3": ("hatano_nelson", {"cos_theta": COS_PI_4, "sin_theta": SIN_PI_4, "cos_phi": 1, "sin_phi": 0}),
}


def canonical_model_name(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    key = MODEL_ALIASES.get(key, key)
    if key not in MODEL_REGISTRY and key not in PRESETS:
        valid = ", ".join(sorted(MODEL_REGISTRY) + sorted(PRESETS))
        raise InputError(f"unknown model {name!r}; valid models: {valid}")
    return key


def model_params(name: str, params: Optional[Dict[str, Any]] = None) -> ModelParams:
    """Validate a parameter block for a model or preset; presets supply defaults."""
    key = canonical_model_name(name)
    merged: Dict[str, Any] = {}
    if key in PRESETS:
        key, defaults = PRESETS[key]
        merged.update(defaults)
    merged.update(params or {})
    params_class, _ = MODEL_REGISTRY[key]
    return params_class(**merged)


def build_model(name: str, params: Optional[Dict[str, Any]] = None) -> ParametricMatrix:
    """
    Build the parametric matrix for a registered model or preset.

    Args:
        name: Model name (``two_site``, ``three-site``, ...) or preset name
        params: Parameter overrides

    Returns:
        ParametricMatrix H(nu)
    """
    validated = model_params(name, params)
    key = canonical_model_name(name)
    if key in PRESETS:
        key = PRESETS[key][0]
    _, builder = MODEL_REGISTRY[key]
    logger.info(f"Building model {key} with {validated.model_dump()}")
    return builder(validated)
