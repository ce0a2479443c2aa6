from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from models.field import ScalarField


@dataclass(frozen=True)
class DualCertificate:
    """A user potential checked against the KR dual constraints"""
    feasible: bool
    value: float
    max_violation: float

    def to_dict(self) -> Dict[str, Any]:
        return {'feasible': self.feasible, 'lower_bound': self.value,
                'max_violation': self.max_violation}


@dataclass(frozen=True, eq=False)
class AssumptionHReport:
    """Outcome of the extension test ||g||_alpha <= C ||f||_alpha"""
    extension: ScalarField
    lipschitz_constant: float
    f_norm: float
    g_norm: float
    ratio: float
    constant: float
    holds: bool
    sup_error: float
    net_radius: Optional[float] = None
    net_error_bound: Optional[float] = None

    @property
    def net_bound_holds(self) -> Optional[bool]:
        if self.net_error_bound is None:
            return None
        return self.sup_error <= self.net_error_bound * (1.0 + 1e-12) + 1e-15

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lipschitz_constant': self.lipschitz_constant,
            'f_norm': self.f_norm,
            'g_norm': self.g_norm,
            'ratio': self.ratio,
            'C': self.constant,
            'holds': self.holds,
            'sup_error': self.sup_error,
            'net_radius': self.net_radius,
            'net_error_bound': self.net_error_bound,
            'net_bound_holds': self.net_bound_holds,
            'extension': self.extension.to_dict()['value']
        }


@dataclass(frozen=True)
class OperatorBoundsReport:
    """Worst slack of |df|/rho <= ||L f|| <= |df|/rho + (rho/D)|f|_inf"""
    lower_slack: float
    upper_slack: float
    triples: int

    @property
    def holds(self) -> bool:
        return self.lower_slack >= 0.0 and self.upper_slack >= -1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), 'holds': self.holds}


@dataclass(frozen=True)
class AtomNorm:
    """KR norms attached to one atom of a decomposition"""
    index: int
    atom_norm: float
    dirac_difference_norm: Optional[float] = None


@dataclass(frozen=True)
class BoundsReport:
    """Two-sided bound C * sum(gamma) <= ||mu|| <= sum(gamma)"""
    sum_gamma: float
    norm: float
    realized_c: float
    reconstruction_error: float
    upper_bound_holds: bool
    lower_bound_holds: bool
    atom_norms: Tuple[AtomNorm, ...] = field(default_factory=tuple)
    capped_dipoles: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'sum_gamma': self.sum_gamma,
            'norm': self.norm,
            'realized_C': self.realized_c,
            'reconstruction_error': self.reconstruction_error,
            'upper_bound_holds': self.upper_bound_holds,
            'lower_bound_holds': self.lower_bound_holds,
            'capped_dipoles': self.capped_dipoles,
            'atom_norms': [asdict(a) for a in self.atom_norms]
        }


@dataclass(frozen=True)
class ClarksonReport:
    """Both sides of the Clarkson inequality in the primed Besov norm"""
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class MorreyReport:
    """Smallest constant of |f(x)-f(y)| <= C d^(s-Q/p) ||g||_p"""
    minimal_constant: float
    constant: float
    holds: bool
    exponent: float
    gradient_norm: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'C_star': self.minimal_constant,
            'C': self.constant,
            'holds': self.holds,
            'exponent': self.exponent,
            'gradient_norm': self.gradient_norm
        }


@dataclass(frozen=True)
class RatioReport:
    """Per-field ratios of an embedding inequality"""
    ratios: Tuple[float, ...]
    ceiling: Optional[float] = None
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def holds(self) -> Optional[bool]:
        if self.ceiling is None:
            return None
        return self.max_ratio <= 1.1 * self.ceiling

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ratios': list(self.ratios),
            'max_ratio': self.max_ratio,
            'ceiling': self.ceiling,
            'holds': self.holds,
            **self.extras
        }

