from dataclasses import dataclass
from typing import Any, Dict

from models.field import ScalarField


@dataclass(frozen=True)
class BesovParams:
    """Parameters of the B^s_{p,p} seminorm"""
    s: float
    p: float

    def to_dict(self) -> Dict[str, Any]:
        return {'s': self.s, 'p': self.p}


@dataclass(frozen=True, eq=False)
class HajlaszResult:
    """Feasible Hajłasz s-gradient and its L^p norm.

    certified is True when the value is the LP optimum (p = 1) and False when
    it is only an upper bound on the seminorm.
    """
    gradient: ScalarField
    seminorm: float
    p: float
    s: float
    certified: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seminorm': self.seminorm,
            'p': self.p,
            's': self.s,
            'certified': self.certified,
            'gradient': self.gradient.to_dict()['value']
        }
