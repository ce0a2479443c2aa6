from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from models.enums import AtomKind


@dataclass(frozen=True)
class Atom:
    """Unit building block of a decomposition.

    dipole(x, y) stands for (delta_x - delta_y) / rho(x, y)^alpha,
    dirac(z, sign) for sign * delta_z.
    """
    kind: AtomKind
    x: str = ""
    y: str = ""
    z: str = ""
    sign: int = 1

    @classmethod
    def dipole(cls, x: str, y: str) -> 'Atom':
        return cls(AtomKind.DIPOLE, x=x, y=y)

    @classmethod
    def dirac(cls, z: str, sign: int) -> 'Atom':
        return cls(AtomKind.DIRAC, z=z, sign=1 if sign >= 0 else -1)

    def support(self) -> Tuple[str, ...]:
        if self.kind == AtomKind.DIPOLE:
            return (self.x, self.y)
        return (self.z,)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == AtomKind.DIPOLE:
            return {'kind': self.kind.value, 'x': self.x, 'y': self.y}
        return {'kind': self.kind.value, 'z': self.z, 'sign': self.sign}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Atom':
        kind = AtomKind(data['kind'])
        if kind == AtomKind.DIPOLE:
            return cls.dipole(str(data['x']), str(data['y']))
        return cls.dirac(str(data['z']), int(data.get('sign', 1)))


@dataclass(frozen=True)
class AtomicDecomposition:
    """mu = sum of gamma_n * atom_n with positive coefficients"""
    alpha: float
    atoms: Tuple[Tuple[float, Atom], ...] = field(default_factory=tuple)
    balanced: bool = False

    @property
    def sum_gamma(self) -> float:
        return float(sum(g for g, _ in self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'alpha': self.alpha,
            'balanced': self.balanced,
            'atoms': [{'gamma': g, **atom.to_dict()} for g, atom in self.atoms]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AtomicDecomposition':
        atoms: List[Tuple[float, Atom]] = [
            (float(item['gamma']), Atom.from_dict(item)) for item in data.get('atoms', [])
        ]
        return cls(
            alpha=float(data['alpha']),
            atoms=tuple(atoms),
            balanced=bool(data.get('balanced', False))
        )
