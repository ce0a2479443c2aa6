import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import RECONSTRUCTION_TOL
from exceptions import ReconstructionMismatchError, UnknownPointError
from managers.metric_manager import MetricManager
from managers.transport_manager import TransportManager
from models.atomic import Atom, AtomicDecomposition
from models.enums import AtomKind
from models.measure import SignedMeasure
from models.metric_space import FiniteMetricSpace
from models.reports import AtomNorm, BoundsReport
from services.validation_service import ValidationService

logger = logging.getLogger(__name__)

# Largest KR norm of a Dirac difference; longer dipoles lose unit norm.
DIPOLE_CAP = 2.0


class AtomicManager:
    """Manager for dipole/Dirac decompositions of measures"""

    def __init__(self, transport_manager: Optional[TransportManager] = None,
                 metric_manager: Optional[MetricManager] = None,
                 validation_service: Optional[ValidationService] = None):
        """
        Initialize manager

        Args:
            transport_manager: Solves the KR norm behind each decomposition
            metric_manager: Builds the snowflaked space
            validation_service: Parameter checks
        """
        self.transport_manager = transport_manager or TransportManager()
        self.metric_manager = metric_manager or MetricManager()
        self.validation_service = validation_service or ValidationService()

    def decompose(self, space: FiniteMetricSpace, mu: SignedMeasure, alpha: float,
                  balanced: bool = False) -> AtomicDecomposition:
        """
        Decompose mu into unit-norm dipoles and Diracs from an optimal plan

        Each plan arc x -> y with mass m becomes dipole(x, y) with
        gamma = m * rho(x,y)^alpha; each residual mass r(z) becomes
        dirac(z, sign r(z)) with gamma = |r(z)|. Arcs with rho^alpha above
        the dipole cap are rerouted through Dirac atoms at both ends.

        Args:
            space: Underlying space (rho)
            mu: Measure to decompose
            alpha: Exponent in (0,1)
            balanced: Decompose a balanced mu by kr0 (dipoles only)

        Returns:
            AtomicDecomposition with deterministic atom order

        Raises:
            AlphaOutOfRangeError: If alpha is outside (0,1)
            NotBalancedError: If balanced is requested for an unbalanced mu
        """
        self.validation_service.validate_alpha(alpha, upper_inclusive=False).raise_first()
        snow = self.metric_manager.snowflake(space, alpha)
        snow_mu = SignedMeasure(snow, mu.mass)
        if balanced:
            result = self.transport_manager.kr0_norm(snow, snow_mu)
        else:
            result = self.transport_manager.kr_norm(snow, snow_mu)

        points = space.points
        dipoles: List[Tuple[float, Atom]] = []
        dirac_mass: Dict[int, float] = {}
        for i, j, m in result.plan.arcs():
            length = snow.dist[i, j]
            if length > DIPOLE_CAP and not balanced:
                dirac_mass[i] = dirac_mass.get(i, 0.0) + m
                dirac_mass[j] = dirac_mass.get(j, 0.0) - m
                continue
            dipoles.append((m * length, Atom.dipole(points[i], points[j])))
        for z in result.residual.support():
            dirac_mass[int(z)] = dirac_mass.get(int(z), 0.0) + float(result.residual.mass[z])

        diracs = [
            (abs(m), Atom.dirac(points[z], 1 if m > 0 else -1))
            for z, m in sorted(dirac_mass.items()) if m != 0.0
        ]
        decomposition = AtomicDecomposition(
            alpha=alpha, atoms=tuple(dipoles + diracs), balanced=balanced
        )
        logger.info("Decomposed into %d dipoles and %d diracs, sum gamma %.12g",
                    len(dipoles), len(diracs), decomposition.sum_gamma)
        return decomposition

    def reconstruct(self, space: FiniteMetricSpace,
                    dec: AtomicDecomposition) -> SignedMeasure:
        """
        Pointwise sum of gamma * atom

        Raises:
            UnknownPointError: If an atom references a point outside the space
        """
        mass = np.zeros(space.n)
        for gamma, atom in dec.atoms:
            if atom.kind == AtomKind.DIPOLE:
                x, y = self._index(space, atom.x), self._index(space, atom.y)
                weight = gamma / space.dist[x, y] ** dec.alpha
                mass[x] += weight
                mass[y] -= weight
            else:
                mass[self._index(space, atom.z)] += atom.sign * gamma
        return SignedMeasure(space, mass)

    def verify_bounds(self, space: FiniteMetricSpace, mu: SignedMeasure,
                      dec: AtomicDecomposition, alpha: Optional[float] = None) -> BoundsReport:
        """
        Check C * sum(gamma) <= ||mu|| <= sum(gamma) on the snowflaked space

        Args:
            space: Underlying space (rho)
            mu: Target measure
            dec: Decomposition of mu
            alpha: Exponent; defaults to the decomposition's own

        Returns:
            BoundsReport with the realised C and per-atom KR norms

        Raises:
            ReconstructionMismatchError: If dec does not reconstruct mu
        """
        alpha = dec.alpha if alpha is None else alpha
        rebuilt = self.reconstruct(space, AtomicDecomposition(alpha, dec.atoms, dec.balanced))
        error = float(np.abs(rebuilt.mass - mu.mass).max()) if space.n else 0.0
        if error > RECONSTRUCTION_TOL * (1.0 + mu.tv()):
            raise ReconstructionMismatchError(
                f"Decomposition misses the measure by {error:.3g}", {'error': error}
            )

        snow = self.metric_manager.snowflake(space, alpha)
        transport = self.transport_manager
        # the balanced variant lives in M_0, normed by kr0
        norm_of = transport.kr0_norm if dec.balanced else transport.kr_norm
        norm = norm_of(snow, SignedMeasure(snow, mu.mass)).primal_value
        sum_gamma = dec.sum_gamma
        realized_c = norm / sum_gamma if sum_gamma > 0 else 1.0

        atom_norms = []
        capped = 0
        for k, (_, atom) in enumerate(dec.atoms):
            if atom.kind == AtomKind.DIPOLE:
                x, y = snow.index(atom.x), snow.index(atom.y)
                difference = SignedMeasure.dirac_difference(snow, atom.x, atom.y)
                pair_norm = norm_of(snow, difference).primal_value
                length = snow.dist[x, y]
                capped += int(length > DIPOLE_CAP)
                atom_norms.append(AtomNorm(k, pair_norm / length, pair_norm))
            else:
                single = SignedMeasure.dirac(snow, atom.z, float(atom.sign))
                atom_norms.append(AtomNorm(k, transport.kr_norm(snow, single).primal_value))

        slack = 1e-8 * (1.0 + norm)
        report = BoundsReport(
            sum_gamma=sum_gamma,
            norm=norm,
            realized_c=realized_c,
            reconstruction_error=error,
            upper_bound_holds=norm <= sum_gamma + slack,
            lower_bound_holds=realized_c * sum_gamma <= norm + slack,
            atom_norms=tuple(atom_norms),
            capped_dipoles=capped
        )
        logger.info("Bounds: sum gamma %.12g, norm %.12g, C %.6g", sum_gamma, norm, realized_c)
        return report

    @staticmethod
    def _index(space: FiniteMetricSpace, point: str) -> int:
        try:
            return space.index(point)
        except KeyError:
            raise UnknownPointError(f"Atom references unknown point {point!r}",
                                    {'point': point}) from None
