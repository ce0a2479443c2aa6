import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from exceptions import (
    BadKindError, DomainError, KRLipException, ParameterOutOfRangeError, StorageError,
    UnexpectedError, UnknownPointError
)
from managers.atomic_manager import AtomicManager
from managers.besov_manager import BesovManager
from managers.lipschitz_manager import LipschitzManager
from managers.metric_manager import MetricManager
from managers.transport_manager import TransportManager
from models.besov import BesovParams
from models.enums import Command, EmbeddingKind, OutputFormat
from models.field import ScalarField
from models.metric_space import MetricMeasureSpace
from models.run_config import Report, RunConfig
from models.transport import KRResult
from repositories.json_repository import (
    DecompositionRepository, FieldRepository, MeasureRepository, ReportRepository,
    SpaceRepository, dumps, to_csv
)
from services.field_generator import FieldGenerator
from services.space_generator import SpaceGenerator, trial_rngs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_STORAGE = 2


class CommandController:
    """Dispatches a RunConfig to the managers and maps failures to exit codes"""

    def __init__(self, metric_manager: Optional[MetricManager] = None,
                 transport_manager: Optional[TransportManager] = None,
                 lipschitz_manager: Optional[LipschitzManager] = None,
                 atomic_manager: Optional[AtomicManager] = None,
                 besov_manager: Optional[BesovManager] = None):
        """
        Initialize controller

        Args:
            metric_manager: Spaces, nets and doubling estimates
            transport_manager: KR norms
            lipschitz_manager: Hölder norms and operators
            atomic_manager: Decompositions
            besov_manager: Besov/Hajłasz seminorms and embeddings
        """
        self.metric_manager = metric_manager or MetricManager()
        self.transport_manager = transport_manager or TransportManager()
        self.lipschitz_manager = lipschitz_manager or LipschitzManager()
        self.atomic_manager = atomic_manager or AtomicManager(
            self.transport_manager, self.metric_manager
        )
        self.besov_manager = besov_manager or BesovManager(
            lipschitz_manager=self.lipschitz_manager
        )
        self.spaces = SpaceRepository(self.metric_manager)
        self.measures = MeasureRepository(self.spaces)
        self.fields = FieldRepository(self.spaces)
        self.decompositions = DecompositionRepository()
        self.reports = ReportRepository()
        self.space_generator = SpaceGenerator(self.metric_manager)
        self.field_generator = FieldGenerator()

        self._handlers: Dict[Command, Callable[[RunConfig], Dict[str, Any]]] = {
            Command.VALIDATE: self._validate,
            Command.GEN: self._gen,
            Command.KR: self._kr,
            Command.LIP: self._lip,
            Command.DECOMPOSE: self._decompose,
            Command.BESOV: self._besov,
            Command.HAJLASZ: self._hajlasz,
            Command.DOUBLING: self._doubling,
            Command.EMBED: self._embed,
        }

    def run(self, config: RunConfig) -> Tuple[int, Dict[str, Any]]:
        """
        Execute one command

        Args:
            config: Parsed invocation

        Returns:
            Tuple of (exit code, report or error object). The report is also
            written to config.out when set.
        """
        started = time.perf_counter()
        try:
            results = self._handlers[config.command](config)
            report = Report(
                config=config,
                results=results,
                wall_time_ms=(time.perf_counter() - started) * 1000.0
            )
            payload = report.to_dict()
            text = self.render(config, payload)
            if config.out:
                self.reports.save_text(text, config.out)
            return EXIT_OK, payload
        except StorageError as e:
            logger.error("%s failed: %s", config.command.value, e)
            return EXIT_STORAGE, {'error': e.to_dict()}
        except DomainError as e:
            logger.warning("%s rejected: %s", config.command.value, e)
            return EXIT_DOMAIN, {'error': e.to_dict()}
        except KRLipException as e:
            logger.warning("%s failed: %s", config.command.value, e)
            return EXIT_DOMAIN, {'error': e.to_dict()}
        except Exception as e:
            logger.exception("%s crashed", config.command.value)
            error = UnexpectedError(f"{type(e).__name__}: {e}", {'type': type(e).__name__})
            return EXIT_DOMAIN, {'error': error.to_dict()}

    def render(self, config: RunConfig, payload: Dict[str, Any]) -> str:
        """JSON text, or the CSV projection of a tabular result"""
        if config.format != OutputFormat.CSV or 'error' in payload:
            return dumps(payload)
        header, rows = self.table(config, payload['results'])
        return to_csv(header, rows)

    @staticmethod
    def table(config: RunConfig, results: Dict[str, Any]) -> Tuple[List[str], List[List[Any]]]:
        """
        Flat rows of tabular results

        Raises:
            BadKindError: If the command has no tabular projection
        """
        if 'deltas' in results:
            return ['delta', 'omega'], [list(r) for r in zip(results['deltas'], results['omega'])]
        if 'ratios' in results:
            return ['trial', 'ratio'], [[k, r] for k, r in enumerate(results['ratios'])]
        if 'items' in results:
            rows = []
            for k, item in enumerate(results['items']):
                if 'error' in item:
                    rows.append([k, '', '', '', item['error']['code']])
                else:
                    rows.append([k, item['primal'], item['dual'], item['gap'], ''])
            return ['index', 'primal', 'dual', 'gap', 'error'], rows
        raise BadKindError(
            f"No CSV projection for '{config.command.value}'", {'format': 'csv'}
        )

    # -- handlers --------------------------------------------------------------

    def _validate(self, config: RunConfig) -> Dict[str, Any]:
        mm = self.spaces.load(self._require(config, 'space'))
        return {'valid': True, 'n': mm.space.n, 'diam': mm.space.diam}

    def _gen(self, config: RunConfig) -> Dict[str, Any]:
        mm = self.space_generator.generate(
            config.kind or 'grid1d', self._require(config, 'n'), config.seed, config.alpha
        )
        return {'space': mm.to_dict(), 'n': mm.space.n, 'diam': mm.space.diam}

    def _kr(self, config: RunConfig) -> Dict[str, Any]:
        action = config.action or 'norm'
        space = self.spaces.load_space(self._require(config, 'space'))
        if config.alpha is not None:
            space = self.metric_manager.snowflake(space, config.alpha)
        transport = self.transport_manager

        if action == 'batch':
            measures = self.measures.load_many(self._require(config, 'measure'), space)
            outcomes = transport.kr_batch(space, measures, jobs=config.jobs)
            items = [o.to_dict() if isinstance(o, KRResult) else {'error': o.to_dict()}
                     for o in outcomes]
            return {'items': items, 'count': len(items)}

        mu = self.measures.load(self._require(config, 'measure'), space)
        if action == 'certify':
            potential = self.fields.load(self._require(config, 'field'), space)
            return transport.dual_certificate(space, mu, potential).to_dict()
        if action != 'norm':
            raise BadKindError(f"Unknown kr action: {action}", {'action': action})

        if config.balanced_only:
            result = transport.kr0_norm(space, mu)
            results = result.to_dict()
            results['restricted_plan'] = transport.restricted_plan_norm(space, mu)
            return results
        result = transport.kr_norm(space, mu)
        results = result.to_dict()
        results['certificate'] = transport.dual_certificate(space, mu, result.potential).to_dict()
        return results

    def _lip(self, config: RunConfig) -> Dict[str, Any]:
        action = config.action or 'seminorm'
        space = self.spaces.load_space(self._require(config, 'space'))
        f = self.fields.load(self._require(config, 'field'), space)
        alpha = 1.0 if config.alpha is None else config.alpha
        lip = self.lipschitz_manager

        if action == 'seminorm':
            return {'alpha': alpha, 'seminorm': lip.holder_seminorm(space, f, alpha)}
        if action == 'norm':
            return {'alpha': alpha, 'norm': lip.holder_norm(space, f, alpha)}
        if action == 'modulus':
            deltas = self._schedule(config, space)
            omega = [lip.lip_modulus(space, f, alpha, d) for d in deltas]
            return {'alpha': alpha, 'deltas': list(deltas), 'omega': omega}
        if action == 'dist':
            profile = lip.dist_to_little_lip(space, f, alpha, self._schedule(config, space))
            return {'alpha': alpha, **profile.to_dict()}
        if action == 'operator':
            return {
                'operator_sup': lip.operator_sup(space, f),
                'norm': lip.holder_norm(space, f, 1.0),
                'bounds': lip.operator_bounds_check(space, f).to_dict()
            }
        if action == 'extend':
            constant = 2.0 if config.constant is None else config.constant
            if config.subset:
                subset = [self._point(space, p) for p in config.subset]
                net_radius = None
            else:
                depth = 1 if config.depth is None else config.depth
                nets = self.metric_manager.build_net_hierarchy(space, depth, space.diam)
                subset = list(nets.levels[depth])
                net_radius = nets.radii[depth]
            report = lip.assumption_h_report(space, f, alpha, subset, constant, net_radius)
            return report.to_dict()
        raise BadKindError(f"Unknown lip action: {action}", {'action': action})

    def _decompose(self, config: RunConfig) -> Dict[str, Any]:
        space = self.spaces.load_space(self._require(config, 'space'))
        mu = self.measures.load(self._require(config, 'measure'), space)
        if config.action == 'verify':
            dec = self.decompositions.load(self._require(config, 'decomposition'))
            return self.atomic_manager.verify_bounds(space, mu, dec, config.alpha).to_dict()
        if config.action not in (None, 'run'):
            raise BadKindError(f"Unknown decompose action: {config.action}",
                               {'action': config.action})
        alpha = self._require(config, 'alpha')
        dec = self.atomic_manager.decompose(space, mu, alpha, balanced=config.balanced_only)
        return {'decomposition': dec.to_dict(), 'sum_gamma': dec.sum_gamma, 'atoms': len(dec)}

    def _besov(self, config: RunConfig) -> Dict[str, Any]:
        action = config.action or 'seminorm'
        mm = self.spaces.load(self._require(config, 'space'))
        f = self.fields.load(self._require(config, 'field'), mm.space)
        params = self._params(config)
        if action == 'seminorm':
            return {**params.to_dict(), 'seminorm': self.besov_manager.besov_seminorm(mm, f, params)}
        if action == 'norm':
            return {**params.to_dict(), 'norm': self.besov_manager.besov_norm(mm, f, params)}
        if action == 'clarkson':
            g = self.fields.load(self._require(config, 'field2'), mm.space)
            return {**params.to_dict(),
                    **self.besov_manager.clarkson_check(mm, f, g, params).to_dict()}
        raise BadKindError(f"Unknown besov action: {action}", {'action': action})

    def _hajlasz(self, config: RunConfig) -> Dict[str, Any]:
        mm = self.spaces.load(self._require(config, 'space'))
        f = self.fields.load(self._require(config, 'field'), mm.space)
        s = self._require(config, 's')
        p = 1.0 if config.p is None else config.p
        if p == 1.0:
            return self.besov_manager.hajlasz_seminorm_p1(mm, f, s).to_dict()
        return self.besov_manager.hajlasz_upper_bound(mm, f, s, p).to_dict()

    def _doubling(self, config: RunConfig) -> Dict[str, Any]:
        mm = self.spaces.load(self._require(config, 'space'))
        metric = self.metric_manager
        c, q = metric.fit_lower_mass_bound(mm)
        results: Dict[str, Any] = {
            'doubling_constant': metric.estimate_doubling_constant(mm.space),
            'measure_doubling': metric.estimate_measure_doubling(mm),
            'lower_mass_bound': {'C': c, 'Q': q}
        }
        if config.depth is not None:
            nets = metric.build_net_hierarchy(mm.space, config.depth, mm.space.diam)
            results['nets'] = {
                **nets.to_dict(),
                'covering_radii': [nets.covering_radius(k) for k in range(nets.depth + 1)]
            }
        return results

    def _embed(self, config: RunConfig) -> Dict[str, Any]:
        if config.action not in (None, 'check'):
            raise BadKindError(f"Unknown embed action: {config.action}",
                               {'action': config.action})
        try:
            kind = EmbeddingKind(self._require(config, 'kind'))
        except ValueError:
            raise BadKindError(
                f"Unknown embedding kind: {config.kind}",
                {'kind': config.kind, 'allowed': [k.value for k in EmbeddingKind]}
            ) from None
        mm = self.spaces.load(self._require(config, 'space'))
        fields = self._fields(config, mm, kind)
        besov = self.besov_manager
        s = self._require(config, 's')
        p = self._require(config, 'p')

        if kind is EmbeddingKind.LIP_BESOV:
            alpha = 1.0 if config.alpha is None else config.alpha
            return besov.embedding_ratio_lip_besov(mm, fields, alpha, BesovParams(s, p)).to_dict()
        if kind is EmbeddingKind.BESOV_HAJLASZ:
            return besov.besov_to_hajlasz_check(mm, fields, s, p).to_dict()

        c, q = self.metric_manager.fit_lower_mass_bound(mm)
        if kind is EmbeddingKind.LINFTY:
            return {'C': c, 'Q': q, **besov.linfty_embedding_check(mm, fields, s, p, q).to_dict()}

        constant = c if config.constant is None else config.constant
        reports = []
        for f in fields:
            gradient = besov.hajlasz_upper_bound(mm, f, s, p)
            reports.append(besov.morrey_check(mm, f, gradient, s, p, constant, q))
        minimal = [r.minimal_constant for r in reports]
        return {
            'C': c, 'Q': q,
            'reports': [r.to_dict() for r in reports],
            'ratios': minimal,
            'max_ratio': max(minimal) if minimal else 0.0,
            'holds': all(r.holds for r in reports)
        }

    # -- helpers ---------------------------------------------------------------

    @staticmethod
    def _require(config: RunConfig, name: str):
        value = getattr(config, name)
        if value is None:
            raise ParameterOutOfRangeError(
                f"'{config.command.value}' needs --{name.replace('_', '-')}", {'missing': name}
            )
        return value

    @staticmethod
    def _params(config: RunConfig) -> BesovParams:
        return BesovParams(
            s=CommandController._require(config, 's'),
            p=CommandController._require(config, 'p')
        )

    @staticmethod
    def _schedule(config: RunConfig, space) -> Sequence[float]:
        """Given schedule, or diam * 2^-k for k = 0..10"""
        if config.delta_schedule:
            return config.delta_schedule
        return tuple(space.diam * 2.0 ** -k for k in range(11))

    @staticmethod
    def _point(space, point: str) -> int:
        try:
            return space.index(point)
        except KeyError:
            raise UnknownPointError(f"Unknown point {point!r}", {'point': point}) from None

    def _fields(self, config: RunConfig, mm: MetricMeasureSpace,
                kind: EmbeddingKind) -> List[ScalarField]:
        """Fields from --field, or seeded trial fields"""
        if config.field:
            return self.fields.load_many(config.field, mm.space)
        generator = self.field_generator
        n = mm.space.n
        dyadic = n >= 2 and (n - 1) & (n - 2) == 0
        alpha = 1.0 if config.alpha is None else config.alpha
        fields = []
        for rng in trial_rngs(config.seed, config.trials):
            if kind is EmbeddingKind.LIP_BESOV and dyadic:
                fields.append(generator.midpoint_displacement(mm.space, alpha, rng))
            else:
                fields.append(generator.random_lipschitz(mm.space, rng))
        return fields
