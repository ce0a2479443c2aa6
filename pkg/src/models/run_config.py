from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from config import TOOL_VERSION
from models.enums import Command, OutputFormat


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: command, sub-action, inputs and numeric parameters"""
    command: Command
    action: Optional[str] = None
    space: Optional[str] = None
    measure: Optional[str] = None
    field: Optional[str] = None
    field2: Optional[str] = None
    decomposition: Optional[str] = None
    out: Optional[str] = None
    alpha: Optional[float] = None
    s: Optional[float] = None
    p: Optional[float] = None
    delta_schedule: Tuple[float, ...] = ()
    seed: int = 0
    n: Optional[int] = None
    kind: Optional[str] = None
    trials: int = 10
    jobs: int = 1
    depth: Optional[int] = None
    constant: Optional[float] = None
    subset: Tuple[str, ...] = ()
    balanced_only: bool = False
    format: OutputFormat = OutputFormat.JSON

    def to_dict(self) -> Dict[str, Any]:
        """Echo of the configuration; unset options are omitted"""
        data: Dict[str, Any] = {'command': self.command.value, 'format': self.format.value}
        for name in ('action', 'space', 'measure', 'field', 'field2', 'decomposition', 'out',
                     'alpha', 's', 'p', 'n', 'kind', 'depth', 'constant'):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if self.delta_schedule:
            data['delta_schedule'] = list(self.delta_schedule)
        if self.subset:
            data['subset'] = list(self.subset)
        data.update(seed=self.seed, trials=self.trials, jobs=self.jobs,
                    balanced_only=self.balanced_only)
        return data


@dataclass
class Report:
    """Result document of a run"""
    config: RunConfig
    results: Dict[str, Any] = field(default_factory=dict)
    wall_time_ms: float = 0.0
    version: str = TOOL_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': self.version,
            'config': self.config.to_dict(),
            'results': self.results,
            'wall_time_ms': self.wall_time_ms
        }
