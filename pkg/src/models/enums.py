from enum import Enum


class ConstraintSense(Enum):
    """Row sense of an LP constraint"""
    LE = "<="
    GE = ">="
    EQ = "="


class SpaceKind(Enum):
    """Example spaces produced by the generator"""
    GRID1D = "grid1d"
    GRID2D = "grid2d"
    CANTOR = "cantor"
    RANDOM_EUCLIDEAN = "random-euclidean"


class AtomKind(Enum):
    """Atoms of a measure decomposition"""
    DIPOLE = "dipole"
    DIRAC = "dirac"


class Command(Enum):
    """Top-level CLI commands"""
    VALIDATE = "validate"
    GEN = "gen"
    KR = "kr"
    LIP = "lip"
    DECOMPOSE = "decompose"
    BESOV = "besov"
    HAJLASZ = "hajlasz"
    DOUBLING = "doubling"
    EMBED = "embed"


class EmbeddingKind(Enum):
    """Embedding checks of the besov-hajlasz layer"""
    LIP_BESOV = "lip-besov"
    BESOV_HAJLASZ = "besov-hajlasz"
    MORREY = "morrey"
    LINFTY = "linfty"


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"
