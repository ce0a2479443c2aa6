import numpy as np
import pytest

from exceptions import AlphaOutOfRangeError, ReconstructionMismatchError, UnknownPointError
from models.atomic import Atom, AtomicDecomposition
from models.enums import AtomKind
from models.measure import SignedMeasure

from conftest import random_space


def test_decompose_zero(atomic_manager, two_point):
    dec = atomic_manager.decompose(two_point, SignedMeasure.zero(two_point), 0.5)
    assert len(dec) == 0 and dec.sum_gamma == 0.0


def test_decompose_dirac(atomic_manager, two_point):
    dec = atomic_manager.decompose(two_point, SignedMeasure.dirac(two_point, 'b'), 0.5)
    assert dec.atoms == ((pytest.approx(1.0), Atom.dirac('b', 1)),)


@pytest.mark.parametrize('alpha', [0.2, 0.5, 0.9])
def test_decompose_dipole(atomic_manager, two_point, alpha):
    mu = SignedMeasure.dirac_difference(two_point, 'a', 'b')
    dec = atomic_manager.decompose(two_point, mu, alpha)
    assert len(dec) == 1
    gamma, atom = dec.atoms[0]
    assert atom.kind == AtomKind.DIPOLE and (atom.x, atom.y) == ('a', 'b')
    assert gamma == pytest.approx(1.0)


def test_decompose_alpha_range(atomic_manager, two_point):
    mu = SignedMeasure.dirac(two_point, 'a')
    for alpha in (0.0, 1.0):
        with pytest.raises(AlphaOutOfRangeError):
            atomic_manager.decompose(two_point, mu, alpha)


def test_reconstruct_examples(atomic_manager, two_point):
    empty = atomic_manager.reconstruct(two_point, AtomicDecomposition(0.5))
    assert not empty.mass.any()
    dec = AtomicDecomposition(0.5, ((1.0, Atom.dipole('a', 'b')),))
    assert atomic_manager.reconstruct(two_point, dec).mass.tolist() == [1.0, -1.0]


def test_reconstruct_unknown_point(atomic_manager, two_point):
    dec = AtomicDecomposition(0.5, ((1.0, Atom.dirac('z', 1)),))
    with pytest.raises(UnknownPointError):
        atomic_manager.reconstruct(two_point, dec)


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.8])
def test_random_decompositions(atomic_manager, transport_manager, metric_manager, alpha):
    rng = np.random.default_rng(int(alpha * 100))
    for _ in range(34):
        space = random_space(metric_manager, rng, 10, scale=float(rng.uniform(0.5, 6.0)))
        mu = SignedMeasure(space, rng.normal(size=10))
        dec = atomic_manager.decompose(space, mu, alpha)

        rebuilt = atomic_manager.reconstruct(space, dec)
        assert np.abs(rebuilt.mass - mu.mass).max() <= 1e-9
        assert all(len(atom.support()) <= 3 for _, atom in dec.atoms)
        assert len(dec) <= space.n ** 2 + space.n
        assert all(gamma > 0 for gamma, _ in dec.atoms)

        report = atomic_manager.verify_bounds(space, mu, dec)
        assert report.upper_bound_holds and report.lower_bound_holds
        assert 0.0 < report.realized_c <= 1.0 + 1e-8
        if report.capped_dipoles == 0:
            assert dec.sum_gamma - report.norm <= 1e-8 * (1.0 + report.norm)
            for atom_norm in report.atom_norms:
                assert atom_norm.atom_norm == pytest.approx(1.0, abs=1e-9)


def test_atom_order_is_deterministic(atomic_manager, metric_manager):
    rng = np.random.default_rng(77)
    space = random_space(metric_manager, rng, 8, scale=3.0)
    mu = SignedMeasure(space, rng.normal(size=8))
    dec = atomic_manager.decompose(space, mu, 0.5)
    kinds = [atom.kind for _, atom in dec.atoms]
    assert kinds == sorted(kinds, key=lambda k: k != AtomKind.DIPOLE)
    dipoles = [(space.index(a.x), space.index(a.y)) for _, a in dec.atoms if a.kind == AtomKind.DIPOLE]
    diracs = [space.index(a.z) for _, a in dec.atoms if a.kind == AtomKind.DIRAC]
    assert dipoles == sorted(dipoles)
    assert diracs == sorted(diracs)
    assert dec.to_dict() == atomic_manager.decompose(space, mu, 0.5).to_dict()


def test_verify_dirac_and_dipole(atomic_manager, two_point):
    dirac = SignedMeasure.dirac(two_point, 'a')
    report = atomic_manager.verify_bounds(two_point, dirac, atomic_manager.decompose(two_point, dirac, 0.5))
    assert report.sum_gamma == pytest.approx(1.0)
    assert report.realized_c == pytest.approx(1.0)

    dipole = SignedMeasure.dirac_difference(two_point, 'a', 'b')
    report = atomic_manager.verify_bounds(two_point, dipole, atomic_manager.decompose(two_point, dipole, 0.5))
    assert report.realized_c == pytest.approx(1.0)
    assert report.atom_norms[0].dirac_difference_norm == pytest.approx(1.0)


def test_verify_long_dipole_reports_capped_constant(atomic_manager, metric_manager):
    space = metric_manager.validate_metric([[0, 9], [9, 0]], ['a', 'b'])
    mu = SignedMeasure.dirac_difference(space, 'a', 'b')
    dec = AtomicDecomposition(0.5, ((3.0, Atom.dipole('a', 'b')),))
    report = atomic_manager.verify_bounds(space, mu, dec)
    assert report.capped_dipoles == 1
    assert report.norm == pytest.approx(2.0)
    assert report.realized_c == pytest.approx(2.0 / 3.0)
    assert report.atom_norms[0].dirac_difference_norm == pytest.approx(2.0)
    assert report.upper_bound_holds and report.lower_bound_holds
    # the decomposer itself routes such a pair through Dirac atoms
    own = atomic_manager.decompose(space, mu, 0.5)
    assert {atom.kind for _, atom in own.atoms} == {AtomKind.DIRAC}
    assert own.sum_gamma == pytest.approx(2.0)


def test_verify_mismatch(atomic_manager, two_point):
    dec = AtomicDecomposition(0.5, ((1.0, Atom.dirac('a', 1)),))
    with pytest.raises(ReconstructionMismatchError):
        atomic_manager.verify_bounds(two_point, SignedMeasure.dirac(two_point, 'b'), dec)


def test_balanced_decomposition(atomic_manager, transport_manager, metric_manager):
    rng = np.random.default_rng(55)
    space = random_space(metric_manager, rng, 8, scale=5.0)
    mass = rng.normal(size=8)
    nu = SignedMeasure(space, mass - mass.mean())
    dec = atomic_manager.decompose(space, nu, 0.5, balanced=True)
    assert dec.balanced
    assert all(atom.kind == AtomKind.DIPOLE for _, atom in dec.atoms)
    snow = metric_manager.snowflake(space, 0.5)
    kr0 = transport_manager.kr0_norm(snow, SignedMeasure(snow, nu.mass)).primal_value
    assert dec.sum_gamma == pytest.approx(kr0, rel=1e-9)
    report = atomic_manager.verify_bounds(space, nu, dec)
    assert report.realized_c == pytest.approx(1.0, abs=1e-8)
