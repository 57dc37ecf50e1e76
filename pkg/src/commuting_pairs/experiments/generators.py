"""
Seeded instance generators.

Every family draws a random unitary U and builds Omega = U Omega_0 U^H and
X = U (X_0 + s H) U^H with Omega_0, X_0 commuting and H random Hermitian.
The factor s is chosen so that ||[Omega, X]|| equals the recipe's target
exactly up to rounding. Randomness comes from numpy's PCG64 generator seeded
with the recipe seed, so the same recipe always gives the same matrices.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..constructions.events import EventPartition
from ..core.linalg import HermitianOperator, commutator, operator_norm
from ..core.models import InstanceRecipe
from ..core.spectral import DensityMatrix
from ..exceptions import ConfigurationError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

GEOMETRIC_RATIO = 0.7
OBSERVABLE_RANGE = 0.9
TAIL_FRACTION = 0.1
SPECTRUM_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    """A generated pair, its measured commutator and (for event recipes) its event."""

    recipe: InstanceRecipe
    omega: DensityMatrix
    x: HermitianOperator
    eps_measured: float
    event: Optional[EventPartition] = None

    @property
    def pair(self) -> Tuple[DensityMatrix, HermitianOperator]:
        """The (Omega, X) pair."""
        return self.omega, self.x


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian matrix."""
    real, imag = rng.standard_normal((dim, dim)), rng.standard_normal((dim, dim))
    gaussian = (real + 1j * imag) / np.sqrt(2)
    q, r = np.linalg.qr(gaussian)
    diagonal = np.diag(r)
    phases = diagonal / np.where(np.abs(diagonal) > 0, np.abs(diagonal), 1.0)
    return q * phases[None, :]


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Hermitian matrix with complex Gaussian entries."""
    gaussian = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (gaussian + gaussian.conj().T) / 2


def geometric_spectrum(dim: int, ratio: float = GEOMETRIC_RATIO) -> np.ndarray:
    """Normalized eigenvalues proportional to ratio ** j."""
    values = ratio ** np.arange(dim, dtype=float)
    return values / values.sum()


def _tail(count: int, threshold: float) -> np.ndarray:
    """Light eigenvalues well below the heavy threshold."""
    return TAIL_FRACTION * threshold * 0.5 ** np.arange(count, dtype=float)


def _validated_spectrum(recipe: InstanceRecipe) -> Optional[np.ndarray]:
    if recipe.spectrum_spec is None:
        return None
    spectrum = np.asarray(recipe.spectrum_spec, dtype=float)
    if spectrum.size != recipe.dim:
        raise ConfigurationError(
            f"spectrum_spec has {spectrum.size} entries for dimension {recipe.dim}",
            setting="spectrum_spec",
            value=recipe.spectrum_spec,
        )
    total = float(spectrum.sum())
    if abs(total - 1.0) > SPECTRUM_TOLERANCE:
        raise ConfigurationError(
            "spectrum_spec must sum to 1", setting="spectrum_spec", value=total
        )
    return np.sort(spectrum)[::-1]


def clustered_spectrum(dim: int, eps: float, clusters: int = 2) -> np.ndarray:
    """
    Heavy eigenvalues in tight clusters, plus a light tail.

    Cluster members are spaced by a quarter of eps^(3/4) divided by the cluster
    size, clusters are separated by more than eps^(3/4), and every cluster sits
    above eps^(1/4), so the gap binning yields exactly one bin per cluster.
    """
    if eps <= 0:
        eps = 1e-12
    threshold, gap = eps**0.25, eps**0.75
    lowest = 1.2 * threshold
    best = 0
    for size in range(1, max(1, min(3, dim // clusters)) + 1):
        tail_mass = float(_tail(dim - clusters * size, threshold).sum())
        needed = size * sum(lowest + 2 * gap * j for j in range(clusters))
        if needed <= (1 - tail_mass) * (1 - 1e-9):
            best = size
    if best == 0:
        raise ConfigurationError(
            "cannot place heavy clusters above eps^(1/4) at this eps",
            setting="eps_target",
            value=eps,
        )

    size = best
    tail = _tail(dim - clusters * size, threshold)
    centers = [lowest + 2 * gap * j for j in range(clusters)]
    # the top cluster absorbs the remaining mass
    centers[-1] = (1 - tail.sum() - size * sum(centers[:-1])) / size
    spread = 0.25 * gap / size
    offsets = (np.arange(size) - (size - 1) / 2) * spread
    heavy = np.concatenate([center + offsets for center in centers])
    return np.sort(np.concatenate([heavy, tail]))[::-1]


def adversarial_spectrum(dim: int, eps: float) -> np.ndarray:
    """
    Eigenvalue ladder whose gaps alternate between 1.1 and 0.9 times eps^(3/4).

    The ladder starts just above eps^(1/4); eigenvalues that do not fit form a
    light geometric tail.
    """
    if eps <= 0:
        eps = 1e-12
    threshold, gap = eps**0.25, eps**0.75
    steps = np.array([1.1 if j % 2 == 0 else 0.9 for j in range(dim - 1)]) * gap
    length = 0
    for candidate in range(1, dim + 1):
        offsets = np.concatenate([[0.0], np.cumsum(steps[: candidate - 1])])
        tail_mass = _tail(dim - candidate, threshold).sum()
        mass = candidate * 1.05 * threshold + offsets.sum() + tail_mass
        if mass <= 1:
            length = candidate
    if length == 0:
        raise ConfigurationError(
            "no eigenvalue ladder fits above eps^(1/4) at this eps",
            setting="eps_target",
            value=eps,
        )
    offsets = np.concatenate([[0.0], np.cumsum(steps[: length - 1])])
    tail = _tail(dim - length, threshold)
    start = (1 - tail.sum() - offsets.sum()) / length
    return np.sort(np.concatenate([start + offsets, tail]))[::-1]


def _random_cells(rng: np.random.Generator, dim: int) -> List[List[int]]:
    count = int(rng.integers(2, dim + 1))
    order = rng.permutation(dim)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=count - 1, replace=False))
    return [sorted(int(i) for i in cell) for cell in np.split(order, cuts)]


def _scaled_perturbation(omega0: np.ndarray, h: np.ndarray, eps: float) -> np.ndarray:
    if eps == 0:
        return np.zeros_like(h)
    norm = operator_norm(commutator(omega0, h))
    if norm == 0:
        raise ConfigurationError(
            "state spectrum is fully degenerate; no perturbation reaches eps_target",
            setting="eps_target",
            value=eps,
        )
    return (eps / norm) * h


def build_instance(recipe: InstanceRecipe) -> GeneratedInstance:
    """
    Generate the instance described by a recipe.

    Args:
        recipe: Dimension, family, target commutator norm and seed

    Returns:
        The generated instance with its measured commutator norm
    """
    rng = make_rng(recipe.seed)
    dim, eps = recipe.dim, recipe.eps_target
    unitary = random_unitary(rng, dim)
    spectrum = _validated_spectrum(recipe)
    event: Optional[EventPartition] = None

    if recipe.kind == "random_event":
        cells = _random_cells(rng, dim)
        if spectrum is None:
            weights = geometric_spectrum(len(cells))
            spectrum = np.zeros(dim)
            for weight, cell in zip(weights, cells):
                spectrum[cell] = weight / len(cell)
        x0 = np.zeros((dim, dim), dtype=np.complex128)
        for cell in cells:
            if np.ptp(spectrum[cell]) == 0:
                block = random_hermitian(rng, len(cell))
                block *= rng.uniform(0.1, OBSERVABLE_RANGE) / max(operator_norm(block), 1e-300)
            else:
                block = np.diag(rng.uniform(-OBSERVABLE_RANGE, OBSERVABLE_RANGE, len(cell)))
            x0[np.ix_(cell, cell)] = block
        event = EventPartition.from_basis(unitary, cells)
    else:
        if spectrum is None:
            if recipe.kind == "clustered_spectrum":
                spectrum = clustered_spectrum(dim, eps)
            elif recipe.kind == "adversarial_gap":
                spectrum = adversarial_spectrum(dim, eps)
            else:
                spectrum = geometric_spectrum(dim)
        x0 = np.diag(rng.uniform(-OBSERVABLE_RANGE, OBSERVABLE_RANGE, dim)).astype(np.complex128)

    omega0 = np.diag(spectrum).astype(np.complex128)
    perturbation = _scaled_perturbation(omega0, random_hermitian(rng, dim), eps)
    omega = DensityMatrix(unitary @ omega0 @ unitary.conj().T)
    x = HermitianOperator(unitary @ (x0 + perturbation) @ unitary.conj().T)
    eps_measured = operator_norm(commutator(omega, x))
    logger.debug(
        "generated %s dim=%d seed=%d: target %.3e, measured %.3e",
        recipe.kind,
        dim,
        recipe.seed,
        eps,
        eps_measured,
    )
    return GeneratedInstance(
        recipe=recipe, omega=omega, x=x, eps_measured=eps_measured, event=event
    )


def gen_instance(recipe: InstanceRecipe) -> Tuple[DensityMatrix, HermitianOperator]:
    """Generate the (Omega, X) pair of a recipe."""
    return build_instance(recipe).pair


def recipes_for(
    dims: Sequence[int], eps_grid: Sequence[float], kinds: Sequence[str], seed: int
) -> List[InstanceRecipe]:
    """All recipes of a dims x eps x kinds grid with a shared seed, in grid order."""
    return [
        InstanceRecipe(
            dim=dim, kind=kind, eps_target=float(eps), seed=seed  # type: ignore[arg-type]
        )
        for dim in dims
        for eps in eps_grid
        for kind in kinds
    ]
