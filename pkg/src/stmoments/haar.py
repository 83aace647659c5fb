"""Haar-measure moments of compact subgroups of USp(2g).

A group is given by an identity component (a block-diagonal product of
U(1), SU(2) and USp(4) factors) and coset representatives, one per
connected component. Matrices act on C^{2g} with the symplectic form
J = diag(J1, ..., J1), J1 = [[0, 1], [-1, 0]], so every factor sits in its
own diagonal block.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .moments import ExactSum

TOL = 1e-10
MC_CHUNK = 1 << 16
DEFAULT_MC_BUDGET = 10**6
DEFAULT_QUAD_BUDGET = 10**4
QUAD_AGREEMENT = 1e-8
# Floor on the reported quadrature error; the integrands are O(1).
QUAD_ERR_FLOOR = 1e-12

# identity component -> (g, block factors)
COMPONENTS = {
    "U1": (1, ("U1",)),
    "SU2": (1, ("SU2",)),
    "U1xU1": (2, ("U1", "U1")),
    "U1xSU2": (2, ("U1", "SU2")),
    "SU2xSU2": (2, ("SU2", "SU2")),
    "USp4": (2, ("USp4",)),
}
_FACTOR_SIZE = {"U1": 2, "SU2": 2, "USp4": 4}
_FACTOR_ANGLES = {"U1": 1, "SU2": 1, "USp4": 2}


class SpecError(ValueError):
    pass


def symplectic_form(g: int) -> np.ndarray:
    J = np.zeros((2 * g, 2 * g))
    for k in range(g):
        J[2 * k, 2 * k + 1] = 1.0
        J[2 * k + 1, 2 * k] = -1.0
    return J


def swap_matrix(g: int) -> np.ndarray:
    """Exchange the two 2x2 blocks (genus 2 only)."""
    if g != 2:
        raise SpecError("the swap coset S is only defined for g = 2")
    S = np.zeros((4, 4))
    S[0, 2] = S[1, 3] = S[2, 0] = S[3, 1] = 1.0
    return S


def named_coset(name: str, g: int) -> np.ndarray:
    if name == "I":
        return np.eye(2 * g)
    if name == "J":
        return symplectic_form(g)
    if name == "S":
        return swap_matrix(g)
    raise SpecError(f"unknown named coset {name!r} (expected I, J or S)")


def is_unitary_symplectic(M: np.ndarray, tol: float = TOL) -> bool:
    n = M.shape[-1]
    if M.shape[-2:] != (n, n) or n % 2:
        return False
    J = symplectic_form(n // 2)
    unitary = np.abs(M.conj().swapaxes(-1, -2) @ M - np.eye(n)).max() <= tol
    symplectic = np.abs(M.swapaxes(-1, -2) @ J @ M - J).max() <= tol
    return bool(unitary and symplectic)


def _parse_matrix(literal, g: int) -> np.ndarray:
    arr = np.asarray(literal, dtype=np.float64)
    n = 2 * g
    if arr.shape == (n, n, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.shape == (n * n, 2):
        return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)
    raise SpecError(f"matrix literal must be {n}x{n} complex pairs, got shape {arr.shape}")


@dataclass(frozen=True)
class STGroupSpec:
    g: int
    identity_component: str
    coset_reps: tuple[np.ndarray, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.identity_component not in COMPONENTS:
            raise SpecError(f"unknown identity component {self.identity_component!r}")
        g0, _ = COMPONENTS[self.identity_component]
        if g0 != self.g:
            raise SpecError(f"{self.identity_component} lives in USp({2 * g0}), not USp({2 * self.g})")
        reps = self.coset_reps or (np.eye(2 * self.g),)
        reps = tuple(np.asarray(M, dtype=np.complex128) for M in reps)
        for M in reps:
            if not is_unitary_symplectic(M):
                raise SpecError(f"coset representative is not unitary symplectic:\n{M}")
        object.__setattr__(self, "coset_reps", reps)
        if not self.name:
            object.__setattr__(self, "name", self.identity_component)

    @property
    def factors(self) -> tuple[str, ...]:
        return COMPONENTS[self.identity_component][1]

    @property
    def n_components(self) -> int:
        return len(self.coset_reps)

    @classmethod
    def from_dict(cls, data: dict) -> STGroupSpec:
        try:
            g = int(data["g"])
            comp = data["component"]
        except KeyError as exc:
            raise SpecError(f"group spec missing field {exc}") from None
        reps = []
        for c in data.get("cosets", ["I"]):
            reps.append(named_coset(c, g) if isinstance(c, str) else _parse_matrix(c, g))
        return cls(g, comp, tuple(reps), data.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> STGroupSpec:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        cosets = []
        for M in self.coset_reps:
            for label in ("I", "J", "S") if self.g == 2 else ("I", "J"):
                if np.allclose(M, named_coset(label, self.g), atol=TOL):
                    cosets.append(label)
                    break
            else:
                cosets.append([[[z.real, z.imag] for z in row] for row in M])
        return {"name": self.name, "g": self.g, "component": self.identity_component, "cosets": cosets}


BUILTIN_SPECS = {
    "U1": STGroupSpec(1, "U1"),
    "SU2": STGroupSpec(1, "SU2"),
    "N(U1)": STGroupSpec(1, "U1", (np.eye(2), symplectic_form(1)), "N(U1)"),
    "U1xU1": STGroupSpec(2, "U1xU1"),
    "U1xSU2": STGroupSpec(2, "U1xSU2"),
    "SU2xSU2": STGroupSpec(2, "SU2xSU2"),
    "(SU2xSU2)xC2": STGroupSpec(2, "SU2xSU2", (np.eye(4), swap_matrix(2)), "(SU2xSU2)xC2"),
    "USp4": STGroupSpec(2, "USp4"),
}


# ---------------------------------------------------------------------------
# characters


def char_values(M: np.ndarray) -> tuple[float, float, float]:
    """(a1, a2, s2) = (tr M, tr wedge^2 M, tr M^2) for a unitary symplectic M."""
    M = np.asarray(M, dtype=np.complex128)
    if not is_unitary_symplectic(M):
        raise SpecError("char_values needs a unitary symplectic matrix")
    a1, a2, s2 = char_values_batch(M[None])
    return float(a1[0]), float(a2[0]), float(s2[0])


def char_values_batch(Ms: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``char_values`` over a stack of matrices, without validation.

    Eigenvalues of a unitary symplectic matrix come in conjugate pairs, so
    both traces are real up to round-off.
    """
    tr = np.trace(Ms, axis1=-2, axis2=-1)
    tr2 = np.einsum("...ij,...ji->...", Ms, Ms)
    if max(np.abs(tr.imag).max(initial=0.0), np.abs(tr2.imag).max(initial=0.0)) > 1e-8:
        raise SpecError("non-real trace: input is not unitary symplectic")
    a1, s2 = tr.real, tr2.real
    return a1, (a1 * a1 - s2) / 2, s2


# ---------------------------------------------------------------------------
# sampling


def _u1_blocks(theta: np.ndarray) -> np.ndarray:
    out = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    z = np.exp(1j * theta)
    out[..., 0, 0] = z
    out[..., 1, 1] = z.conj()
    return out


def _su2_blocks(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    out = np.empty(alpha.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = alpha
    out[..., 0, 1] = beta
    out[..., 1, 0] = -beta.conj()
    out[..., 1, 1] = alpha.conj()
    return out


def _sample_su2(n: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return _su2_blocks(q[:, 0] + 1j * q[:, 1], q[:, 2] + 1j * q[:, 3])


def _sample_usp(n: int, g: int, rng: np.random.Generator) -> np.ndarray:
    """Haar USp(2g) by symplectic Gram-Schmidt on complex Gaussian vectors.

    Each unit vector u is paired with w = -J conj(u); the pairs (u, w) are the
    columns 2k, 2k+1. The construction commutes with left multiplication by
    USp(2g), so the output law is Haar.
    """
    J = symplectic_form(g)
    cols = []
    for _ in range(g):
        v = rng.standard_normal((n, 2 * g)) + 1j * rng.standard_normal((n, 2 * g))
        for _pass in range(2):  # re-orthogonalize once for stability
            for c in cols:
                v = v - c * np.einsum("ni,ni->n", c.conj(), v)[:, None]
        u = v / np.linalg.norm(v, axis=1, keepdims=True)
        w = -(u.conj() @ J.T)
        cols += [u, w]
    return np.stack(cols, axis=-1)


def sample_identity_component(spec: STGroupSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros((n, 2 * spec.g, 2 * spec.g), dtype=np.complex128)
    pos = 0
    for f in spec.factors:
        k = _FACTOR_SIZE[f]
        if f == "U1":
            block = _u1_blocks(rng.uniform(0.0, 2 * np.pi, n))
        elif f == "SU2":
            block = _sample_su2(n, rng)
        else:
            block = _sample_usp(n, 2, rng)
        out[:, pos : pos + k, pos : pos + k] = block
        pos += k
    return out


def sample_elements(spec: STGroupSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-random elements: uniform component, then Haar on the identity component."""
    comp = rng.integers(spec.n_components, size=n)
    h = sample_identity_component(spec, n, rng)
    reps = np.stack(spec.coset_reps)
    return reps[comp] @ h


def sample_element(spec: STGroupSpec, rng: np.random.Generator) -> np.ndarray:
    return sample_elements(spec, 1, rng)[0]


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator from an int or SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def sample_char_values(spec: STGroupSpec, n: int, seed: int = 0, threads: int = 1):
    """(a1, a2, s2) arrays for n i.i.d. Haar samples.

    Chunk k always uses the k-th spawned seed stream, so the output does not
    depend on ``threads``.
    """
    sizes = [MC_CHUNK] * (n // MC_CHUNK) + ([n % MC_CHUNK] if n % MC_CHUNK else [])
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def chunk(job):
        size, ss = job
        return char_values_batch(sample_elements(spec, size, make_rng(ss)))

    jobs = list(zip(sizes, seeds))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, jobs))
    else:
        parts = [chunk(j) for j in jobs]
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentTriple:
    m2a1: float
    m1a2: float
    m1s2: float
    err: float
    method: str = ""
    stderr: dict = field(default_factory=dict)
    nodes: int = 0
    seed: int | None = None
    components: tuple = ()

    def rounded(self) -> tuple[int, int, int]:
        return tuple(math.floor(x + 0.5) for x in (self.m2a1, self.m1a2, self.m1s2))

    @property
    def certified(self) -> bool:
        return self.err < 0.5

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "moments": {"m2a1": self.m2a1, "m1a2": self.m1a2, "m1s2": self.m1s2},
            "err": self.err,
            "rounded": list(self.rounded()),
            "certified": self.certified,
        }
        if self.stderr:
            out["stderr"] = self.stderr
        if self.method == "quadrature":
            out["nodes"] = self.nodes
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _mc_chunk_sums(spec, rep, seed_seq, n):
    h = sample_identity_component(spec, n, make_rng(seed_seq))
    a1, a2, s2 = char_values_batch(rep @ h)
    a1_2 = a1 * a1
    return [math.fsum(x) for x in (a1_2, a2, s2, a1_2 * a1_2, a2 * a2, s2 * s2)]


def _montecarlo(spec: STGroupSpec, budget: int, seed: int, threads: int) -> MomentTriple:
    k = spec.n_components
    per = max(2, budget // k)
    chunks = []
    for c in range(k):
        sizes = [MC_CHUNK] * (per // MC_CHUNK) + ([per % MC_CHUNK] if per % MC_CHUNK else [])
        chunks += [(c, s) for s in sizes]
    seeds = np.random.SeedSequence(seed).spawn(len(chunks))
    jobs = [(spec, spec.coset_reps[c], ss, s) for (c, s), ss in zip(chunks, seeds)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = list(pool.map(lambda j: _mc_chunk_sums(*j), jobs))
    else:
        sums = [_mc_chunk_sums(*j) for j in jobs]

    totals = [[ExactSum() for _ in range(6)] for _ in range(k)]
    for (c, _), row in zip(chunks, sums):
        for acc, x in zip(totals[c], row):
            acc.add(x)

    means = np.zeros(3)
    var = np.zeros(3)
    comps = []
    for c in range(k):
        t = [acc.value for acc in totals[c]]
        m = np.array(t[:3]) / per
        second = np.array(t[3:]) / per
        # a2 variance is folded into the a1^2 and s2 ones below
        v = np.maximum(second - m * m, 0.0) * per / (per - 1)
        means += m / k
        var += v / (per * k * k)
        comps.append(tuple(m))
    se = np.sqrt(var)
    m2a1, m1a2, _ = means
    # a2 = (a1^2 - s2)/2 exactly, so the identity holds for the means too
    m1s2 = means[2]
    return MomentTriple(
        m2a1=float(m2a1),
        m1a2=float(m1a2),
        m1s2=float(m1s2),
        err=float(3 * se.max()),
        method="montecarlo",
        stderr={"m2a1": float(se[0]), "m1a2": float(se[1]), "m1s2": float(se[2])},
        nodes=per * k,
        seed=seed,
        components=tuple(comps),
    )


def _weyl_angles_density(factors, n: int):
    """Torus nodes (list of angle arrays, flattened grid) and normalized Weyl weights."""
    theta = 2 * np.pi * np.arange(n) / n
    n_angles = sum(_FACTOR_ANGLES[f] for f in factors)
    grids = np.meshgrid(*([theta] * n_angles), indexing="ij")
    angles = [gr.ravel() for gr in grids]
    density = np.ones_like(angles[0])
    i = 0
    for f in factors:
        if f == "SU2":
            density *= 2 * np.sin(angles[i]) ** 2
        elif f == "USp4":
            t1, t2 = angles[i], angles[i + 1]
            density *= (np.cos(t1) - np.cos(t2)) ** 2 * np.sin(t1) ** 2 * np.sin(t2) ** 2
        i += _FACTOR_ANGLES[f]
    # normalization is taken from the rule itself, not transcribed constants
    return angles, density / density.sum()


def _weyl_integrals(factors, n: int) -> np.ndarray:
    angles, w = _weyl_angles_density(factors, n)
    a1 = sum(2 * np.cos(t) for t in angles)
    s2 = sum(2 * np.cos(2 * t) for t in angles)
    a1_2 = a1 * a1
    return np.array([w @ a1_2, w @ ((a1_2 - s2) / 2), w @ s2])


def _param_grid(factors, level: int):
    """Full parametrization of the identity component on a tensor grid.

    U(1): one trapezoid angle. SU(2): (s, xi1, xi2) with
    alpha = sqrt(1-s) e^{i xi1}, beta = sqrt(s) e^{i xi2}; Haar measure is
    uniform in s on [0, 1] (Gauss-Legendre) and in both phases.
    Returns (matrices, weights).
    """
    n_phase, n_gl = 3 + level, 2 + level
    phase = 2 * np.pi * np.arange(n_phase) / n_phase
    x, wx = np.polynomial.legendre.leggauss(n_gl)
    s_nodes, s_w = (x + 1) / 2, wx / 2
    pieces = []
    for f in factors:
        if f == "U1":
            pieces.append((_u1_blocks(phase), np.full(n_phase, 1.0 / n_phase)))
        elif f == "SU2":
            S, X1, X2 = np.meshgrid(s_nodes, phase, phase, indexing="ij")
            W = np.meshgrid(s_w, np.full(n_phase, 1 / n_phase), np.full(n_phase, 1 / n_phase), indexing="ij")
            blocks = _su2_blocks(np.sqrt(1 - S.ravel()) * np.exp(1j * X1.ravel()), np.sqrt(S.ravel()) * np.exp(1j * X2.ravel()))
            pieces.append((blocks, (W[0] * W[1] * W[2]).ravel()))
        else:
            raise SpecError("no full parametrization for USp4; reduce to the identity coset")
    sizes = [p[0].shape[0] for p in pieces]
    total = int(np.prod(sizes))
    dim = sum(_FACTOR_SIZE[f] for f in factors)
    mats = np.zeros((total, dim, dim), dtype=np.complex128)
    weights = np.ones(total)
    idx = np.indices(sizes).reshape(len(sizes), -1)
    pos = 0
    for (blocks, w), f, ix in zip(pieces, factors, idx):
        k = _FACTOR_SIZE[f]
        mats[:, pos : pos + k, pos : pos + k] = blocks[ix]
        weights *= w[ix]
        pos += k
    return mats, weights


def _param_nodes(factors, level: int) -> int:
    n_phase, n_gl = 3 + level, 2 + level
    per = {"U1": n_phase, "SU2": n_gl * n_phase * n_phase}
    return int(np.prod([per[f] for f in factors]))


def _param_integrals(factors, rep: np.ndarray, level: int) -> np.ndarray:
    mats, w = _param_grid(factors, level)
    a1, a2, s2 = char_values_batch(rep @ mats)
    return np.array([w @ (a1 * a1), w @ a2, w @ s2])


def _in_identity_component(spec: STGroupSpec, rep: np.ndarray) -> bool:
    # USp(4) is all of USp(4), so every valid representative lies in it
    return spec.identity_component == "USp4" or np.allclose(rep, np.eye(2 * spec.g), atol=TOL)


def _refine(integrate, nodes_of, levels, budget):
    """Run successive rules until two agree within QUAD_AGREEMENT or the budget runs out."""
    prev = None
    value, err, used = None, math.inf, 0
    for lvl in levels:
        if nodes_of(lvl) > budget and prev is not None:
            break
        value = integrate(lvl)
        used = nodes_of(lvl)
        if prev is not None:
            err = max(float(np.abs(value - prev).max()), QUAD_ERR_FLOOR)
            if err <= QUAD_AGREEMENT:
                break
        prev = value
    return value, err, used


def _quadrature(spec: STGroupSpec, budget: int) -> MomentTriple:
    comps, errs, nodes = [], [], 0
    n_angles = sum(_FACTOR_ANGLES[f] for f in spec.factors)
    for rep in spec.coset_reps:
        if _in_identity_component(spec, rep):
            value, err, used = _refine(
                lambda n: _weyl_integrals(spec.factors, n),
                lambda n: n**n_angles,
                [8 * 2**k for k in range(12)],
                budget,
            )
        else:
            value, err, used = _refine(
                lambda lvl: _param_integrals(spec.factors, rep, lvl),
                lambda lvl: _param_nodes(spec.factors, lvl),
                range(12),
                budget,
            )
        comps.append(tuple(float(v) for v in value))
        errs.append(err)
        nodes += used
    mean = np.mean(np.array(comps), axis=0)
    return MomentTriple(
        m2a1=float(mean[0]),
        m1a2=float(mean[1]),
        m1s2=float(mean[2]),
        err=float(np.mean(errs)),
        method="quadrature",
        nodes=nodes,
        components=tuple(comps),
    )


def exact_moments(
    spec: STGroupSpec,
    method: str = "quadrature",
    budget: int | None = None,
    seed: int = 0,
    threads: int = 1,
) -> MomentTriple:
    """Haar averages of a1^2, a2 and s2 over the group, equal weight per component.

    ``budget`` is the node cap per component for quadrature and the total
    sample count for Monte Carlo. A result with ``err >= 0.5`` is returned
    but marked uncertified.
    """
    if method == "quadrature":
        return _quadrature(spec, budget or DEFAULT_QUAD_BUDGET)
    if method == "montecarlo":
        return _montecarlo(spec, budget or DEFAULT_MC_BUDGET, seed, threads)
    raise ValueError(f"unknown method {method!r}")


def fs_indicator_with_error(spec: STGroupSpec, budget: int = 10**5, seed: int = 0) -> tuple[float, float]:
    """Haar mean of tr(M^2) by direct sampling, with a 3-sigma error."""
    k = spec.n_components
    per = max(2, budget // k)
    rng = make_rng(np.random.SeedSequence(seed).spawn(1)[0])
    means, var = 0.0, 0.0
    for rep in spec.coset_reps:
        h = sample_identity_component(spec, per, rng)
        s2 = np.einsum("nij,nji->n", rep @ h, rep @ h).real
        means += s2.mean() / k
        var += s2.var(ddof=1) / (per * k * k)
    return float(means), float(3 * math.sqrt(var))


def fs_indicator(spec: STGroupSpec, budget: int = 10**5, seed: int = 0) -> float:
    """Frobenius-Schur indicator of the standard representation, i.e. M1[s2]."""
    value, err = fs_indicator_with_error(spec, budget, seed)
    if abs(value) > spec.g + err:
        raise ArithmeticError(f"|FS indicator| = {abs(value)} exceeds g + err = {spec.g + err}")
    return value
