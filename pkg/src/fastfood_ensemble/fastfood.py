"""Structured Fastfood projection blocks and their dense oracles.

A dense Gaussian random projection row can be emulated by the structured
product

    V = (1 / (sigma * sqrt(d))) * S . H . G . Pi . H . B

where ``B`` is a random +/-1 diagonal, ``Pi`` a random permutation, ``G``
a diagonal of standard Gaussians, ``S`` a diagonal of row-rescaling
factors and ``H`` the (unnormalised) Hadamard matrix of order ``d``.
Because ``H`` is applied with the fast Walsh-Hadamard transform, one
``d x d`` block costs ``O(d log d)`` time and ``O(d)`` storage instead of
``O(d^2)`` for an explicit Gaussian matrix.

Inputs of dimension ``m_in`` are zero-padded to the next power of two
``d_pad``; projections wider than ``d_pad`` stack several independent
blocks and truncate to ``d_out``.

``dense_materialize`` and ``dense_rks`` provide explicit-matrix oracles
(capped in size) used for verification and benchmarking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError, OracleSizeError, ParameterError
from .rng import Stream, derive_seed

DENSE_ORACLE_CAP = 4096

S_MODES = ("chi", "unit")


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    return 1 << (n - 1).bit_length()


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis.

    Returns ``H . v`` for the Hadamard matrix of the last-axis order,
    which must be a power of two. Iterative in-place butterfly,
    ``O(d log d)`` scalar operations; note ``H . H = d * I``.
    """
    a = np.array(v, dtype=np.float64)
    if a.ndim == 0:
        raise DimensionError("fwht expects a vector, got a scalar")
    d = a.shape[-1]
    if not is_pow2(d):
        raise DimensionError(f"fwht length must be a power of two, got {d}")
    shape = a.shape
    a = np.ascontiguousarray(a).reshape(-1, d)
    h = 1
    while h < d:
        a = a.reshape(-1, d // (2 * h), 2, h)
        top = a[:, :, 0, :].copy()
        bot = a[:, :, 1, :]
        a[:, :, 0, :] = top + bot
        a[:, :, 1, :] = top - bot
        a = a.reshape(-1, d)
        h *= 2
    return a.reshape(shape)


@dataclass(frozen=True)
class FastfoodStack:
    """One d x d structured factor set (diagonals + permutation).

    The Hadamard factor is implicit: it is realised by :func:`fwht`, never
    stored. All vectors have length ``d`` (a power of two).
    """

    b_signs: np.ndarray
    perm: np.ndarray
    g_gauss: np.ndarray
    s_scale: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b_signs, dtype=np.float64)
        p = np.asarray(self.perm, dtype=np.int64)
        g = np.asarray(self.g_gauss, dtype=np.float64)
        s = np.asarray(self.s_scale, dtype=np.float64)
        d = b.shape[0]
        if not is_pow2(d):
            raise ParameterError(f"stack dimension must be a power of two, got {d}")
        if p.shape != (d,) or g.shape != (d,) or s.shape != (d,):
            raise ParameterError("stack factor lengths disagree")
        if not np.all(np.abs(b) == 1.0):
            raise ParameterError("b_signs entries must be exactly +1 or -1")
        if not np.array_equal(np.sort(p), np.arange(d)):
            raise ParameterError("perm must be a bijection on 0..d-1")
        if not (np.all(np.isfinite(s)) and np.all(s >= 0.0)):
            raise ParameterError("s_scale entries must be finite and >= 0")
        for name, arr in (("b_signs", b), ("perm", p), ("g_gauss", g), ("s_scale", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.b_signs.shape[0]


@dataclass(frozen=True)
class FastfoodBlock:
    """Stacked FastfoodStacks realising one m_in -> d_out projection."""

    m_in: int
    d_pad: int
    d_out: int
    sigma: float
    seed: int
    s_mode: str
    stacks: tuple[FastfoodStack, ...] = field(repr=False)

    def __post_init__(self):
        if self.d_pad != next_pow2(self.m_in):
            raise ParameterError("d_pad must be the smallest power of two >= m_in")
        n = len(self.stacks)
        if not (n * self.d_pad >= self.d_out > (n - 1) * self.d_pad):
            raise ParameterError("stack count inconsistent with d_out")
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")
        if self.s_mode not in S_MODES:
            raise ParameterError(f"unknown s_mode {self.s_mode!r}")

    @property
    def n_stacks(self) -> int:
        return len(self.stacks)

    @property
    def stored_scalars(self) -> int:
        """Scalars held per block: 4 length-d vectors per stack."""
        return 4 * self.d_pad * self.n_stacks

    @property
    def multiplies_per_projection(self) -> int:
        """Scalar multiplies to project one vector (B, G, S, 1/(sigma sqrt d))."""
        return 4 * self.d_pad * self.n_stacks

    @property
    def addsubs_per_projection(self) -> int:
        """Scalar add/sub operations: two WHT butterflies per stack."""
        return 2 * self.d_pad * int(math.log2(self.d_pad)) * self.n_stacks


def sample_block(
    seed: int, m_in: int, d_out: int, sigma: float, s_mode: str = "chi"
) -> FastfoodBlock:
    """Draw a FastfoodBlock deterministically from a 64-bit seed.

    Per stack (independent derived substream, pinned draw order):
    Rademacher ``b_signs``, Fisher-Yates ``perm``, standard-normal
    ``g_gauss``, then ``s_scale``. In the default ``"chi"`` mode
    ``s_i = chi(d)_i / ||g||_2`` so each projection row's norm is
    distributed like a dense Gaussian row's; ``"unit"`` sets ``s_i = 1``
    (ablation).
    """
    if m_in < 1 or d_out < 1:
        raise ParameterError(f"dimensions must be >= 1, got m_in={m_in}, d_out={d_out}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if s_mode not in S_MODES:
        raise ParameterError(f"unknown s_mode {s_mode!r} (expected one of {S_MODES})")
    d = next_pow2(m_in)
    n_stacks = -(-d_out // d)
    stacks = []
    for k in range(n_stacks):
        st = Stream(derive_seed(seed, k))
        b = st.rademacher(d)
        perm = st.permutation(d)
        g = st.normals(d)
        if s_mode == "chi":
            s = st.chis(d, d) / np.linalg.norm(g)
        else:
            s = np.ones(d, dtype=np.float64)
        stacks.append(FastfoodStack(b_signs=b, perm=perm, g_gauss=g, s_scale=s))
    return FastfoodBlock(
        m_in=m_in, d_pad=d, d_out=d_out, sigma=sigma, seed=seed, s_mode=s_mode,
        stacks=tuple(stacks),
    )


def project(block: FastfoodBlock, x: np.ndarray) -> np.ndarray:
    """Apply the block: per stack (1/(sigma sqrt d)) S.H.G.Pi.H.B on the
    zero-padded input, stacks concatenated then truncated to ``d_out``.

    Accepts a single vector of length ``m_in`` or a matrix of row vectors;
    pure, linear in ``x``, and safe to call concurrently on shared blocks.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    X = np.atleast_2d(arr)
    if X.ndim != 2 or X.shape[1] != block.m_in:
        raise DimensionError(
            f"input width {arr.shape[-1] if arr.ndim else 0} != m_in {block.m_in}"
        )
    if not np.all(np.isfinite(X)):
        raise InputError("projection input contains non-finite values")
    d = block.d_pad
    padded = np.zeros((X.shape[0], d), dtype=np.float64)
    padded[:, : block.m_in] = X
    scale = 1.0 / (block.sigma * math.sqrt(d))
    pieces = []
    for stack in block.stacks:
        z = padded * stack.b_signs
        z = fwht(z)
        z = z[:, stack.perm]
        z *= stack.g_gauss
        z = fwht(z)
        z *= stack.s_scale
        z *= scale
        pieces.append(z)
    out = np.concatenate(pieces, axis=1)[:, : block.d_out]
    return out[0] if single else out


def hadamard_matrix(d: int) -> np.ndarray:
    """Explicit unnormalised Hadamard matrix (Sylvester construction)."""
    if not is_pow2(d):
        raise DimensionError(f"Hadamard order must be a power of two, got {d}")
    H = np.ones((1, 1), dtype=np.float64)
    while H.shape[0] < d:
        H = np.block([[H, H], [H, -H]])
    return H


def dense_materialize(block: FastfoodBlock, cap: int = DENSE_ORACLE_CAP) -> np.ndarray:
    """Explicit d_out x m_in matrix of the block's projection rows.

    Built from the explicit Hadamard matrix and plain matrix products, so
    it shares no code path with :func:`project`; columns past ``m_in``
    are dropped (zero-padding convention). Refuses blocks with
    ``d_pad > cap`` to bound memory.
    """
    if block.d_pad > cap:
        raise OracleSizeError(
            f"d_pad {block.d_pad} exceeds dense oracle cap {cap}"
        )
    d = block.d_pad
    H = hadamard_matrix(d)
    c = 1.0 / (block.sigma * math.sqrt(d))
    rows = []
    for stack in block.stacks:
        A = H * stack.b_signs[np.newaxis, :]
        A = A[stack.perm, :]
        A = stack.g_gauss[:, np.newaxis] * A
        A = H @ A
        A = c * stack.s_scale[:, np.newaxis] * A
        rows.append(A)
    V = np.vstack(rows)
    return V[: block.d_out, : block.m_in]


def dense_rks(seed: int, m_in: int, d_out: int, sigma: float) -> np.ndarray:
    """Explicit dense Gaussian projection matrix (the unstructured baseline).

    Entries are i.i.d. normal with standard deviation ``1/sigma``, drawn
    row-major from the pinned stream; deterministic in ``seed``.
    """
    if m_in < 1 or d_out < 1:
        raise ParameterError(f"dimensions must be >= 1, got m_in={m_in}, d_out={d_out}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    st = Stream(seed)
    total = m_in * d_out
    out = np.empty(total, dtype=np.float64)
    chunk = 1 << 22  # even, so Box-Muller pairing matches one big draw
    for start in range(0, total, chunk):
        n = min(chunk, total - start)
        out[start : start + n] = st.normals(n)
    if sigma != 1.0:
        out /= sigma
    return out.reshape(d_out, m_in)


@dataclass(frozen=True)
class NonlinearityMode:
    """Elementwise nonlinearity applied after projection.

    ``identity`` passes projections through (the default pipeline feeds
    trees directly); ``rbf-cos`` is the random-feature map
    ``sqrt(2/D) * cos(z + phases)`` used to verify Gaussian-kernel
    approximation. Phases must be present exactly when mode is rbf-cos.
    """

    mode: str
    phases: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in ("identity", "rbf-cos"):
            raise ParameterError(f"unknown nonlinearity mode {self.mode!r}")
        if (self.phases is not None) != (self.mode == "rbf-cos"):
            raise ParameterError("phases must be present iff mode is rbf-cos")
        if self.phases is not None:
            ph = np.asarray(self.phases, dtype=np.float64)
            if ph.ndim != 1:
                raise ParameterError("phases must be a vector")
            if not (np.all(ph >= 0.0) and np.all(ph < 2.0 * np.pi)):
                raise ParameterError("phases must lie in [0, 2*pi)")
            ph.setflags(write=False)
            object.__setattr__(self, "phases", ph)

    @classmethod
    def identity(cls) -> "NonlinearityMode":
        return cls(mode="identity")

    @classmethod
    def rbf_cos(cls, phases: np.ndarray) -> "NonlinearityMode":
        return cls(mode="rbf-cos", phases=phases)


def sample_phases(seed: int, d_out: int) -> np.ndarray:
    """Uniform [0, 2*pi) phase vector for an rbf-cos feature map."""
    if d_out < 1:
        raise ParameterError(f"d_out must be >= 1, got {d_out}")
    return Stream(seed).uniforms(d_out) * (2.0 * np.pi)


def apply_nonlinearity(z: np.ndarray, nl: NonlinearityMode) -> np.ndarray:
    """Apply ``nl`` along the last axis of ``z``."""
    arr = np.asarray(z, dtype=np.float64)
    if nl.mode == "identity":
        return arr
    D = arr.shape[-1]
    if nl.phases.shape[0] != D:
        raise ParameterError(
            f"phase length {nl.phases.shape[0]} != feature length {D}"
        )
    return math.sqrt(2.0 / D) * np.cos(arr + nl.phases)


def exact_rbf(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    """Gaussian RBF kernel exp(-||x - y||^2 / (2 sigma^2))."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise DimensionError("kernel inputs must be equal-length vectors")
    diff = xv - yv
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma * sigma)))
