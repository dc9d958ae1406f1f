"""Dense matrix helpers, matrix text I/O and the seedable random source.

Matrices are plain 2-D ``float64`` numpy arrays. :func:`as_matrix` is the
single gate that validates shape and finiteness.
"""
import math
import os
import tempfile

import numpy as np

from .errors import DimensionError, IterationLimitError, ParseError


def as_matrix(A, name="matrix"):
    """Return ``A`` as a finite, nonempty 2-D float64 array (read-only view)."""
    arr = np.array(A, dtype=np.float64, copy=True)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def uniform_norm(A):
    """Entrywise max absolute value."""
    arr = np.asarray(A, dtype=np.float64)
    if arr.size == 0:
        raise DimensionError("uniform norm of an empty matrix")
    return float(np.max(np.abs(arr)))


def power_iteration_cap(shape):
    m, n = shape
    return 10 * min(m, n) + 100


def spectral_norm(A, tol=1e-10):
    """Largest singular value by power iteration on ``A^T A``.

    The start vector is the row of ``A`` with the largest Euclidean norm, so
    every iterate is at least that row norm (and hence at least
    ``uniform_norm(A)``); Rayleigh quotients of a PSD matrix never decrease.
    Iteration stops once the relative change drops below ``tol``; at most
    ``10*min(m, n) + 100`` iterations are run before
    :class:`IterationLimitError` is raised with the current estimate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        raise DimensionError("spectral norm of an empty matrix")
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return 0.0
    A = A / scale  # keeps A^T A clear of underflow and overflow
    rows = np.einsum("ij,ij->i", A, A)
    i = int(np.argmax(rows))
    if rows[i] == 0.0:
        return 0.0
    v = A[i] / math.sqrt(rows[i])
    est = 0.0
    for _ in range(power_iteration_cap(A.shape)):
        w = A.T @ (A @ v)
        lam = float(v @ w)
        nw = float(np.linalg.norm(w))
        new = math.sqrt(max(lam, 0.0))
        if nw == 0.0:
            return scale * new
        v = w / nw
        if abs(new - est) <= tol * new:
            return scale * max(new, est)
        est = max(new, est)
    raise IterationLimitError("power iteration did not converge", estimate=scale * est)


# --- matrix text format ---------------------------------------------------

def _fmt(x):
    if x == 0.0:
        return "-0.0" if math.copysign(1.0, x) < 0 else "0"
    if x.is_integer() and abs(x) < 2.0**53:
        return str(int(x))
    return repr(x)


def format_matrix(A):
    A = np.asarray(A, dtype=np.float64)
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    for row in A:
        lines.append(" ".join(_fmt(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    """Parse the ``rows cols`` header + rows text format. ``#`` lines are comments."""
    header = None
    entries = []
    row_count = 0
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        last_line = lineno
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 2:
                raise ParseError("header must be 'rows cols'", lineno)
            try:
                r, c = int(toks[0]), int(toks[1])
            except ValueError:
                raise ParseError(f"non-integer header {line!r}", lineno) from None
            if r <= 0 or c <= 0:
                raise ParseError("dimensions must be positive", lineno)
            header = (r, c)
            continue
        if row_count >= header[0]:
            raise ParseError(f"more than {header[0]} rows", lineno)
        if len(toks) != header[1]:
            raise ParseError(f"expected {header[1]} entries, found {len(toks)}", lineno)
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            raise ParseError(f"non-numeric token in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite entry", lineno)
        entries.extend(vals)
        row_count += 1
    if header is None:
        raise ParseError("missing header", last_line or 1)
    if row_count != header[0]:
        raise ParseError(f"expected {header[0]} rows, found {row_count}", last_line)
    return as_matrix(np.array(entries).reshape(header))


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def atomic_write_text(path, text):
    """Write via a temp file in the destination directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(path, A):
    atomic_write_text(path, format_matrix(as_matrix(A)))


def matrix_io(path, direction, A=None):
    """Read (``direction="read"``) or write (``"write"``) a matrix file."""
    if direction == "read":
        return read_matrix(path)
    if direction == "write":
        if A is None:
            raise ValueError("write needs a matrix")
        write_matrix(path, A)
        return None
    raise ValueError(f"unknown direction {direction!r}")


# --- randomness -------------------------------------------------------------

class RandomSource:
    """Counter-based (Philox) random stream keyed by ``(seed, stream)``.

    Streams with distinct ids are independent; the sequence for a given
    pair is identical across platforms.
    """

    def __init__(self, seed=0, stream=0):
        if not (0 <= seed < 2**64 and 0 <= stream < 2**64):
            raise ValueError("seed and stream must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def spawn(self, stream):
        return RandomSource(self.seed, stream)

    def uniform(self, size=None):
        """Doubles in [0, 1)."""
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def normal(self, size):
        """Standard normals by the Box-Muller transform."""
        size = int(size)
        half = (size + 1) // 2
        u1 = 1.0 - self._gen.random(half)  # (0, 1]
        u2 = self._gen.random(half)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * half)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:size]

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


def gaussian_vector(rng, d):
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    return rng.normal(int(d))
