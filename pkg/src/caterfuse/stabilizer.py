"""Stabilizer-tableau oracle for the graph rewrite rules.

Rows are stabilizer generators stored as ``i^phase * prod_j X^x_j Z^z_j``
with ``phase`` tracked mod 4 (no destabilizer rows are kept).  The
tableau exists to adjudicate the combinatorial rules in
:mod:`caterfuse.graphstate` exactly, so it favours clarity over speed
and is capped at 16 qubits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphstate import GraphState, Status

MAX_QUBITS = 16

_PAULI_BITS = {"X": (1, 0, 0), "Y": (1, 1, 1), "Z": (0, 1, 0)}


@dataclass(frozen=True)
class Tableau:
    """Stabilizer group of an n-qubit state, one generator per row.

    ``qubits`` maps columns to external qubit ids so that tableaux over
    different survivor sets stay comparable.
    """

    qubits: tuple[int, ...]
    x: np.ndarray
    z: np.ndarray
    phase: np.ndarray

    @property
    def n(self) -> int:
        return len(self.qubits)

    def column(self, q: int) -> int:
        try:
            return self.qubits.index(q)
        except ValueError:
            raise KeyError(f"qubit {q} not in tableau") from None

    def copy(self) -> "Tableau":
        return Tableau(self.qubits, self.x.copy(), self.z.copy(), self.phase.copy())

    def row_sign(self, i: int) -> int:
        """0 for +, 1 for - on row ``i`` after normalizing Y factors."""
        y_count = int(np.sum(self.x[i] & self.z[i]))
        rem = (int(self.phase[i]) - y_count) % 4
        if rem % 2:
            raise ValueError(f"row {i} is not a Hermitian Pauli")
        return rem // 2

    def validate(self) -> None:
        """Assert generator count, pairwise commutation, and independence."""
        n = self.n
        if self.x.shape != (n, n) or self.z.shape != (n, n):
            raise ValueError("tableau shape mismatch")
        for i in range(n):
            self.row_sign(i)
        sym = np.concatenate([self.x, self.z], axis=1).astype(np.uint8)
        if _rank(sym) != n:
            raise ValueError("stabilizer generators are not independent")
        cross = (self.x @ self.z.T + self.z @ self.x.T) % 2
        if np.any(cross):
            raise ValueError("stabilizer generators do not commute")


def _rank(mat: np.ndarray) -> int:
    return len(_rref(mat))


def _rref(mat: np.ndarray) -> np.ndarray:
    """Reduced row echelon form over GF(2), zero rows dropped."""
    m = (mat.copy() % 2).astype(np.uint8)
    rows, cols = m.shape
    pivot = 0
    for col in range(cols):
        hit = None
        for r in range(pivot, rows):
            if m[r, col]:
                hit = r
                break
        if hit is None:
            continue
        m[[pivot, hit]] = m[[hit, pivot]]
        for r in range(rows):
            if r != pivot and m[r, col]:
                m[r] ^= m[pivot]
        pivot += 1
        if pivot == rows:
            break
    return m[m.any(axis=1)]


def _row_mult(
    x1: np.ndarray, z1: np.ndarray, p1: int, x2: np.ndarray, z2: np.ndarray, p2: int
) -> tuple[np.ndarray, np.ndarray, int]:
    """Product of two phase-tracked rows: i^p1 X^x1 Z^z1 * i^p2 X^x2 Z^z2."""
    phase = (p1 + p2 + 2 * int(np.sum(z1 & x2))) % 4
    return x1 ^ x2, z1 ^ z2, phase


def tableau_from_graph(g: GraphState) -> Tableau:
    """Tableau of the graph state over the active vertices of ``g``.

    Generator for vertex v is X_v prod_{w in N(v)} Z_w.  Lost vertices
    are rejected: their stabilizers are not knowable until resolved.
    """
    if any(g.status(v) is Status.LOST for v in g.vertices):
        raise ValueError("graph has unresolved lost vertices")
    qubits = g.active_vertices
    n = len(qubits)
    if n > MAX_QUBITS:
        raise ValueError(f"tableau capped at {MAX_QUBITS} qubits, got {n}")
    col = {q: i for i, q in enumerate(qubits)}
    x = np.zeros((n, n), dtype=np.uint8)
    z = np.zeros((n, n), dtype=np.uint8)
    for i, v in enumerate(qubits):
        x[i, col[v]] = 1
        for w in g.neighbors(v):
            z[i, col[w]] = 1
    return Tableau(qubits, x, z, np.zeros(n, dtype=np.uint8))


def _pauli_vectors(t: Tableau, paulis: dict[int, str]) -> tuple[np.ndarray, np.ndarray, int]:
    if not paulis:
        raise ValueError("empty Pauli string")
    xp = np.zeros(t.n, dtype=np.uint8)
    zp = np.zeros(t.n, dtype=np.uint8)
    phase = 0
    for q, letter in paulis.items():
        if letter not in _PAULI_BITS:
            raise ValueError(f"unknown Pauli letter {letter!r}")
        xb, zb, pb = _PAULI_BITS[letter]
        c = t.column(q)
        xp[c], zp[c] = xb, zb
        phase += pb
    return xp, zp, phase % 4


def measure_pauli_string(
    t: Tableau, paulis: dict[int, str], forced_outcome: int | None = None
) -> tuple[Tableau, int, bool]:
    """Measure a (possibly joint) Pauli operator on the tableau.

    Returns ``(new_tableau, outcome, deterministic)`` where outcome 0 is
    the +1 eigenvalue.  Random outcomes take ``forced_outcome`` when
    supplied and default to 0; forcing a deterministic measurement to
    the wrong branch raises.
    """
    xp, zp, pp = _pauli_vectors(t, paulis)
    anti = [
        i
        for i in range(t.n)
        if (int(np.sum(t.x[i] & zp)) + int(np.sum(t.z[i] & xp))) % 2
    ]
    if anti:
        outcome = 0 if forced_outcome is None else int(forced_outcome)
        if outcome not in (0, 1):
            raise ValueError("forced_outcome must be 0 or 1")
        out = t.copy()
        pivot = anti[0]
        for i in anti[1:]:
            out.x[i], out.z[i], ph = _row_mult(
                out.x[i], out.z[i], int(out.phase[i]),
                out.x[pivot], out.z[pivot], int(out.phase[pivot]),
            )
            out.phase[i] = ph
        out.x[pivot], out.z[pivot] = xp, zp
        out.phase[pivot] = (pp + 2 * outcome) % 4
        return out, outcome, False

    # Deterministic: express P as a product of generators and read the sign.
    sym = np.concatenate([t.x, t.z], axis=1).astype(np.uint8)
    target = np.concatenate([xp, zp])
    combo = _solve_gf2(sym.T, target)
    if combo is None:  # pragma: no cover - impossible for a stabilizer state
        raise ValueError("operator is outside the stabilizer group span")
    xa = np.zeros(t.n, dtype=np.uint8)
    za = np.zeros(t.n, dtype=np.uint8)
    pa = 0
    for i in np.flatnonzero(combo):
        xa, za, pa = _row_mult(xa, za, pa, t.x[i], t.z[i], int(t.phase[i]))
    diff = (pp - pa) % 4
    if diff % 2:  # pragma: no cover - guarded by validate()
        raise ValueError("non-Hermitian phase encountered")
    outcome = diff // 2
    if forced_outcome is not None and int(forced_outcome) != outcome:
        raise ValueError(
            f"measurement is deterministic with outcome {outcome}; "
            f"cannot force {forced_outcome}"
        )
    return t, outcome, True


def measure_pauli(
    t: Tableau, basis: str, q: int, forced_outcome: int | None = None
) -> tuple[Tableau, int, bool]:
    """Measure a single-qubit Pauli ``basis`` in {X, Y, Z} on qubit ``q``."""
    return measure_pauli_string(t, {q: basis}, forced_outcome)


def _solve_gf2(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve ``a @ x = b`` over GF(2); None when inconsistent."""
    rows, cols = a.shape
    m = np.concatenate([a % 2, (b % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(cols):
        hit = None
        for i in range(r, rows):
            if m[i, c]:
                hit = i
                break
        if hit is None:
            continue
        m[[r, hit]] = m[[hit, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        pivots.append((r, c))
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i, -1]:
            return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in pivots:
        x[c] = m[i, -1]
    return x


def _restricted_span(t: Tableau, qubits: tuple[int, ...]) -> np.ndarray:
    """GF(2) basis of stabilizers supported entirely on ``qubits``.

    Signs are dropped; the result is a canonical RREF over the columns
    (x | z) of the restricted qubit set.
    """
    inside = [t.column(q) for q in qubits]
    outside = [i for i in range(t.n) if t.qubits[i] not in set(qubits)]
    rows = np.concatenate([t.x, t.z], axis=1).astype(np.uint8)
    n = t.n
    order = (
        outside
        + [i + n for i in outside]
        + inside
        + [i + n for i in inside]
    )
    reduced = _rref(rows[:, order])
    k = 2 * len(outside)
    if reduced.size == 0:
        return reduced.reshape(0, 2 * len(inside))
    keep = ~reduced[:, :k].any(axis=1) if k else np.ones(len(reduced), dtype=bool)
    return _rref(reduced[keep][:, k:])


def groups_equal_up_to_sign(t1: Tableau, t2: Tableau, qubits: tuple[int, ...]) -> bool:
    """True iff both stabilizer groups agree on ``qubits``, signs ignored.

    Each group is first projected to the subgroup supported entirely on
    the given qubit subset; the projections are compared as GF(2) row
    spaces.  Raises when ``qubits`` is not a subset of either tableau.
    """
    for t in (t1, t2):
        missing = [q for q in qubits if q not in t.qubits]
        if missing:
            raise ValueError(f"qubits {missing} absent from tableau")
    a = _restricted_span(t1, tuple(qubits))
    b = _restricted_span(t2, tuple(qubits))
    return a.shape == b.shape and bool(np.array_equal(a, b))
