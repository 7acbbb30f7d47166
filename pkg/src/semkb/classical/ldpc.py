"""Binary LDPC codes: alist I/O, systematic encoding via GF(2) elimination, sum-product decoding."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LLR_CLIP = 30.0


class LdpcConstructionError(ValueError):
    pass


def read_alist(path: str | Path) -> np.ndarray:
    return parse_alist(Path(path).read_text())


def parse_alist(text: str) -> np.ndarray:
    """Parity-check matrix (m x n) from the alist format (1-based, zero padding allowed)."""
    tokens = [list(map(int, line.split())) for line in text.strip().splitlines() if line.strip()]
    try:
        n, m = tokens[0]
        # tokens[1]: max column / row degree; tokens[2], tokens[3]: degree lists
        col_deg, row_deg = tokens[2], tokens[3]
        col_lists = tokens[4 : 4 + n]
        row_lists = tokens[4 + n : 4 + n + m]
    except (ValueError, IndexError) as exc:
        raise ValueError("malformed alist file") from exc
    if len(col_deg) != n or len(row_deg) != m or len(col_lists) != n or len(row_lists) != m:
        raise ValueError("malformed alist file")
    H = np.zeros((m, n), dtype=np.uint8)
    for j, rows in enumerate(col_lists):
        nz = [r for r in rows if r]
        if len(nz) != col_deg[j]:
            raise ValueError(f"alist column {j + 1}: degree mismatch")
        for r in nz:
            H[r - 1, j] = 1
    H2 = np.zeros_like(H)
    for i, cols in enumerate(row_lists):
        nz = [c for c in cols if c]
        if len(nz) != row_deg[i]:
            raise ValueError(f"alist row {i + 1}: degree mismatch")
        for c in nz:
            H2[i, c - 1] = 1
    if not np.array_equal(H, H2):
        raise ValueError("alist column and row lists disagree")
    return H


def format_alist(H: np.ndarray) -> str:
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    cols = [list(np.nonzero(H[:, j])[0] + 1) for j in range(n)]
    rows = [list(np.nonzero(H[i])[0] + 1) for i in range(m)]
    cmax = max(len(c) for c in cols)
    rmax = max(len(r) for r in rows)
    lines = [f"{n} {m}", f"{cmax} {rmax}", " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rows)]
    lines += [" ".join(str(v) for v in c + [0] * (cmax - len(c))) for c in cols]
    lines += [" ".join(str(v) for v in r + [0] * (rmax - len(r))) for r in rows]
    return "\n".join(lines) + "\n"


def write_alist(H: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(format_alist(H))


def gf2_rref(A: np.ndarray) -> tuple[np.ndarray, list[int], list[int]]:
    """Reduced row echelon form over GF(2).

    Returns (R, pivot_columns, independent_rows) where ``independent_rows``
    indexes a maximal linearly independent subset of the original rows.
    """
    R = np.array(A, dtype=np.uint8) % 2
    m, n = R.shape
    pivots, row = [], 0
    for col in range(n):
        if row >= m:
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            continue
        p = row + hits[0]
        if p != row:
            R[[row, p]] = R[[p, row]]
        for r in np.nonzero(R[:, col])[0]:
            if r != row:
                R[r] ^= R[row]
        pivots.append(col)
        row += 1
    rank = len(pivots)
    independent = _independent_rows(np.asarray(A, dtype=np.uint8) % 2, rank)
    return R[:rank], pivots, independent


def _independent_rows(A: np.ndarray, rank: int) -> list[int]:
    basis: list[np.ndarray] = []
    lead: list[int] = []
    keep = []
    for i, r in enumerate(A):
        v = r.copy()
        for b, l in zip(basis, lead):
            if v[l]:
                v ^= b
        nz = np.nonzero(v)[0]
        if nz.size:
            l = nz[0]
            for k, b in enumerate(basis):
                if b[l]:
                    basis[k] = b ^ v
            basis.append(v)
            lead.append(l)
            keep.append(i)
        if len(keep) == rank:
            break
    return keep


@dataclass
class LdpcCode:
    """Code defined by a sparse parity-check matrix.

    Redundant checks are removed so that ``H`` has full row rank; info bits
    sit at the non-pivot columns of the reduced row echelon form.
    """

    H_input: np.ndarray
    max_iters: int = 25
    H: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Hin = np.asarray(self.H_input, dtype=np.uint8)
        if Hin.ndim != 2 or Hin.size == 0:
            raise LdpcConstructionError("parity-check matrix must be a non-empty 2-D array")
        R, pivots, rows = gf2_rref(Hin)
        if not pivots:
            raise LdpcConstructionError("parity-check matrix has rank 0")
        self.H = Hin[rows]
        self._R = R
        self._pivots = np.array(pivots, dtype=np.int64)
        self._info = np.array([j for j in range(Hin.shape[1]) if j not in set(pivots)], dtype=np.int64)
        if self._info.size == 0:
            raise LdpcConstructionError("code has no information bits")
        self._rows, self._cols = np.nonzero(self.H)

    @classmethod
    def from_alist(cls, path: str | Path, max_iters: int = 25) -> "LdpcCode":
        return cls(read_alist(path), max_iters)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return int(self._info.size)

    @property
    def rank(self) -> int:
        return self.H.shape[0]

    @property
    def info_positions(self) -> np.ndarray:
        return self._info

    @property
    def rate(self) -> float:
        return self.k / self.n

    def syndrome(self, c: np.ndarray) -> np.ndarray:
        return (self.H.astype(np.int64) @ np.asarray(c, dtype=np.int64)) % 2

    def encode(self, info) -> np.ndarray:
        u = np.asarray(info, dtype=np.uint8)
        if u.size != self.k:
            raise ValueError(f"expected {self.k} info bits, got {u.size}")
        c = np.zeros(self.n, dtype=np.uint8)
        c[self._info] = u
        c[self._pivots] = (self._R[:, self._info].astype(np.int64) @ u) % 2
        return c

    def extract(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.uint8)[self._info]

    def decode(self, llr, max_iters: int | None = None) -> tuple[np.ndarray, bool, int]:
        """Sum-product decoding; positive LLR favours bit 0.

        Returns (hard codeword, converged, iterations used).
        """
        iters = self.max_iters if max_iters is None else max_iters
        L = np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
        if L.size != self.n or not np.all(np.isfinite(L)):
            raise ValueError("llrs must be finite with one value per code bit")
        rows, cols = self._rows, self._cols
        m = self.H.shape[0]
        c2v = np.zeros(rows.size)
        hard = (L < 0).astype(np.uint8)
        for it in range(1, iters + 1):
            total = L + np.bincount(cols, weights=c2v, minlength=self.n)
            v2c = total[cols] - c2v
            t = np.tanh(0.5 * v2c)
            sign = np.where(t < 0, -1.0, 1.0)
            mag = np.maximum(np.abs(t), 1e-300)
            log_mag = np.log(mag)
            row_log = np.bincount(rows, weights=log_mag, minlength=m)
            row_neg = np.bincount(rows, weights=(sign < 0).astype(np.float64), minlength=m)
            ext_log = row_log[rows] - log_mag
            ext_sign = np.where((row_neg[rows] - (sign < 0)) % 2 == 1, -1.0, 1.0)
            prod = np.clip(ext_sign * np.exp(ext_log), -1 + 1e-15, 1 - 1e-15)
            c2v = np.clip(2.0 * np.arctanh(prod), -LLR_CLIP, LLR_CLIP)
            post = L + np.bincount(cols, weights=c2v, minlength=self.n)
            hard = (post < 0).astype(np.uint8)
            if not self.syndrome(hard).any():
                return hard, True, it
        return hard, False, iters


def gallager_matrix(n: int, wc: int, wr: int, rng: np.random.Generator) -> np.ndarray:
    """Regular Gallager ensemble: ``wc`` bands, each a column permutation of the first."""
    if n % wr:
        raise ValueError("n must be a multiple of the row weight")
    rows = n // wr
    band = np.zeros((rows, n), dtype=np.uint8)
    for i in range(rows):
        band[i, i * wr : (i + 1) * wr] = 1
    return np.vstack([band] + [band[:, rng.permutation(n)] for _ in range(wc - 1)])


def four_cycle_count(H: np.ndarray) -> int:
    """Number of row pairs sharing more than one column (each such pair closes a 4-cycle)."""
    overlap = H.astype(np.int64) @ H.T.astype(np.int64)
    np.fill_diagonal(overlap, 0)
    return int((overlap > 1).sum() // 2)


def has_four_cycle(H: np.ndarray) -> bool:
    return four_cycle_count(H) > 0


def gallager_code(n: int, wc: int, wr: int, seed: int = 0, max_swaps: int = 200_000) -> np.ndarray:
    """Gallager matrix with length-4 cycles removed by seeded column swaps inside the permuted bands."""
    rng = np.random.default_rng(seed)
    H = gallager_matrix(n, wc, wr, rng)
    rows = n // wr
    cost = four_cycle_count(H)
    for _ in range(max_swaps):
        if cost == 0:
            return H
        band = rng.integers(1, wc)
        a, b = rng.choice(n, size=2, replace=False)
        block = slice(band * rows, (band + 1) * rows)
        H[block, [a, b]] = H[block, [b, a]]
        new = four_cycle_count(H)
        if new <= cost:
            cost = new
        else:
            H[block, [a, b]] = H[block, [b, a]]
    raise LdpcConstructionError("no 4-cycle-free matrix found")
