"""Cocompact Fuchsian groups: presentations, word-ball enumeration, r_X estimates.

Enumeration is breadth-first over freely reduced words. The surface relator
is never applied symbolically; coincident elements reached by different words
are merged numerically.  Duplicate detection hashes the canonical-sign
entries rounded to a grid of ``TOL.bucket``; an entry lying within
``TOL.dedup`` of a rounding boundary is also probed in the neighbouring
bucket, so two copies of one element always meet.  Bucket hits are confirmed
entrywise before merging.

Letters are numbered ``2j`` for generator ``j`` and ``2j + 1`` for its
inverse, so ``l ^ 1`` is the inverse letter.  Within a shell, elements are
ordered lexicographically by word, and each element keeps its first word in
that order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .hyperbolic import (HPoint, MobiusElement, as_point, canonical_sign_array,
                         displacement_array)
from .tolerances import TOL

DEFAULT_ELEMENT_CAP = 5_000_000

_IDENTITY = np.array([1.0, 0.0, 0.0, 1.0])


@dataclass
class GroupSpec:
    genus: int
    generators: list
    label: str = ""
    relator: tuple | None = None  # word in letters evaluating to +-Id, if known

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 2:
            raise ValidationError(f"genus must be an integer >= 2, got {self.genus!r}")
        self.genus = int(self.genus)
        if len(self.generators) != 2 * self.genus:
            raise ValidationError(
                f"genus {self.genus} needs {2 * self.genus} generators, got {len(self.generators)}")
        gens = []
        for i, g in enumerate(self.generators):
            if not isinstance(g, MobiusElement):
                try:
                    g = MobiusElement(*g)
                except ValidationError as exc:
                    raise ValidationError(f"generator {i}: {exc}") from None
            gens.append(g)
        self.generators = gens

    def letter_matrices(self) -> np.ndarray:
        """(4g, 4) array: generator j at row 2j, its inverse at row 2j+1."""
        rows = []
        for g in self.generators:
            rows.append(g.entries)
            rows.append(g.inverse().entries)
        return np.array(rows, dtype=float)

    def letter_name(self, letter: int) -> str:
        return f"g{letter // 2}" + ("^-1" if letter & 1 else "")

    def evaluate(self, word) -> np.ndarray:
        mats = self.letter_matrices()
        m = np.eye(2)
        for l in word:
            m = m @ mats[l].reshape(2, 2)
        return m

    def to_dict(self) -> dict:
        d = {"label": self.label, "genus": self.genus,
             "generators": [list(g.entries) for g in self.generators]}
        if self.relator is not None:
            d["relator"] = list(self.relator)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GroupSpec":
        try:
            gens = [tuple(float(v) for v in g) for g in d["generators"]]
            genus = d["genus"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed group spec: {exc}") from None
        for i, g in enumerate(gens):
            if len(g) != 4:
                raise ValidationError(f"generator {i}: expected 4 entries, got {len(g)}")
        rel = d.get("relator")
        return cls(genus=genus, generators=gens, label=str(d.get("label", "")),
                   relator=tuple(rel) if rel is not None else None)

    @classmethod
    def load(cls, path) -> "GroupSpec":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read group spec {path}: {exc}") from None
        return cls.from_dict(d)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def bolza_group() -> GroupSpec:
    """Genus-2 group of the regular octagon with vertex angles pi/4.

    The octagon is centred at i.  Generator j pairs opposite sides and is the
    hyperbolic translation through i along the direction at angle j*pi/4 in
    the disk model, by 2*arccosh(1 + sqrt 2).  Conjugated to the upper
    half-plane it reads

        [[alpha + beta cos t, -beta sin t], [-beta sin t, alpha - beta cos t]]

    with alpha = 1 + sqrt 2, beta = sqrt(2 + 2 sqrt 2), t = j*pi/4.  The
    eight octagon side pairings are these four and their inverses, subject to
    g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1.
    """
    s2 = math.sqrt(2.0)
    alpha = 1.0 + s2
    beta = math.sqrt(2.0 + 2.0 * s2)
    h = s2 / 2.0
    trig = [(1.0, 0.0), (h, h), (0.0, 1.0), (-h, h)]
    gens = [(alpha + beta * ct, -beta * st, -beta * st, alpha - beta * ct) for ct, st in trig]
    relator = (0, 3, 4, 7, 1, 2, 5, 6)
    return GroupSpec(genus=2, generators=gens, label="bolza", relator=relator)


@dataclass
class ElementSet:
    """Deduplicated group elements in canonical (word length, word) order.

    Row 0 is always the identity.  ``parent`` and ``letter`` encode each
    element's word as its parent's word followed by one letter.
    """
    matrices: np.ndarray
    word_length: np.ndarray
    parent: np.ndarray
    letter: np.ndarray
    max_word_length: int
    basepoint_used_for_pruning: HPoint | None = None
    displacement_cutoff: float | None = None
    group_label: str = ""
    _shells: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.matrices)

    @property
    def elements(self) -> list:
        from .hyperbolic import _unchecked
        return [_unchecked(*row) for row in self.matrices]

    def word(self, i: int) -> tuple:
        out = []
        while i > 0:
            out.append(int(self.letter[i]))
            i = int(self.parent[i])
        return tuple(reversed(out))

    def shell_starts(self) -> np.ndarray:
        """Offsets of each word-length shell, with a final sentinel."""
        if self._shells is None:
            n = int(self.word_length[-1]) + 1 if len(self) else 0
            counts = np.bincount(self.word_length, minlength=n)
            self._shells = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return self._shells

    def restrict(self, max_word_length: int) -> "ElementSet":
        """Sub-ball of words of length <= ``max_word_length``."""
        n = int(np.searchsorted(self.word_length, max_word_length, side="right"))
        return ElementSet(self.matrices[:n], self.word_length[:n], self.parent[:n],
                          self.letter[:n], min(max_word_length, self.max_word_length),
                          self.basepoint_used_for_pruning, self.displacement_cutoff,
                          self.group_label)

    def conjugated(self, g) -> "ElementSet":
        """{g h g^-1}: the same ball seen from g(basepoint).

        Away from a fundamental domain the pruning margin (largest generator
        displacement) grows fast, so transporting a ball built near the
        centre is far cheaper than enumerating around g(z) directly.
        """
        # products of enumerated elements carry rounding in det; no re-check
        a, b, c, d = (float(v) for v in (g.entries if isinstance(g, MobiusElement) else g))
        G = np.array([[a, b], [c, d]])
        Ginv = np.array([[d, -b], [-c, a]])
        m = self.matrices.reshape(-1, 2, 2)
        out = canonical_sign_array((G @ m @ Ginv).reshape(-1, 4))
        out[0] = _IDENTITY
        base = self.basepoint_used_for_pruning
        if base is not None:
            w = (a * base.z + b) / (c * base.z + d)
            base = HPoint(w.real, w.imag)
        return ElementSet(out, self.word_length, self.parent, self.letter,
                          self.max_word_length, base, self.displacement_cutoff,
                          self.group_label)

    def identity_only(self) -> "ElementSet":
        return self.restrict(0)

    def find(self, m, tol=None) -> int:
        """Index of the element equal to ``m`` (a MobiusElement or 4 entries), or -1."""
        tol = TOL.dedup if tol is None else tol
        row = canonical_sign_array(np.atleast_2d(
            m.entries if isinstance(m, MobiusElement) else np.asarray(m, float)))[0]
        err = np.abs(self.matrices - row).max(axis=1)
        hits = np.nonzero(err <= tol + _NOISE * np.abs(row).max())[0]
        return int(hits[0]) if len(hits) else -1


# ---------------------------------------------------------------- dedup index

_MIX = np.uint64(0x9E3779B97F4A7C15)
_NOISE = 1e-13


def _hash_keys(k: np.ndarray) -> np.ndarray:
    h = np.zeros(len(k), dtype=np.uint64)
    for j in range(4):
        h = h * _MIX + k[:, j].astype(np.uint64)
    return h


def _bucket(m: np.ndarray):
    """Primary hash per row plus (rows, hashes) for neighbour-bucket probes."""
    q = TOL.bucket
    scaled = m / q
    k = np.rint(scaled)
    frac = scaled - k
    # duplicates differ by at most _dup_tol; probe the neighbour when that close to .5
    slack = _dup_tol(m) / q
    amb = np.abs(frac) >= 0.5 - slack
    step = np.where(frac >= 0, 1, -1).astype(np.int64)
    k = k.astype(np.int64)
    prim = _hash_keys(k)
    alts = []
    any_amb = np.nonzero(amb.any(axis=1))[0]
    if len(any_amb):
        ka, aa, sa = k[any_amb], amb[any_amb], step[any_amb]
        for subset in range(1, 16):
            cols = [j for j in range(4) if subset >> j & 1]
            ok = np.all(aa[:, cols], axis=1)
            if not ok.any():
                continue
            kk = ka[ok].copy()
            for j in cols:
                kk[:, j] += sa[ok, j]
            alts.append((any_amb[ok], _hash_keys(kk)))
    return prim, alts


def _dup_tol(x):
    # absolute dedup tolerance plus product rounding noise on large entries
    return TOL.dedup + _NOISE * np.abs(x)


def _close_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.all(np.abs(x - y) <= _dup_tol(x), axis=1)


class _Index:
    """Sorted primary hashes of stored elements."""

    def __init__(self):
        self.h = np.zeros(0, dtype=np.uint64)
        self.idx = np.zeros(0, dtype=np.int64)

    def add(self, hashes, indices):
        h = np.concatenate([self.h, hashes])
        i = np.concatenate([self.idx, indices])
        order = np.argsort(h, kind="stable")
        self.h, self.idx = h[order], i[order]

    def lookup(self, hashes):
        """Stored index per hash, -1 when absent."""
        out = np.full(len(hashes), -1, dtype=np.int64)
        if not len(self.h) or not len(hashes):
            return out
        order = np.argsort(hashes)
        hs = hashes[order]
        pos = np.minimum(np.searchsorted(self.h, hs), len(self.h) - 1)
        hit = self.h[pos] == hs
        out[order[hit]] = self.idx[pos[hit]]
        return out


def _dedup_batch(cand, store, index):
    """Mask of rows of ``cand`` that are new: not in ``store`` and first in batch."""
    n = len(cand)
    prim, alts = _bucket(cand)
    # within-batch: each row points at the earliest row sharing a (probed) bucket
    uniq, first, inv = np.unique(prim, return_index=True, return_inverse=True)
    rep = first[inv]
    for rows, h in alts:
        pos = np.minimum(np.searchsorted(uniq, h), len(uniq) - 1)
        hit = uniq[pos] == h
        r = rows[hit]
        rep[r] = np.minimum(rep[r], first[pos[hit]])
    # rows that bucket together but are not numerically equal are distinct (hash collision)
    mism = (rep != np.arange(n)) & ~_close_rows(cand, cand[rep])
    rep[mism] = np.nonzero(mism)[0]
    new = rep == np.arange(n)

    # against the stored elements
    cols = np.nonzero(new)[0]
    seen = np.zeros(n, dtype=bool)
    hit = index.lookup(prim[cols])
    ok = hit >= 0
    seen[cols[ok]] = _close_rows(cand[cols[ok]], store[hit[ok]])
    for rows, h in alts:
        hit = index.lookup(h)
        ok = (hit >= 0) & new[rows]
        if ok.any():
            seen[rows[ok]] |= _close_rows(cand[rows[ok]], store[hit[ok]])
    return new & ~seen, prim


def enumerate_elements(group: GroupSpec, max_word_length: int, prune=None,
                       element_cap: int | None = None) -> ElementSet:
    """Distinct elements with words of length <= ``max_word_length``.

    ``prune`` is ``(basepoint, cutoff)``: an element moving the basepoint by
    more than ``cutoff`` plus the largest generator displacement there is
    dropped and not extended.
    """
    if max_word_length < 0:
        raise ValidationError("max_word_length must be >= 0")
    cap = DEFAULT_ELEMENT_CAP if element_cap is None else int(element_cap)
    letters = group.letter_matrices()
    nl = len(letters)
    inverse_letter = np.append(np.arange(nl) ^ 1, -1)  # slot nl: 'no last letter'

    base = limit = None
    if prune is not None:
        base, cutoff = as_point(prune[0]), float(prune[1])
        margin = float(displacement_array(letters, base).max())
        limit = cutoff + margin

    store = np.empty((min(cap, 1024) + 1, 4))
    store[0] = _IDENTITY
    count = 1
    wl, par, let = [np.zeros(1, np.int64)], [np.full(1, -1, np.int64)], [np.full(1, -1, np.int64)]
    index = _Index()
    index.add(_bucket(store[:1])[0], np.array([0]))
    frontier = np.array([0])
    frontier_last = np.array([nl])

    la, lb, lc, ld = (letters[:, j] for j in range(4))
    for length in range(1, max_word_length + 1):
        if not len(frontier):
            break
        fm = store[frontier]
        pa, pb, pc, pd = (fm[:, j:j + 1] for j in range(4))
        cand = np.stack([pa * la + pb * lc, pa * lb + pb * ld,
                         pc * la + pd * lc, pc * lb + pd * ld], axis=-1).reshape(-1, 4)
        cpar = np.repeat(frontier, nl)
        clet = np.tile(np.arange(nl), len(frontier))
        # free reduction: never follow a letter by its inverse
        keep = clet != np.repeat(inverse_letter[frontier_last], nl)
        cand, cpar, clet = cand[keep], cpar[keep], clet[keep]
        cand = canonical_sign_array(cand)
        if limit is not None:
            near = displacement_array(cand, base) <= limit
            cand, cpar, clet = cand[near], cpar[near], clet[near]
        if not len(cand):
            break
        new, prim = _dedup_batch(cand, store[:count], index)
        n_new = int(new.sum())
        if count + n_new > cap:
            raise BudgetExceeded(
                f"element cap {cap} exceeded at word length {length} ({count + n_new} elements)")
        if count + n_new > len(store):
            grown = np.empty((max(2 * len(store), count + n_new), 4))
            grown[:count] = store[:count]
            store = grown
        ids = np.arange(count, count + n_new)
        store[ids] = cand[new]
        index.add(prim[new], ids)
        wl.append(np.full(n_new, length, np.int64))
        par.append(cpar[new])
        let.append(clet[new])
        count += n_new
        frontier = ids
        frontier_last = clet[new]

    return ElementSet(
        matrices=store[:count].copy(),
        word_length=np.concatenate(wl),
        parent=np.concatenate(par),
        letter=np.concatenate(let),
        max_word_length=int(max_word_length),
        basepoint_used_for_pruning=base,
        displacement_cutoff=None if prune is None else float(prune[1]),
        group_label=group.label,
    )


@dataclass
class InjectivityEstimate:
    r_upper: float
    argmin_word: tuple
    argmin_point: HPoint
    word_length_budget: int
    argmin_word_text: str = ""

    def to_dict(self):
        return {"r_upper": self.r_upper, "argmin_word": list(self.argmin_word),
                "argmin_word_text": self.argmin_word_text,
                "argmin_point": [self.argmin_point.x, self.argmin_point.y],
                "word_length_budget": self.word_length_budget, "is_upper_bound": True}


def min_displacement(elems: ElementSet, z):
    """(min over non-identity elements of d_H(z, g z), its row index)."""
    if len(elems) < 2:
        return math.inf, -1
    d = displacement_array(elems.matrices[1:], z)
    i = int(np.argmin(d))
    return float(d[i]), i + 1


def injectivity_radius(group: GroupSpec, basepoint_grid, max_word_length: int,
                       element_cap: int | None = None) -> InjectivityEstimate:
    """Smallest displacement d_H(z, g z) over the grid and the enumerated g != Id.

    This only bounds r_X from above.  Each grid point gets its own ball,
    pruned at the smallest generator displacement there: nothing moving z
    further can improve the minimum.
    """
    grid = [as_point(p) for p in basepoint_grid]
    if not grid:
        raise ValidationError("basepoint grid is empty")
    if max_word_length < 1:
        raise ValidationError("max_word_length must be >= 1")
    letters = group.letter_matrices()
    best = (math.inf, (), None)
    for z in grid:
        cut = float(displacement_array(letters, z).min())
        elems = enumerate_elements(group, max_word_length, prune=(z, cut), element_cap=element_cap)
        d, i = min_displacement(elems, z)
        if d <= TOL.torsion:
            raise ValidationError(
                f"element {elems.word(i)} fixes {z} (displacement {d:.3g}): torsion or bad dedup")
        if d < best[0]:
            best = (d, elems.word(i), z)
    d, word, z = best
    return InjectivityEstimate(d, word, z, int(max_word_length),
                               " ".join(group.letter_name(l) for l in word))
