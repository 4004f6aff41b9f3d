"""Numeric tolerances shared across modules.

Values are read at call time, so ``override`` (or the CLI ``tolerances``
config block) changes behaviour globally for the process.
"""
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace


@dataclass
class Tolerances:
    det: float = 1e-12          # |ad - bc - 1| for a valid group element
    sign: float = 1e-12         # entries below this are skipped by sign canonicalization
    dedup: float = 1e-9         # entrywise agreement of duplicate elements
    bucket: float = 1e-7        # hash grid for dedup buckets
    realness: float = 1e-10     # |Im B| / |B|
    bound_rel: float = 1e-9     # pass/fail slack on bound right-hand sides
    degenerate: float = 1e-300  # |B| below this is rejected
    torsion: float = 1e-6       # non-identity displacement must exceed this


TOL = Tolerances()


def override(**kw):
    """Set tolerances in place; unknown names raise ``KeyError``."""
    names = {f.name for f in fields(Tolerances)}
    for key, val in kw.items():
        if key not in names:
            raise KeyError(f"unknown tolerance {key!r}")
        setattr(TOL, key, float(val))


@contextmanager
def overridden(**kw):
    saved = replace(TOL)
    override(**kw)
    try:
        yield TOL
    finally:
        for f in fields(Tolerances):
            setattr(TOL, f.name, getattr(saved, f.name))


def as_dict():
    return {f.name: getattr(TOL, f.name) for f in fields(Tolerances)}
