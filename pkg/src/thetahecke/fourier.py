"""Fourier coefficient maps indexed by Gram classes."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable

from .gramclass import GramClass, canonicalize, class_inventory

__all__ = ["FourierMap", "InsufficientBound", "format_rational", "parse_rational"]


class InsufficientBound(ValueError):
    """A coefficient was requested beyond the trace bound a map guarantees."""


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    return Fraction(s)


class FourierMap:
    """Coefficients c(T) of a degree-n Siegel form on even psd classes.

    ``trace_bound`` is the guarantee that every class of trace at most the
    bound is known (absent entries are zero); ``None`` means unlimited,
    which is only possible with a ``source`` computing coefficients lazily.
    """

    def __init__(
        self,
        n: int,
        k: int,
        trace_bound: int | None,
        entries: dict | None = None,
        source: Callable[[GramClass], Fraction] | None = None,
        p_context: int | None = None,
    ):
        if trace_bound is None and source is None:
            raise ValueError("an unbounded map needs a coefficient source")
        if trace_bound is not None and trace_bound < 0:
            raise ValueError("trace bound must be nonnegative")
        self.n = n
        self.k = k
        self.trace_bound = trace_bound
        self.p_context = p_context
        self._entries: dict[GramClass, Fraction] = {}
        self._source = source
        for cls, v in (entries or {}).items():
            if cls.n != n:
                raise ValueError("class degree does not match the map")
            self._entries[cls] = Fraction(v)

    @property
    def lazy(self) -> bool:
        return self._source is not None

    def covers(self, bound: int) -> bool:
        return self.trace_bound is None or bound <= self.trace_bound

    def coeff(self, cls) -> Fraction:
        if not isinstance(cls, GramClass):
            cls = canonicalize(cls)
        if cls.n != self.n:
            raise ValueError("class degree does not match the map")
        if self.trace_bound is not None and cls.trace > self.trace_bound:
            raise InsufficientBound(
                f"class of trace {cls.trace} exceeds the map's trace bound {self.trace_bound}"
            )
        v = self._entries.get(cls)
        if v is None:
            v = Fraction(self._source(cls)) if self._source else Fraction(0)
            if self._source:
                self._entries[cls] = v
        return v

    __getitem__ = coeff

    def truncate(self, bound: int) -> "FourierMap":
        """Materialized copy holding every class of trace <= bound."""
        if not self.covers(bound):
            raise InsufficientBound(f"requested bound {bound} exceeds {self.trace_bound}")
        entries = {c: self.coeff(c) for c in class_inventory(self.n, bound)}
        return FourierMap(self.n, self.k, bound, entries, p_context=self.p_context)

    def classes(self) -> list:
        """Classes up to the trace bound (materialized maps only)."""
        if self.trace_bound is None:
            raise ValueError("lazy map has no finite class list; truncate it first")
        return class_inventory(self.n, self.trace_bound)

    def items(self):
        return [(c, self.coeff(c)) for c in self.classes()]

    def _combine(self, other: "FourierMap", f) -> "FourierMap":
        if self.n != other.n:
            raise ValueError("degree mismatch")
        bounds = [b for b in (self.trace_bound, other.trace_bound) if b is not None]
        if not bounds:
            raise ValueError("combine lazy maps only after truncation")
        bound = min(bounds)
        entries = {c: f(self.coeff(c), other.coeff(c)) for c in class_inventory(self.n, bound)}
        return FourierMap(self.n, self.k, bound, entries, p_context=self.p_context)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c) -> "FourierMap":
        c = Fraction(c)
        if self.trace_bound is None:
            src = self._source
            return FourierMap(self.n, self.k, None, source=lambda cls: c * src(cls))
        entries = {cls: c * v for cls, v in self.items()}
        return FourierMap(self.n, self.k, self.trace_bound, entries, p_context=self.p_context)

    __rmul__ = scale

    @staticmethod
    def linear_combination(terms, n: int, k: int, bound: int) -> "FourierMap":
        """sum c_i F_i over every class of trace <= bound."""
        classes = class_inventory(n, bound)
        entries = {cls: Fraction(0) for cls in classes}
        for c, F in terms:
            c = Fraction(c)
            if c == 0:
                continue
            for cls in classes:
                entries[cls] += c * F.coeff(cls)
        return FourierMap(n, k, bound, entries)

    def is_zero(self) -> bool:
        return all(v == 0 for _, v in self.items())

    def nonzero_classes(self) -> list:
        return [c for c, v in self.items() if v != 0]

    def equals(self, other: "FourierMap") -> bool:
        return not (self - other).nonzero_classes()

    def ratio_to(self, other: "FourierMap"):
        """The scalar r with self = r * other on the common range, or None."""
        r = None
        for c in class_inventory(self.n, min(self.trace_bound, other.trace_bound)):
            a, b = self.coeff(c), other.coeff(c)
            if b == 0:
                if a != 0:
                    return None
                continue
            if r is None:
                r = a / b
            elif a != r * b:
                return None
        return r

    # ------------------------------------------------------------ serialization

    def to_records(self) -> list:
        return [
            {"class_gram": [list(row) for row in c.rep], "trace": c.trace, "coefficient": format_rational(v)}
            for c, v in self.items()
        ]

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "k": self.k,
            "trace_bound": self.trace_bound,
            "records": self.to_records(),
        }
        if self.p_context is not None:
            doc["p"] = self.p_context
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FourierMap":
        doc = json.loads(text)
        entries = {}
        for rec in doc["records"]:
            entries[canonicalize(rec["class_gram"])] = parse_rational(rec["coefficient"])
        return cls(doc["n"], doc["k"], doc["trace_bound"], entries, p_context=doc.get("p"))

    def to_csv(self) -> str:
        lines = ["class_gram,trace,coefficient"]
        for rec in self.to_records():
            g = ";".join(" ".join(str(x) for x in row) for row in rec["class_gram"])
            lines.append(f"{g},{rec['trace']},{rec['coefficient']}")
        return "\n".join(lines) + "\n"
