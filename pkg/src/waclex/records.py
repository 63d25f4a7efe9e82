"""Records and record types with classifier-backed perceptual predicates.

A record type lists labeled constraints; basic-type constraints check
structurally (factor 1 or hard fail to 0), while classifier predicates apply
a word's classifier to the feature vector stored at the label and contribute
its fit probability. A typing judgment is the product of the factors, so a
record built from an object's features against a type listing a phrase's
words reproduces the phrase score exactly.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, FileFormatError, ValidationError
from .lexicon import Lexicon, validate_feature_vector

BASIC_TYPES = ("str", "real", "int", "vec")


@dataclass(frozen=True)
class BasicType:
    """Structural constraint: the label's value must have this primitive shape."""

    name: str

    def __post_init__(self):
        if self.name not in BASIC_TYPES:
            raise ValidationError(f"unknown basic type {self.name!r}; expected one of {BASIC_TYPES}")


@dataclass(frozen=True)
class ClassifierPredicate:
    """Perceptual constraint: judge the label's feature vector with this word's classifier."""

    word: str


Constraint = Union[BasicType, ClassifierPredicate]


@dataclass(frozen=True)
class RecordType:
    labels: tuple[tuple[str, Constraint], ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        names = [name for name, _ in self.labels]
        if len(set(names)) != len(names):
            raise ValidationError("record type labels must be unique")


@dataclass(frozen=True)
class Record:
    labels: tuple[tuple[str, object], ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        names = [name for name, _ in self.labels]
        if len(set(names)) != len(names):
            raise ValidationError("record labels must be unique")

    def __contains__(self, label: str) -> bool:
        return any(name == label for name, _ in self.labels)

    def value(self, label: str):
        for name, value in self.labels:
            if name == label:
                return value
        raise KeyError(label)


def _satisfies_basic(value, basic: BasicType) -> bool:
    if basic.name == "str":
        return isinstance(value, str)
    if basic.name == "int":
        return isinstance(value, numbers.Integral) and not isinstance(value, bool)
    if basic.name == "real":
        return isinstance(value, numbers.Real) and not isinstance(value, bool)
    arr = np.asarray(value)
    return (
        arr.ndim == 1
        and arr.size > 0
        and np.issubdtype(arr.dtype, np.number)
        and bool(np.all(np.isfinite(arr.astype(np.float64))))
    )


def judge(record: Record, rtype: RecordType, lexicon: Lexicon) -> float:
    """Probability that the record inhabits the type.

    Basic-type constraints contribute factor 1 when satisfied and force the
    judgment to 0 when violated; classifier predicates contribute the word's
    fit probability on the label's feature vector. A label missing from the
    record is an error, distinct from a 0 judgment.
    """
    log_total = 0.0
    for label, constraint in rtype.labels:
        if label not in record:
            raise ValidationError(f"record is missing label {label!r} required by the type")
        value = record.value(label)
        if isinstance(constraint, BasicType):
            if not _satisfies_basic(value, constraint):
                return 0.0
        else:
            if constraint.word not in lexicon:
                raise ValidationError(
                    f"classifier predicate {constraint.word!r} is not in the lexicon"
                )
            features = validate_feature_vector(value, lexicon.dim)
            log_total += math.log(lexicon.apply(constraint.word, features))
    return math.exp(log_total)


def holds(record: Record, rtype: RecordType, lexicon: Lexicon, threshold: float = 0.5) -> bool:
    """Discretized judgment: judge(record, rtype) >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError("threshold must lie in (0, 1)")
    return judge(record, rtype, lexicon) >= threshold


def phrase_type(tokens: Sequence[str]) -> RecordType:
    """Record type whose predicates are exactly a phrase's words, in order."""
    return RecordType(
        tuple((f"w{i}_{tok}", ClassifierPredicate(tok)) for i, tok in enumerate(tokens))
    )


def object_record(rtype: RecordType, features) -> Record:
    """Record supplying one object's features for every label the type requires."""
    return Record(tuple((label, features) for label, _ in rtype.labels))


def parse_record_type(text: str, path: str = "<string>") -> RecordType:
    """Parse the declarative record-type format.

    One label per line, ``label : constraint``, where constraint is a basic
    type (str, real, int, vec) or ``word:<token>`` for a classifier
    predicate. Blank lines and ``#`` comments are skipped.
    """
    labels: list[tuple[str, Constraint]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise FileFormatError("expected 'label : constraint'", path=path, line=line_no)
        label, _, rhs = line.partition(":")
        label = label.strip()
        rhs = rhs.strip()
        if not label or not rhs:
            raise FileFormatError("expected 'label : constraint'", path=path, line=line_no)
        if rhs.startswith("word:"):
            word = rhs[len("word:"):].strip()
            if not word:
                raise FileFormatError("word predicate needs a token", path=path, line=line_no)
            constraint: Constraint = ClassifierPredicate(word)
        elif rhs in BASIC_TYPES:
            constraint = BasicType(rhs)
        else:
            raise FileFormatError(
                f"unknown constraint {rhs!r} (expected one of {BASIC_TYPES} or 'word:<token>')",
                path=path,
                line=line_no,
            )
        labels.append((label, constraint))
    if not labels:
        raise FileFormatError("record type has no labels", path=path)
    return RecordType(tuple(labels))


def load_record_type(path: str) -> RecordType:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_record_type(fh.read(), path=path)


def load_record(path: str) -> Record:
    """Load a record from a JSON object; array values become feature vectors."""
    import json

    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"invalid JSON ({exc.msg})", path=path, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise FileFormatError("expected a JSON object of label -> value", path=path)
    labels = []
    for label, value in doc.items():
        if isinstance(value, list):
            value = np.asarray(value, dtype=np.float64)
        labels.append((label, value))
    return Record(tuple(labels))
